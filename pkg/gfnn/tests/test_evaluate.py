"""Inference path, baseline reconstruction, reports, metric agreement."""

import json
import math

import numpy as np
import pytest
import torch

from gfnn.data import load_training_data
from gfnn.evaluate import evaluate, infer, raw_gi, write_report
from gfnn.gfb import gen_patterns
from gfnn.metrics import psnr, ssim, to_scale255
from gfnn.model import build_model
from gfnn.pgm import write_pgm


@pytest.fixture(scope="module")
def small_model():
    torch.manual_seed(5)
    return build_model(32, 32, 32, width_base=8).eval()


def test_infer_matches_training_input_path(small_model, tiny_files):
    data = load_training_data(tiny_files[0])
    patterns = data.patterns_for(3).astype(np.float64)
    planes = patterns * data.buckets[3].astype(np.float64)[:, None, None]
    out = infer(small_model, planes, data.buckets[3])
    x = torch.from_numpy(data.gf_input([3]))
    with torch.no_grad():
        direct = np.maximum(small_model(x)[0, 0].numpy(), 0.0)
    assert out.shape == (32, 32)
    assert np.all(out >= 0.0)
    np.testing.assert_allclose(out, direct, atol=1e-5)


def test_infer_is_deterministic(small_model, tiny_files):
    data = load_training_data(tiny_files[0])
    planes = data.patterns_for(0) * data.buckets[0][:, None, None]
    a = infer(small_model, planes, data.buckets[0])
    b = infer(small_model, planes, data.buckets[0])
    np.testing.assert_array_equal(a, b)


def test_raw_gi_is_the_covariance_estimator(rng):
    patterns = gen_patterns(11, 24, 8, 8, 0)
    truth = rng.random((8, 8))
    buckets = np.array([float(np.sum(truth * p)) for p in patterns])
    expected = np.zeros((8, 8))
    for s, p in zip(buckets, patterns):
        expected += s * p
    expected = expected / 24 - buckets.mean() * patterns.mean(axis=0)
    np.testing.assert_allclose(raw_gi(patterns, buckets), expected, atol=1e-12)


def test_evaluate_schema(small_model, tiny_files):
    data = load_training_data(tiny_files[0])
    results = evaluate(small_model, data, indices=[0, 4, 7])
    assert [r["entry_id"] for r in results] == [data.labels[0], data.labels[4],
                                                data.labels[7]]
    for r in results:
        assert set(r) == {"entry_id", "psnr_db", "ssim"}
        assert r["psnr_db"] > 0.0
        assert -1.0 <= r["ssim"] <= 1.0


def test_write_report(tmp_path):
    results = [{"entry_id": "a", "psnr_db": 12.5, "ssim": 0.25},
               {"entry_id": "b", "psnr_db": math.inf, "ssim": 1.0}]
    path = tmp_path / "report.json"
    write_report(path, results)
    doc = json.loads(path.read_text())
    assert doc["entries"][1]["psnr_db"] == "inf"
    assert doc["mean_psnr_db"] == "inf"
    assert doc["mean_ssim"] == pytest.approx(0.625)
    assert doc["entries"][0]["psnr_db"] == pytest.approx(12.5)


def _producer_metrics(producer, ref, test):
    proc = producer("metrics", "--ref", str(ref), "--test", str(test))
    assert proc.returncode == 0, proc.stderr
    fields = dict(part.split("=") for part in proc.stdout.split())
    return fields["psnr_db"], fields["ssim"]


def test_metrics_agree_with_producer(producer, rng, tmp_path):
    """Both packages score identical PGM pairs to within 1e-6."""
    for k in range(3):
        ref_img = rng.random((24, 20))
        test_img = np.clip(ref_img + rng.normal(0, 0.05 * (k + 1), (24, 20)), 0, 1)
        ref_path, test_path = tmp_path / f"r{k}.pgm", tmp_path / f"t{k}.pgm"
        write_pgm(ref_path, ref_img)
        write_pgm(test_path, test_img)
        theirs_psnr, theirs_ssim = _producer_metrics(producer, ref_path, test_path)
        from gfnn.pgm import read_pgm
        ours_ref = to_scale255(read_pgm(ref_path))
        ours_test = to_scale255(read_pgm(test_path))
        assert psnr(ours_ref, ours_test) == pytest.approx(float(theirs_psnr), abs=1e-6)
        assert ssim(ours_ref, ours_test) == pytest.approx(float(theirs_ssim), abs=1e-6)


def test_metrics_agree_on_identical_pair(producer, rng, tmp_path):
    img = rng.random((16, 16))
    path = tmp_path / "same.pgm"
    write_pgm(path, img)
    theirs_psnr, theirs_ssim = _producer_metrics(producer, path, path)
    assert theirs_psnr == "inf"
    from gfnn.pgm import read_pgm
    ours = to_scale255(read_pgm(path))
    assert math.isinf(psnr(ours, ours))
    assert ssim(ours, ours) == pytest.approx(float(theirs_ssim), abs=1e-6)
