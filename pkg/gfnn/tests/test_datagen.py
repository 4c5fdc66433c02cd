"""Digit rendering and dataset synthesis."""

import numpy as np
import pytest

from gfnn.datagen import make_entries, write_dataset
from gfnn.digits import render_digit
from gfnn.errors import BadShape
from gfnn.gfb import gen_patterns, read_gfb


def test_render_digit_plain_is_deterministic():
    a = render_digit(3, 32)
    b = render_digit(3, 32)
    assert np.array_equal(a, b)
    assert a.shape == (32, 32)
    assert 0.0 <= a.min() and a.max() <= 1.0
    assert a.max() > 0.5


def test_render_digit_warps_vary(rng):
    a = render_digit(7, 64, rng)
    b = render_digit(7, 64, rng)
    assert not np.array_equal(a, b)
    assert a.max() == pytest.approx(1.0)


def test_render_digit_border_stays_clear(rng):
    for d in range(10):
        img = render_digit(d, 64, rng)
        border = np.concatenate([img[:3].ravel(), img[-3:].ravel(),
                                 img[:, :3].ravel(), img[:, -3:].ravel()])
        assert border.max() < 0.2, f"digit {d} touches the border"


def test_render_digit_rejects_bad_input():
    with pytest.raises(ValueError, match="digit"):
        render_digit(10, 32)
    with pytest.raises(BadShape):
        render_digit(3, 8)


def test_make_entries_layout_and_buckets():
    entries, patterns = make_entries(12, 32, 16, seed=5)
    assert len(entries) == 12
    assert [e.label[:2] for e in entries[:3]] == ["d0", "d1", "d2"]
    assert entries[10].label.startswith("d0")
    seeds = {e.speckle_seed for e in entries}
    assert len(seeds) == 1
    # buckets are plain pattern/object dot products
    e = entries[4]
    want = patterns.reshape(16, -1) @ e.ground_truth.astype(np.float64).ravel()
    assert np.allclose(e.buckets, want.astype(np.float32))


def test_make_entries_reproducible():
    a, _ = make_entries(6, 32, 8, seed=31)
    b, _ = make_entries(6, 32, 8, seed=31)
    for x, y in zip(a, b):
        assert x.label == y.label
        assert np.array_equal(x.ground_truth, y.ground_truth)
        assert np.array_equal(x.buckets, y.buckets)
    c, _ = make_entries(6, 32, 8, seed=32)
    assert not np.array_equal(a[0].ground_truth, c[0].ground_truth)


def test_make_entries_validation():
    with pytest.raises(BadShape):
        make_entries(0, 32, 8, seed=1)
    with pytest.raises(BadShape):
        make_entries(4, 32, 0, seed=1)


def test_write_dataset_split(tmp_path):
    train, heldout = tmp_path / "tr.gfb", tmp_path / "ho.gfb"
    summary = write_dataset(train, 20, 32, 32, seed=7, heldout=5,
                            heldout_out=heldout)
    assert summary == {"train": 15, "heldout": 5, "size": 32, "m": 32,
                       "sampling_ratio": 32 / 1024.0}
    tr, ho = read_gfb(train), read_gfb(heldout)
    assert len(tr.entries) == 15 and len(ho.entries) == 5
    # same measurement operator on both sides of the split
    assert tr.entries[0].speckle_seed == ho.entries[0].speckle_seed
    tr_labels = {e.label for e in tr.entries}
    assert tr_labels.isdisjoint({e.label for e in ho.entries})


def test_write_dataset_heldout_validation(tmp_path):
    with pytest.raises(ValueError, match="heldout_out"):
        write_dataset(tmp_path / "x.gfb", 10, 32, 8, seed=1, heldout=3)
    with pytest.raises(BadShape, match="heldout"):
        write_dataset(tmp_path / "x.gfb", 10, 32, 8, seed=1, heldout=10,
                      heldout_out=tmp_path / "y.gfb")


def test_dataset_planes_regenerate(tmp_path):
    path = tmp_path / "d.gfb"
    write_dataset(path, 4, 32, 8, seed=3)
    ds = read_gfb(path)
    e = ds.entries[0]
    assert e.planes is None
    pats = gen_patterns(e.speckle_seed, 8, 32, 32, e.distribution)
    want = pats.reshape(8, -1) @ e.ground_truth.astype(np.float64).ravel()
    assert np.allclose(e.buckets, want.astype(np.float32), atol=1e-3)
