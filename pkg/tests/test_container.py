import os
import struct

import numpy as np
import pytest

from ghostsim import (
    ContainerEntry,
    Distribution,
    entry_from_gf,
    gen_speckle_set,
    gf_from_entry,
    gi_from_gf,
    group_entries,
    make_gf,
    read_container,
    write_container,
)
from ghostsim.errors import (
    DimensionMismatch,
    BadMagic,
    CorruptGF,
    LengthMismatch,
    TruncatedFile,
    VersionUnsupported,
)


def _entry(seed=5, m=4, size=32, label="x", planes=False, digit_obj=None):
    from ghostsim import digit

    obj = digit_obj if digit_obj is not None else digit(3, size)
    gf = make_gf(obj, gen_speckle_set(seed, m, size, size), object_id=label)
    return entry_from_gf(gf, obj.data, include_planes=planes)


def test_empty_container_is_18_byte_header(tmp_path):
    p = tmp_path / "empty.gfb"
    write_container(p, [], height=64, width=64, m=128)
    assert os.path.getsize(p) == 18
    magic, version, h, w, m = struct.unpack("<4sHIII", p.read_bytes())
    assert magic == b"GFB1" and version == 1 and (h, w, m) == (64, 64, 128)
    cont = read_container(p)
    assert cont.entries == [] and (cont.height, cont.width, cont.m) == (64, 64, 128)


def test_single_entry_size_arithmetic(tmp_path):
    p = tmp_path / "one.gfb"
    write_container(p, [_entry(label="x")])
    expected = 18 + (2 + 1) + 8 + 1 + 4 * 32 * 32 + 4 * 4 + 1
    assert os.path.getsize(p) == expected


def test_roundtrip_without_planes_is_bit_exact(tmp_path):
    p = tmp_path / "a.gfb"
    entries = [_entry(seed=s, label=f"obj{s}") for s in (5, 6)]
    write_container(p, entries)
    raw1 = p.read_bytes()
    back = read_container(p)
    assert len(back.entries) == 2
    for orig, rt in zip(entries, back.entries):
        assert rt.object_id == orig.object_id
        assert rt.speckle_seed == orig.speckle_seed
        assert rt.distribution == orig.distribution
        # storage is float32; the original was built from float32-exact data
        assert np.array_equal(rt.ground_truth, orig.ground_truth.astype(np.float32))
        assert np.array_equal(rt.buckets.astype(np.float32), orig.buckets.astype(np.float32))
        assert rt.planes is None
    write_container(p, back.entries)
    assert p.read_bytes() == raw1


def test_roundtrip_with_planes(tmp_path):
    p = tmp_path / "b.gfb"
    e = _entry(planes=True)
    write_container(p, [e])
    rt = read_container(p).entries[0]
    assert rt.planes is not None
    assert np.array_equal(rt.planes, e.planes.astype(np.float32))
    write_container(p, [rt])
    rt2 = read_container(p).entries[0]
    assert np.array_equal(rt2.planes, rt.planes)


def test_write_read_write_is_stable(tmp_path):
    p1, p2 = tmp_path / "c1.gfb", tmp_path / "c2.gfb"
    write_container(p1, [_entry(seed=9, planes=True), _entry(seed=10)])
    write_container(p2, read_container(p1).entries)
    assert p1.read_bytes() == p2.read_bytes()


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.gfb"
    p.write_bytes(b"NOPE" + bytes(14))
    with pytest.raises(BadMagic):
        read_container(p)


def test_unsupported_version(tmp_path):
    p = tmp_path / "v2.gfb"
    p.write_bytes(struct.pack("<4sHIII", b"GFB1", 2, 8, 8, 4))
    with pytest.raises(VersionUnsupported):
        read_container(p)


def test_truncated_entry(tmp_path):
    p = tmp_path / "trunc.gfb"
    write_container(p, [_entry()])
    raw = p.read_bytes()
    p.write_bytes(raw[:-7])
    with pytest.raises(TruncatedFile):
        read_container(p)


def test_tampered_plane_fails_consistency(tmp_path):
    p = tmp_path / "tamper.gfb"
    write_container(p, [_entry(planes=True)])
    raw = bytearray(p.read_bytes())
    # high byte of a float32 inside the stored planes block
    raw[len(raw) - 4 * 4 * 32 * 32 + 4 * 600 + 3] ^= 0xFF
    p.write_bytes(bytes(raw))
    entry = read_container(p).entries[0]  # reader itself stays happy
    with pytest.raises(CorruptGF):
        gi_from_gf(gf_from_entry(entry))


def test_mixed_dimensions_rejected(tmp_path):
    with pytest.raises(DimensionMismatch):
        write_container(tmp_path / "mix.gfb", [_entry(size=32), _entry(size=16)])


def test_entry_validation():
    with pytest.raises(LengthMismatch):
        ContainerEntry(
            object_id="z",
            speckle_seed=1,
            distribution=Distribution.UNIFORM01,
            ground_truth=np.zeros((8, 8)),
            buckets=np.ones(4),
            planes=np.zeros((3, 8, 8)),
        )


def test_gf_entry_roundtrip_reconstructs(digit3):
    s = gen_speckle_set(11, 64, 64, 64)
    gf = make_gf(digit3, s, object_id="d3")
    entry = entry_from_gf(gf, digit3.data)
    back = gf_from_entry(entry)
    a = gi_from_gf(back).image.data
    b = gi_from_gf(gf).image.data
    # buckets pass through float32 in the entry
    assert np.abs(a - b).max() < 1e-4
    assert back.object_id == "d3"


def test_group_entries_groups_consecutive_seeds():
    entries = [
        _entry(seed=1, label="a0"),
        _entry(seed=1, label="a1"),
        _entry(seed=2, label="b0"),
        _entry(seed=1, label="c0"),
    ]
    groups = group_entries(entries)
    assert [g.batch_index for g in groups] == [0, 1, 2]
    assert [g.n_frames for g in groups] == [2, 1, 1]
    assert groups[0].speckle_seed == 1 and groups[1].speckle_seed == 2


def test_write_is_atomic(tmp_path):
    p = tmp_path / "atomic.gfb"
    write_container(p, [_entry()])
    assert not os.path.exists(str(p) + ".tmp")
    leftovers = [f for f in os.listdir(tmp_path) if f != "atomic.gfb"]
    assert leftovers == []
