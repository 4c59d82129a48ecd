import hashlib
import json
import os

import numpy as np
import pytest

from wosbench import dataio
from wosbench.field import Field
from wosbench.manufactured import GenConfig, case_stream, sample_instance

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "golden.npz")


def make_fields(seed=0, res=256):
    rng = np.random.default_rng(seed)
    mask = (rng.uniform(size=(res, res)) > 0.25).astype(np.float32)
    noisy = Field((rng.normal(size=(res, res)) * mask).astype(np.float32), mask)
    clean = Field((rng.normal(size=(res, res)) * mask).astype(np.float32), mask)
    return noisy, clean, Field(mask, mask)


def test_bundle_roundtrip_bit_exact(tmp_path):
    noisy, clean, mask = make_fields()
    path = str(tmp_path / "b.npz")
    dataio.write_bundle(path, noisy, clean, mask)
    back = dataio.read_bundle(path)
    assert np.array_equal(back["noisy"].values, noisy.values)
    assert np.array_equal(back["clean"].values, clean.values)
    assert np.array_equal(back["mask"].values, mask.values)


def test_bundle_readable_by_numpy(tmp_path):
    noisy, clean, mask = make_fields(1)
    path = str(tmp_path / "b.npz")
    dataio.write_bundle(path, noisy, clean, mask)
    with np.load(path) as z:
        assert set(z.files) == {"noisy", "clean", "mask"}
        assert z["noisy"].dtype == np.float32
        assert z["noisy"].shape == (256, 256)
        assert np.array_equal(z["clean"], clean.values)


def test_bundle_data_segment_size(tmp_path):
    import zipfile

    noisy, clean, mask = make_fields(2)
    path = str(tmp_path / "b.npz")
    dataio.write_bundle(path, noisy, clean, mask)
    with zipfile.ZipFile(path) as zf:
        for info in zf.infolist():
            data = zf.read(info.filename)
            assert data[:6] == b"\x93NUMPY"
            assert data[6:8] == bytes([1, 0])
            # header padded to a 64-byte boundary, then 256*256*4 bytes
            assert len(data) % 64 == 0
            assert len(data) - (10 + int.from_bytes(data[8:10], "little")) == 262144


def test_mask_entry_binary(tmp_path):
    noisy, clean, mask = make_fields(3)
    path = str(tmp_path / "b.npz")
    dataio.write_bundle(path, noisy, clean, mask)
    vals = np.unique(dataio.read_arrays(path)["mask"])
    assert set(vals.tolist()) <= {0.0, 1.0}


def test_bundle_bytes_deterministic(tmp_path):
    noisy, clean, mask = make_fields(4)
    p1, p2 = str(tmp_path / "a.npz"), str(tmp_path / "b.npz")
    dataio.write_bundle(p1, noisy, clean, mask)
    dataio.write_bundle(p2, noisy, clean, mask)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_golden_fixture_stable():
    """A committed bundle keeps decoding identically (format freeze)."""
    with np.load(FIXTURE) as z:
        assert set(z.files) == {"noisy", "clean", "mask"}
        assert z["noisy"].shape == (8, 8)
        assert float(z["noisy"].sum()) == pytest.approx(13.25)
        assert float(z["clean"][0, 0]) == 1.5
    digest = hashlib.sha256(open(FIXTURE, "rb").read()).hexdigest()
    noisy = np.zeros((8, 8), dtype=np.float32)
    noisy[0, 0] = 13.25
    clean = np.zeros((8, 8), dtype=np.float32)
    clean[0, 0] = 1.5
    mask = np.ones((8, 8), dtype=np.float32)
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "g.npz")
        dataio.write_arrays(path, noisy=noisy, clean=clean, mask=mask)
        assert hashlib.sha256(open(path, "rb").read()).hexdigest() == digest


def test_case_record_roundtrip_probes():
    insts = [sample_instance(GenConfig.test(), case_stream(5, i), i)[0] for i in range(8)]
    for inst in insts:
        back = dataio.record_to_instance(json.loads(dataio.record_line(inst)))
        assert back.case_id == inst.case_id
        assert back.family == inst.family
        assert back.domain == inst.domain
        rng = np.random.default_rng(0)
        probes = rng.uniform(-1.2, 1.2, (64, 2))
        from wosbench.atoms import solution_value

        v1 = solution_value(inst.solution, probes[:, 0], probes[:, 1])
        v2 = solution_value(back.solution, probes[:, 0], probes[:, 1])
        assert np.allclose(v1, v2, rtol=1e-12, atol=1e-12)


def test_laplace_record_has_zero_parameters():
    cfg = GenConfig(families={"laplace": 1.0})
    inst, _, _ = sample_instance(cfg, case_stream(6, 0), 0)
    rec = dataio.instance_to_record(inst)
    assert rec["lambda"] == 0.0 and rec["k"] == 0.0
    assert rec["n_terms"] == inst.solution.n_terms


def test_thousand_line_file_streams(tmp_path):
    inst, _, _ = sample_instance(GenConfig.train(), case_stream(7, 0), 0)
    path = str(tmp_path / "cases.jsonl")
    dataio.write_case_records(path, [inst] * 1000)
    count = sum(1 for _ in dataio.read_case_records(path))
    assert count == 1000


def test_parse_error_carries_line_number(tmp_path):
    path = str(tmp_path / "bad.jsonl")
    inst, _, _ = sample_instance(GenConfig.train(), case_stream(8, 0), 0)
    with open(path, "w") as fp:
        fp.write(dataio.record_line(inst))
        fp.write("this is not json\n")
    with pytest.raises(dataio.ParseError) as exc:
        list(dataio.read_case_records(path))
    assert exc.value.line == 2


def test_record_bytes_deterministic():
    inst, _, _ = sample_instance(GenConfig.train(), case_stream(9, 0), 0)
    assert dataio.record_line(inst) == dataio.record_line(inst)


def test_trajectory_layout(tmp_path):
    noisy, clean, mask = make_fields(5, res=16)
    root = str(tmp_path)
    dataio.write_trajectory(root, "case-x", [1, 2], [noisy, noisy], clean, mask, {"seed": 0})
    assert os.path.exists(dataio.budget_path(root, "case-x", 1))
    assert os.path.exists(dataio.budget_path(root, "case-x", 2))
    assert os.path.exists(dataio.traj_meta_path(root, "case-x"))
