import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from wosbench import dataio
from wosbench.cli import main
from wosbench.field import Field


def run_cli(*argv):
    return main(list(argv))


def tree_digest(root):
    """Hash of every file's bytes under root, path-keyed."""
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in sorted(files):
            p = os.path.join(dirpath, name)
            rel = os.path.relpath(p, root)
            out[rel] = hashlib.sha256(open(p, "rb").read()).hexdigest()
    return out


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("ds"))
    assert run_cli("generate", "--n", "6", "--seed", "7", "--out", root,
                   "--resolution", "48") == 0
    assert run_cli("solve", "--dataset", root, "--budgets", "1,2,4,8",
                   "--resolution", "32", "--seed", "3", "--max-steps", "256") == 0
    return root


def test_generate_deterministic(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert run_cli("generate", "--n", "5", "--seed", "11", "--out", out,
                       "--resolution", "32") == 0
    assert tree_digest(a) == tree_digest(b)


def test_generate_threads_identical(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert run_cli("generate", "--n", "6", "--seed", "2", "--out", a,
                   "--resolution", "32", "--threads", "1") == 0
    assert run_cli("generate", "--n", "6", "--seed", "2", "--out", b,
                   "--resolution", "32", "--threads", "2") == 0
    assert tree_digest(a) == tree_digest(b)


def test_generate_rejects_unknown_family(tmp_path):
    assert run_cli("generate", "--n", "2", "--out", str(tmp_path / "x"),
                   "--families", "wave") == 2


def test_solve_threads_identical(tmp_path):
    src = str(tmp_path / "src")
    assert run_cli("generate", "--n", "5", "--seed", "4", "--out", src,
                   "--resolution", "32") == 0
    t1, t2 = str(tmp_path / "t1"), str(tmp_path / "t2")
    for out, threads in ((t1, "1"), (t2, "2")):
        assert run_cli("solve", "--dataset", src, "--out", out, "--budgets", "1,2,4",
                       "--resolution", "24", "--seed", "5", "--threads", threads,
                       "--max-steps", "256") == 0
    assert tree_digest(t1) == tree_digest(t2)


def test_solve_resumable(dataset, capsys):
    assert run_cli("solve", "--dataset", dataset, "--budgets", "1,2,4,8",
                   "--resolution", "32", "--seed", "3", "--max-steps", "256") == 0
    out = capsys.readouterr().out
    assert "already complete" in out and "solved 0 cases" in out


def test_verify_report(dataset, capsys, tmp_path):
    svg = str(tmp_path / "curves.svg")
    rep_path = str(tmp_path / "report.json")
    code = run_cli("verify", "--dataset", dataset, "--out", rep_path, "--svg", svg)
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["families"]) <= {"laplace", "poisson", "yukawa"}
    for fam, row in report["families"].items():
        assert {"median_slope", "min_slope", "max_slope", "pct_in_band", "n"} <= set(row)
    assert os.path.exists(svg) and os.path.exists(rep_path)


def test_verify_synthetic_inverse_law(tmp_path, capsys):
    """Injected mse(B) = c/B must fit slope exactly -1."""
    root = str(tmp_path / "syn")
    os.makedirs(root, exist_ok=True)
    from wosbench.manufactured import GenConfig, case_stream, sample_instance

    inst, _, _ = sample_instance(GenConfig(families={"laplace": 1.0}), case_stream(1, 0), 0)
    dataio.write_case_records(os.path.join(root, dataio.CASES_FILE), [inst])
    rng = np.random.default_rng(0)
    mask = np.ones((16, 16), dtype=np.float32)
    clean = Field(rng.normal(size=(16, 16)).astype(np.float32), mask)
    err = rng.normal(size=(16, 16)).astype(np.float32)
    budgets = [1, 2, 4, 8]
    fields = [Field(clean.values + err / np.sqrt(b), mask) for b in budgets]
    dataio.write_trajectory(root, inst.case_id, budgets, fields, clean, Field(mask, mask),
                            {"budgets": budgets, "case_id": inst.case_id})
    assert run_cli("verify", "--dataset", root, "--min-inband", "99") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["overall"]["median_slope"] == pytest.approx(-1.0, abs=1e-5)
    # flat-MSE forgery must fail the threshold with exit code 2
    for b, f in zip(budgets, [fields[0]] * 4):
        dataio.write_bundle(dataio.budget_path(root, inst.case_id, b), f, clean, Field(mask, mask))
    assert run_cli("verify", "--dataset", root, "--min-inband", "99") == 2


def test_denoise_roundtrip(dataset, tmp_path, capsys):
    case = next(dataio.read_case_records(os.path.join(dataset, dataio.CASES_FILE)))
    src = dataio.budget_path(dataset, case.case_id, 8)
    dst = str(tmp_path / "dn.npz")
    assert run_cli("denoise", "--method", "gaussian", "--in", src, "--out", dst) == 0
    assert "psnr" in capsys.readouterr().out
    bundle = dataio.read_bundle(dst)
    assert np.all(bundle["noisy"].values[bundle["mask"].values == 0] == 0.0)


def test_denoise_missing_file(tmp_path):
    assert run_cli("denoise", "--method", "tv", "--in", str(tmp_path / "nope.npz"),
                   "--out", str(tmp_path / "o.npz")) == 3


def test_eval_self_prediction_capped(dataset, tmp_path, capsys):
    pred = str(tmp_path / "pred")
    os.makedirs(pred, exist_ok=True)
    kept = 0
    for inst in dataio.read_case_records(os.path.join(dataset, dataio.CASES_FILE)):
        gt = dataio.gt_path(dataset, inst.case_id)
        arrays = dataio.read_arrays(gt)
        if kept < 4:  # leave some cases without predictions -> gaps report
            dataio.write_arrays(os.path.join(pred, f"{inst.case_id}.npz"),
                                pred=arrays["clean"])
            kept += 1
    out = str(tmp_path / "eval")
    assert run_cli("eval", "--pred", pred, "--dataset", dataset, "--out", out) == 0
    summary = json.load(open(os.path.join(out, "summary.json")))
    for row in summary.values():
        assert row["psnr_db_mean"] == 300.0
    gaps = json.load(open(os.path.join(out, "gaps.json")))
    assert len(gaps) == 2
    assert os.path.exists(os.path.join(out, "metrics.csv"))


def test_output_root_env_var(tmp_path, monkeypatch):
    out = str(tmp_path / "envds")
    monkeypatch.setenv("WOSBENCH_OUT", out)
    # parser defaults are bound at construction, so a fresh parse sees the env
    assert run_cli("generate", "--n", "2", "--seed", "3", "--resolution", "32") == 0
    assert os.path.exists(os.path.join(out, dataio.CASES_FILE))


def test_eval_writes_jsonl_reports(dataset, tmp_path):
    pred = str(tmp_path / "p")
    os.makedirs(pred, exist_ok=True)
    for inst in dataio.read_case_records(os.path.join(dataset, dataio.CASES_FILE)):
        arrays = dataio.read_arrays(dataio.gt_path(dataset, inst.case_id))
        dataio.write_arrays(os.path.join(pred, f"{inst.case_id}.npz"), pred=arrays["clean"])
    out = str(tmp_path / "rep")
    assert run_cli("eval", "--pred", pred, "--dataset", dataset, "--out", out) == 0
    lines = open(os.path.join(out, "metrics.jsonl")).read().strip().splitlines()
    assert len(lines) >= 5
    for line in lines:
        row = json.loads(line)
        assert {"case_id", "family", "mse", "psnr_db"} <= set(row)


def test_pack_unpack_roundtrip(tmp_path):
    a = np.arange(12, dtype=np.float32).reshape(3, 4)
    np.save(tmp_path / "a.npy", a)
    bundle = str(tmp_path / "p.npz")
    assert run_cli("pack", f"data={tmp_path}/a.npy", "--out", bundle) == 0
    outdir = str(tmp_path / "un")
    assert run_cli("unpack", "--in", bundle, "--out-dir", outdir) == 0
    assert np.array_equal(np.load(os.path.join(outdir, "data.npy")), a)


def test_bench_runs(capsys):
    assert run_cli("bench", "--resolution", "12", "--budgets", "1,2") == 0
    out = capsys.readouterr().out
    assert "speedup" in out and "bit-identical: True" in out


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"generate": {"n": 3, "resolution": 32}}))
    out = str(tmp_path / "ds")
    assert run_cli("--config", str(cfg), "generate", "--seed", "1", "--out", out) == 0
    n_cases = sum(1 for _ in dataio.read_case_records(os.path.join(out, dataio.CASES_FILE)))
    assert n_cases == 3  # config value applied
    out2 = str(tmp_path / "ds2")
    # explicit flag beats the config file
    assert run_cli("--config", str(cfg), "generate", "--seed", "1", "--n", "2",
                   "--out", out2) == 0
    assert sum(1 for _ in dataio.read_case_records(os.path.join(out2, dataio.CASES_FILE))) == 2


def test_help_for_every_subcommand():
    for cmd in ("generate", "solve", "verify", "denoise", "eval", "pack", "unpack", "bench"):
        proc = subprocess.run(
            [sys.executable, "-m", "wosbench.cli", cmd, "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "--help" in proc.stdout or "usage" in proc.stdout


def test_cli_entry_point_installed():
    proc = subprocess.run(["wosbench", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
