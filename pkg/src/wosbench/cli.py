"""Operator CLI: generate / solve / verify / denoise / eval / pack / bench.

Every subcommand is deterministic given its flags and seed.  Flag
precedence: command line > --config JSON file > built-in defaults.
Exit codes: 0 success, 2 validation failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing as mp
import os
import sys
import time

import numpy as np

from . import dataio, denoise as denoise_mod, metrics as metrics_mod
from .field import Field
from .manufactured import (
    FAMILIES,
    GenConfig,
    GenerationExhausted,
    ground_truth_grid,
    forcing_grid,
    case_stream,
    sample_instance,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

DEFAULT_BUDGETS = "1,2,4,8,16,32"


def _parse_budgets(text: str) -> list[int]:
    try:
        budgets = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise SystemExit(EXIT_VALIDATION)
    if not budgets or budgets != sorted(set(budgets)) or budgets[0] < 1:
        print("budgets must be ascending positive integers", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return budgets


# -- generate ----------------------------------------------------------------


def _gen_worker(task):
    seed, index, cfg_kwargs, families, out_dir, gt_resolution = task
    cfg = GenConfig(families=families, **cfg_kwargs)
    try:
        inst, result, rejections = sample_instance(cfg, case_stream(seed, index), index)
    except GenerationExhausted as e:
        return index, None, {e.last_reason: cfg.max_retries}, None
    fgrid = forcing_grid(inst, gt_resolution)
    if gt_resolution == cfg.gt_resolution and result.gt_clean is not None:
        clean, mask = result.gt_clean, result.gt_mask
    else:
        clean, mask = ground_truth_grid(inst, gt_resolution)
    os.makedirs(os.path.join(out_dir, dataio.GT_DIR), exist_ok=True)
    dataio.write_arrays(
        dataio.gt_path(out_dir, inst.case_id),
        clean=clean.values,
        mask=mask.values,
        forcing=fgrid.values,
    )
    return index, dataio.record_line(inst), rejections, inst.case_id


def cmd_generate(args) -> int:
    families = dict(zip(FAMILIES, [1.0] * 5)) if args.families == "test" else None
    if args.families == "train":
        families = {"laplace": 1.0, "poisson": 1.0, "yukawa": 1.0}
    elif args.families != "test":
        names = args.families.split(",")
        if any(n not in FAMILIES for n in names):
            print(f"unknown family in {args.families}", file=sys.stderr)
            return EXIT_VALIDATION
        families = {n: 1.0 for n in names}
    cfg_kwargs = {"hard_extra": args.hard_extra}
    os.makedirs(args.out, exist_ok=True)
    tasks = [
        (args.seed, i, cfg_kwargs, families, args.out, args.resolution)
        for i in range(args.n)
    ]
    if args.threads > 1:
        with mp.Pool(args.threads) as pool:
            results = pool.map(_gen_worker, tasks)
    else:
        results = [_gen_worker(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    tallies: dict[str, int] = {}
    lines = []
    failed = 0
    for _, line, rejections, _cid in results:
        for k, v in rejections.items():
            tallies[k] = tallies.get(k, 0) + v
        if line is None:
            failed += 1
        else:
            lines.append(line)
    cases_path = os.path.join(args.out, dataio.CASES_FILE)
    try:
        with open(cases_path, "w", encoding="utf-8", newline="\n") as fp:
            fp.writelines(lines)
    except OSError as e:
        print(f"cannot write {cases_path}: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"accepted {len(lines)}/{args.n} cases -> {cases_path}")
    print("rejections by filter:", json.dumps(tallies, sort_keys=True))
    if failed > 0.5 * args.n:
        print(f"{failed}/{args.n} cases exhausted retries", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- solve --------------------------------------------------------------------


def _solve_worker(task):
    (record, out_dir, budgets, eps, max_steps, resolution, seed) = task
    from . import wos

    inst = dataio.record_to_instance(record)
    done = all(
        os.path.exists(dataio.budget_path(out_dir, inst.case_id, b)) for b in budgets
    ) and os.path.exists(dataio.traj_meta_path(out_dir, inst.case_id))
    if done:
        return inst.case_id, None, True
    params = wos.WosParams(epsilon=eps, max_steps=max_steps, resolution=resolution)
    traj = wos.solve_grid(inst, budgets, params, seed)
    clean, mask = ground_truth_grid(inst, resolution)
    meta = {
        "case_id": inst.case_id,
        "family": inst.family,
        "budgets": list(budgets),
        "seed": seed,
        "epsilon": eps,
        "max_steps": max_steps,
        "resolution": resolution,
        "overflow_rate": traj.overflow_rate,
        "backend": wos.BACKEND,
    }
    dataio.write_trajectory(out_dir, inst.case_id, budgets, traj.fields, clean, mask, meta)
    return inst.case_id, traj.overflow_rate, False


def cmd_solve(args) -> int:
    budgets = _parse_budgets(args.budgets)
    cases_path = os.path.join(args.dataset, dataio.CASES_FILE)
    if not os.path.exists(cases_path):
        print(f"no case file at {cases_path}", file=sys.stderr)
        return EXIT_IO
    out_dir = args.out or args.dataset
    records = [dataio.instance_to_record(i) for i in dataio.read_case_records(cases_path)]
    walkable = [r for r in records if r["kind"] in ("laplace", "poisson", "yukawa")]
    skipped_families = len(records) - len(walkable)
    tasks = [
        (r, out_dir, budgets, args.epsilon, args.max_steps, args.resolution, args.seed)
        for r in walkable
    ]
    t0 = time.time()
    if args.threads > 1:
        with mp.Pool(args.threads) as pool:
            results = pool.map(_solve_worker, tasks)
    else:
        results = [_solve_worker(t) for t in tasks]
    resumed = sum(1 for _, _, skipped in results if skipped)
    print(
        f"solved {len(results) - resumed} cases ({resumed} already complete, "
        f"{skipped_families} non-walkable families skipped) in {time.time()-t0:.1f}s"
    )
    return EXIT_OK


# -- verify ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    cases_path = os.path.join(args.dataset, dataio.CASES_FILE)
    if not os.path.exists(cases_path):
        print(f"no case file at {cases_path}", file=sys.stderr)
        return EXIT_IO
    per_case = []
    curves: dict[str, list] = {}
    for inst in dataio.read_case_records(cases_path):
        meta_path = dataio.traj_meta_path(args.dataset, inst.case_id)
        if not os.path.exists(meta_path):
            continue
        with open(meta_path, "r", encoding="utf-8") as fp:
            meta = json.load(fp)
        budgets = meta["budgets"]
        mses = []
        for b in budgets:
            bundle = dataio.read_bundle(dataio.budget_path(args.dataset, inst.case_id, b))
            rep = metrics_mod.masked_metrics(bundle["noisy"], bundle["clean"], bundle["mask"])
            mses.append((b, rep.mse))
        try:
            slope = metrics_mod.convergence_slope(mses)
        except metrics_mod.DegenerateFit:
            continue
        per_case.append({"case_id": inst.case_id, "family": inst.family, "slope": slope})
        curves.setdefault(inst.family, []).append(mses)
    if not per_case:
        print("no trajectories found to verify", file=sys.stderr)
        return EXIT_VALIDATION
    report = {"n_cases": len(per_case), "families": {}}
    lo, hi = -1.05, -0.95
    for family in sorted({c["family"] for c in per_case}):
        sl = np.array([c["slope"] for c in per_case if c["family"] == family])
        report["families"][family] = {
            "n": int(sl.size),
            "median_slope": float(np.median(sl)),
            "min_slope": float(np.min(sl)),
            "max_slope": float(np.max(sl)),
            "pct_in_band": float(np.mean((sl >= lo) & (sl <= hi)) * 100.0),
        }
    all_sl = np.array([c["slope"] for c in per_case])
    report["overall"] = {
        "median_slope": float(np.median(all_sl)),
        "pct_in_band": float(np.mean((all_sl >= lo) & (all_sl <= hi)) * 100.0),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            json.dump({"report": report, "cases": per_case}, fp, indent=2, sort_keys=True)
    if args.csv:
        metrics_mod.reports_to_csv(per_case, args.csv)
    if args.svg:
        med_curves = {}
        for family, case_curves in curves.items():
            budgets = [b for b, _ in case_curves[0]]
            med = [
                float(np.median([dict(c)[b] for c in case_curves if b in dict(c)]))
                for b in budgets
            ]
            med_curves[family] = list(zip(budgets, med))
        metrics_mod.mse_budget_curves_svg(med_curves, args.svg,
                                          title="median masked MSE vs budget")
    if report["overall"]["pct_in_band"] < args.min_inband:
        print(
            f"in-band fraction {report['overall']['pct_in_band']:.1f}% "
            f"< threshold {args.min_inband}%",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    return EXIT_OK


# -- denoise ----------------------------------------------------------------------


def cmd_denoise(args) -> int:
    try:
        bundle = dataio.read_bundle(args.infile)
    except (dataio.IoError, dataio.ParseError) as e:
        print(f"cannot read {args.infile}: {e}", file=sys.stderr)
        return EXIT_IO
    params = {}
    for kv in args.param or []:
        k, _, v = kv.partition("=")
        params[k] = float(v)
    try:
        out = denoise_mod.denoise(
            bundle["noisy"], bundle["mask"], args.method, params or None,
            masked=not args.unmasked,
        )
    except denoise_mod.UnknownMethod as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    dataio.write_bundle(args.outfile, out, bundle["clean"], bundle["mask"])
    rep_in = metrics_mod.masked_metrics(bundle["noisy"], bundle["clean"], bundle["mask"])
    rep_out = metrics_mod.masked_metrics(out, bundle["clean"], bundle["mask"])
    print(
        f"{args.method}: psnr {rep_in.psnr_db:.2f} -> {rep_out.psnr_db:.2f} dB "
        f"(mse {rep_in.mse:.3g} -> {rep_out.mse:.3g})"
    )
    return EXIT_OK


# -- eval -------------------------------------------------------------------------


def cmd_eval(args) -> int:
    cases_path = os.path.join(args.dataset, dataio.CASES_FILE)
    if not os.path.exists(cases_path):
        print(f"no case file at {cases_path}", file=sys.stderr)
        return EXIT_IO
    os.makedirs(args.out, exist_ok=True)
    rows = []
    gaps = []
    by_family: dict[str, list] = {}
    for inst in dataio.read_case_records(cases_path):
        pred_path = os.path.join(args.pred, f"{inst.case_id}.npz")
        gt = dataio.gt_path(args.dataset, inst.case_id)
        if not os.path.exists(gt):
            gaps.append({"case_id": inst.case_id, "missing": "ground_truth"})
            continue
        gt_arrays = dataio.read_arrays(gt)
        if not os.path.exists(pred_path):
            gaps.append({"case_id": inst.case_id, "missing": "prediction"})
            continue
        pred_arrays = dataio.read_arrays(pred_path)
        pred = pred_arrays.get("pred", pred_arrays.get("noisy"))
        if pred is None:
            gaps.append({"case_id": inst.case_id, "missing": "pred entry"})
            continue
        rep = metrics_mod.masked_metrics(pred, gt_arrays["clean"], gt_arrays["mask"])
        row = {"case_id": inst.case_id, "family": inst.family, **rep.to_dict()}
        rows.append(row)
        by_family.setdefault(inst.family, []).append(rep)
    summary = {}
    for family, reps in sorted(by_family.items()):
        psnr = np.array([r.psnr_db for r in reps])
        snr = np.array([r.snr_db for r in reps])
        mse = np.array([r.mse for r in reps])
        summary[family] = {
            "n": len(reps),
            "psnr_db_mean": float(psnr.mean()),
            "psnr_db_std": float(psnr.std()),
            "snr_db_mean": float(snr.mean()),
            "snr_db_std": float(snr.std()),
            "mse_mean": float(mse.mean()),
            "mse_std": float(mse.std()),
        }
    metrics_mod.reports_to_csv(rows, os.path.join(args.out, "metrics.csv"))
    with open(os.path.join(args.out, "metrics.jsonl"), "w", encoding="utf-8") as fp:
        for row in rows:
            fp.write(json.dumps(row, sort_keys=True) + "\n")
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fp:
        json.dump(summary, fp, indent=2, sort_keys=True)
    with open(os.path.join(args.out, "gaps.json"), "w", encoding="utf-8") as fp:
        json.dump(gaps, fp, indent=2, sort_keys=True)
    if rows:
        curves = {
            fam: [(i + 1, max(rep["mse"], 1e-300)) for i, rep in enumerate(r for r in rows if r["family"] == fam)]
            for fam in by_family
        }
        metrics_mod.mse_budget_curves_svg(
            curves, os.path.join(args.out, "per_case_mse.svg"), title="per-case MSE by family"
        )
    print(json.dumps(summary, indent=2, sort_keys=True))
    print(f"{len(rows)} cases evaluated, {len(gaps)} gaps -> {args.out}")
    return EXIT_OK


# -- pack / unpack -------------------------------------------------------------------


def cmd_pack(args) -> int:
    try:
        arrays = {}
        for spec in args.entry:
            name, _, path = spec.partition("=")
            if not path:
                print(f"entry must be name=path.npy, got {spec!r}", file=sys.stderr)
                return EXIT_VALIDATION
            arrays[name] = np.load(path)
        dataio.write_arrays(args.out, **arrays)
    except OSError as e:
        print(str(e), file=sys.stderr)
        return EXIT_IO
    print(f"packed {sorted(arrays)} -> {args.out}")
    return EXIT_OK


def cmd_unpack(args) -> int:
    try:
        arrays = dataio.read_arrays(args.infile)
        os.makedirs(args.out_dir, exist_ok=True)
        for name, arr in arrays.items():
            np.save(os.path.join(args.out_dir, f"{name}.npy"), arr)
    except (OSError, dataio.ParseError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_IO
    print(f"unpacked {sorted(arrays)} -> {args.out_dir}")
    return EXIT_OK


# -- bench -----------------------------------------------------------------------------


def cmd_bench(args) -> int:
    from . import wos
    from .wos import _pykernel, encode
    from . import geometry

    inst, _, _ = sample_instance(GenConfig.train(), case_stream(args.seed, 0), 0)
    enc = encode.encode_instance(inst)
    mask = (geometry.grid_mask(inst.domain, args.resolution) > 0).astype(np.uint8)
    budgets = np.asarray(_parse_budgets(args.budgets), dtype=np.int64)
    kern_args = (
        enc["domain_ints"], enc["domain_dbl"], enc["atom_kinds"], enc["atom_variants"],
        enc["atom_params"], enc["family"], enc["lam"], mask, budgets,
        wos.base_key(args.seed, inst.case_id), 1e-4, 256, args.resolution,
    )
    t0 = time.time()
    out_py, _, total = _pykernel.solve_grid_kernel(*kern_args)
    t_py = time.time() - t0
    have_compiled = wos.BACKEND == "compiled"
    if have_compiled:
        from . import wos as _w
        t0 = time.time()
        out_c, _, _ = _w._backend.solve_grid_kernel(*kern_args)
        t_c = time.time() - t0
        identical = bool(np.array_equal(out_py, out_c))
        print(
            f"case {inst.family}/{inst.domain.kind}: {total} walks\n"
            f"python   {t_py:8.3f}s  ({total/t_py:,.0f} walks/s)\n"
            f"compiled {t_c:8.3f}s  ({total/t_c:,.0f} walks/s)\n"
            f"speedup  {t_py/t_c:8.1f}x   bit-identical: {identical}"
        )
        return EXIT_OK if identical else EXIT_VALIDATION
    print(f"python backend only: {t_py:.3f}s for {total} walks ({total/t_py:,.0f}/s)")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wosbench",
        description="Procedural elliptic-PDE benchmark: generate instances with "
        "analytic ground truth, solve them with Walk-on-Spheres at chosen "
        "budgets, and evaluate estimators and denoisers.",
    )
    parser.add_argument("--config", help="JSON file with per-subcommand default flags")
    sub = parser.add_subparsers(dest="command", required=True)

    out_env = os.environ.get("WOSBENCH_OUT")

    g = sub.add_parser("generate", help="sample instances and write JSONL + ground truth")
    g.add_argument("--n", type=int, default=100, help="number of cases")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--families", default="train",
                   help="'train', 'test', or comma list of families")
    g.add_argument("--hard-extra", dest="hard_extra", type=int, default=4,
                   help="extra pool copies per hard atom kind")
    g.add_argument("--out", default=out_env, required=out_env is None,
                   help="output root (defaults to $WOSBENCH_OUT)")
    g.add_argument("--resolution", type=int, default=256, help="ground-truth grid size")
    g.add_argument("--threads", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run the WoS estimator over a dataset")
    s.add_argument("--dataset", required=True)
    s.add_argument("--out", default=None, help="output root (default: dataset dir)")
    s.add_argument("--budgets", default=DEFAULT_BUDGETS)
    s.add_argument("--epsilon", type=float, default=1e-4)
    s.add_argument("--max-steps", dest="max_steps", type=int, default=128)
    s.add_argument("--resolution", type=int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="fit convergence slopes over solved trajectories")
    v.add_argument("--dataset", required=True)
    v.add_argument("--out", default=None, help="write full JSON report here")
    v.add_argument("--csv", default=None, help="write per-case slopes as CSV")
    v.add_argument("--svg", default=None, help="write median MSE-vs-budget curves as SVG")
    v.add_argument("--min-inband", dest="min_inband", type=float, default=0.0,
                   help="fail (exit 2) if %% of slopes in [-1.05,-0.95] is below this")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("denoise", help="apply a classical denoiser to a bundle")
    d.add_argument("--method", required=True, choices=denoise_mod.METHODS)
    d.add_argument("--in", dest="infile", required=True)
    d.add_argument("--out", dest="outfile", required=True)
    d.add_argument("--unmasked", action="store_true",
                   help="ignore the mask inside the filter (comparison mode)")
    d.add_argument("--param", action="append", help="override k=v, e.g. sigma=1.5")
    d.set_defaults(func=cmd_denoise)

    e = sub.add_parser("eval", help="score predictions against ground truth")
    e.add_argument("--pred", required=True, help="directory of <case_id>.npz predictions")
    e.add_argument("--dataset", required=True)
    e.add_argument("--out", default=out_env, required=out_env is None,
                   help="report directory (defaults to $WOSBENCH_OUT)")
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("pack", help="pack named .npy arrays into a bundle")
    p.add_argument("entry", nargs="+", help="name=path.npy")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pack)

    u = sub.add_parser("unpack", help="extract bundle entries to .npy files")
    u.add_argument("--in", dest="infile", required=True)
    u.add_argument("--out-dir", dest="out_dir", required=True)
    u.set_defaults(func=cmd_unpack)

    b = sub.add_parser("bench", help="compare compiled and python kernels")
    b.add_argument("--resolution", type=int, default=32)
    b.add_argument("--budgets", default="1,2,4,8")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # apply --config file defaults before the real parse
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config, "r", encoding="utf-8") as fp:
                config = json.load(fp)
        except OSError as e:
            print(f"cannot read config {known.config}: {e}", file=sys.stderr)
            return EXIT_IO
        sub_action = parser._subparsers._group_actions[0]
        cmd = next((a for a in argv if a in sub_action.choices), None)
        section = config.get(cmd, {}) if isinstance(config, dict) else {}
        if cmd is not None and section:
            sub_action.choices[cmd].set_defaults(**section)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except dataio.IoError as e:
        print(str(e), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
