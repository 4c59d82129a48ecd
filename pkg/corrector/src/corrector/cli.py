"""Corrector CLI: train on solved datasets, correct bundles, report metrics."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import torch

from .data import TRAIN_BUDGETS, load_bundle, read_cases, solved_cases
from .infer import correct, empirical_variance_ratio
from .train import TrainConfig, evaluate, load_model, train


def cmd_train(args) -> int:
    torch.set_num_threads(args.threads)
    budgets = tuple(int(b) for b in args.budgets.split(","))
    families = tuple(args.families.split(",")) if args.families else None
    refs = solved_cases(args.dataset, budgets, families)
    if args.limit:
        refs = refs[: args.limit]
    n_val = min(args.val_cases, max(len(refs) // 10, 1))
    val_refs, train_refs = refs[:n_val], refs[n_val:]
    config = TrainConfig(
        budgets=budgets,
        include_forcing=not args.no_forcing,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        base_channels=args.base_channels,
        budget_mode=args.budget_mode,
    )
    log = train(train_refs, val_refs, config, args.out)
    print(json.dumps({"best_val_psnr_db": log["best_val_psnr_db"],
                      "model_parameters": log["model_parameters"],
                      "n_train": len(train_refs), "n_val": len(val_refs)}))
    return 0


def cmd_eval(args) -> int:
    torch.set_num_threads(args.threads)
    model = load_model(args.model)
    families = tuple(args.families.split(",")) if args.families else None
    refs = solved_cases(args.dataset, [args.budget], families)
    if args.limit:
        refs = refs[: args.limit]
    out = evaluate(model, refs, args.budget, include_forcing=not args.no_forcing)
    print(json.dumps(out, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            json.dump(out, fp, indent=2, sort_keys=True)
    return 0


def cmd_correct(args) -> int:
    model = load_model(args.model)
    bundle = load_bundle(args.infile)
    gt = load_bundle(args.gt) if args.gt else {}
    forcing = gt.get("forcing", np.zeros_like(bundle["noisy"]))
    corrected = correct(model, bundle["noisy"], forcing, bundle["mask"])
    np.savez(args.outfile, pred=corrected, mask=bundle["mask"])
    print(f"corrected field -> {args.outfile}")
    return 0


def cmd_variance(args) -> int:
    model = load_model(args.model)
    fields = []
    mask = None
    for path in args.bundles:
        b = load_bundle(path)
        fields.append(b["noisy"])
        mask = b["mask"]
    gt = load_bundle(args.gt)
    out = empirical_variance_ratio(model, fields, gt["forcing"], mask)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="wos-corrector")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train")
    t.add_argument("--dataset", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--budgets", default=",".join(str(b) for b in TRAIN_BUDGETS))
    t.add_argument("--families", default=None, help="comma list; default all present")
    t.add_argument("--epochs", type=int, default=16)
    t.add_argument("--batch-size", dest="batch_size", type=int, default=16)
    t.add_argument("--lr", type=float, default=2e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--no-forcing", dest="no_forcing", action="store_true")
    t.add_argument("--base-channels", dest="base_channels", type=int, default=24)
    t.add_argument("--val-cases", dest="val_cases", type=int, default=200)
    t.add_argument("--budget-mode", dest="budget_mode", default="cycle",
                   choices=("all", "cycle", "fixed"),
                   help="'all' visits every (case,budget) pair per epoch")
    t.add_argument("--limit", type=int, default=0)
    t.add_argument("--threads", type=int, default=2)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--budget", type=int, default=8)
    e.add_argument("--families", default=None)
    e.add_argument("--limit", type=int, default=0)
    e.add_argument("--out", default=None)
    e.add_argument("--no-forcing", dest="no_forcing", action="store_true")
    e.add_argument("--threads", type=int, default=2)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("correct")
    c.add_argument("--model", required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--gt", default=None, help="gt bundle providing the forcing channel")
    c.add_argument("--out", dest="outfile", required=True)
    c.set_defaults(func=cmd_correct)

    v = sub.add_parser("variance")
    v.add_argument("--model", required=True)
    v.add_argument("--gt", required=True)
    v.add_argument("bundles", nargs="+")
    v.set_defaults(func=cmd_variance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
