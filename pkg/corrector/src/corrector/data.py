"""File-based dataset over estimate bundles produced by the benchmark CLI.

This package talks to the generator/solver exclusively through its file
formats: ``cases.jsonl`` (one JSON case record per line),
``traj/<case>/B<budget>.npz`` bundles with float32 ``noisy/clean/mask``
entries, and ``gt/<case>.npz`` with ``clean/mask/forcing``.  No benchmark
code is imported.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import torch
from torch.utils.data import Dataset

TRAIN_BUDGETS = (1, 2, 4, 8, 16, 32)


class DataTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class CaseRef:
    case_id: str
    family: str
    root: str

    def bundle_path(self, budget: int) -> str:
        return os.path.join(self.root, "traj", self.case_id, f"B{budget}.npz")

    def gt_path(self) -> str:
        return os.path.join(self.root, "gt", f"{self.case_id}.npz")


def read_cases(root: str, families: tuple[str, ...] | None = None) -> list[CaseRef]:
    path = os.path.join(root, "cases.jsonl")
    out = []
    with open(path, "r", encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if families is not None and rec["kind"] not in families:
                continue
            out.append(CaseRef(rec["case_id"], rec["kind"], root))
    return out


def solved_cases(root: str, budgets, families=None) -> list[CaseRef]:
    """Cases whose trajectory bundles exist for every requested budget."""
    out = []
    for ref in read_cases(root, families):
        if all(os.path.exists(ref.bundle_path(b)) for b in budgets):
            out.append(ref)
    return out


def load_bundle(path: str) -> dict[str, np.ndarray]:
    with np.load(path) as z:
        return {k: z[k].astype(np.float32) for k in z.files}


def robust_stats(values: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    """(median, IQR) over masked-in pixels; IQR falls back to 1."""
    sel = values[mask > 0]
    if sel.size == 0:
        return 0.0, 1.0
    med = float(np.median(sel))
    q75, q25 = np.percentile(sel, [75.0, 25.0])
    iqr = float(q75 - q25)
    return med, iqr if iqr > 1e-12 else 1.0


FORCING_SQUASH = 4.0


def make_example(noisy: np.ndarray, forcing: np.ndarray, mask: np.ndarray,
                 clean: np.ndarray | None, include_forcing: bool = True):
    """Normalized (input, target, inversion) tensors for one field.

    Inputs are normalized by clean-free statistics of the noisy estimate
    (masked median / IQR) so the inverse transform is available at
    inference.  The forcing is divided by the *same* scale - keeping the
    linear relation between the estimate's Laplacian and the source term
    usable - then asinh-squashed, since |f|/|u| spans orders of magnitude.
    """
    center, scale = robust_stats(noisy, mask)
    x0 = (noisy - center) / scale * mask
    if include_forcing:
        x1 = np.arcsinh(forcing / (scale * FORCING_SQUASH)) * mask
    else:
        x1 = np.zeros_like(noisy)
    x = np.stack([x0, x1, mask]).astype(np.float32)
    target = None
    if clean is not None:
        target = ((clean - center) / scale * mask).astype(np.float32)[None]
    return torch.from_numpy(x), (torch.from_numpy(target) if target is not None else None), (center, scale)


class BundleDataset(Dataset):
    """(case, budget) training pairs.

    ``budget_mode='all'`` enumerates every (case, budget) pair per epoch
    (the joint-training protocol); ``'cycle'`` rotates one budget per case
    per epoch (a cheaper pass); ``'fixed'`` always uses ``budgets[0]``.
    """

    def __init__(self, refs: list[CaseRef], budgets, include_forcing=True,
                 budget_mode: str = "all"):
        if not refs:
            raise DataTooSmall("no cases with solved trajectories")
        self.refs = refs
        self.budgets = list(budgets)
        self.include_forcing = include_forcing
        self.budget_mode = budget_mode
        self.epoch = 0

    def set_epoch(self, epoch: int):
        self.epoch = epoch

    def __len__(self):
        if self.budget_mode == "all":
            return len(self.refs) * len(self.budgets)
        return len(self.refs)

    def __getitem__(self, idx: int):
        if self.budget_mode == "all":
            ref = self.refs[idx // len(self.budgets)]
            budget = self.budgets[idx % len(self.budgets)]
        else:
            ref = self.refs[idx]
            if self.budget_mode == "fixed":
                budget = self.budgets[0]
            else:
                budget = self.budgets[(idx + self.epoch) % len(self.budgets)]
        bundle = load_bundle(ref.bundle_path(budget))
        gt = load_bundle(ref.gt_path())
        x, y, _ = make_example(
            bundle["noisy"], gt["forcing"], bundle["mask"], bundle["clean"],
            self.include_forcing,
        )
        # inverse-noise-power weight: every (case, budget) sample contributes
        # O(1) to the loss, so low budgets do not drown out high ones
        mask = x[2]
        err2 = ((x[0] - y[0]) ** 2 * mask).sum() / mask.sum().clamp_min(1.0)
        weight = 1.0 / (float(err2) + 1e-3)
        return x, y, torch.tensor(weight, dtype=torch.float32)
