"""Training loop: masked squared error against analytic ground truth.

The loss is accumulated in float32 throughout (CPU default precision);
the checkpoint with the best validation PSNR at the inference budget is
kept.  Runs are deterministic given the config seed.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import TRAIN_BUDGETS, BundleDataset, CaseRef, DataTooSmall, load_bundle, make_example
from .model import ResidualUNet

MIN_TRAIN_BUNDLES = 500


@dataclass
class TrainConfig:
    budgets: tuple[int, ...] = TRAIN_BUDGETS
    include_forcing: bool = True
    epochs: int = 16
    batch_size: int = 16
    lr: float = 2e-3
    seed: int = 0
    base_channels: int = 24
    eval_budget: int = 8
    num_workers: int = 0
    # "all": every (case, budget) pair per epoch (joint protocol);
    # "cycle": one rotating budget per case per epoch (cheap pass)
    budget_mode: str = "all"

    def to_dict(self):
        d = asdict(self)
        d["budgets"] = list(self.budgets)
        return d


def masked_mse(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor,
               weights: torch.Tensor | None = None) -> torch.Tensor:
    """Masked squared error; optional per-sample weights (batch,)."""
    diff2 = (pred - target) ** 2 * mask
    per_sample = diff2.sum(dim=(1, 2, 3)) / mask.sum(dim=(1, 2, 3)).clamp_min(1.0)
    if weights is None:
        return per_sample.mean()
    return (per_sample * weights).sum() / weights.sum().clamp_min(1e-12)


def psnr_db(pred: np.ndarray, clean: np.ndarray, mask: np.ndarray, cap=300.0) -> float:
    sel = mask > 0
    if not np.any(sel):
        return cap
    diff = pred[sel].astype(np.float64) - clean[sel].astype(np.float64)
    mse = float(np.mean(diff * diff))
    peak = float(clean[sel].max() - clean[sel].min()) or 1.0
    if mse == 0.0:
        return cap
    return min(10.0 * math.log10(peak * peak / mse), cap)


def evaluate(model: ResidualUNet, refs: list[CaseRef], budget: int,
             include_forcing: bool = True) -> dict:
    """Mean raw and corrected PSNR over the given cases at one budget."""
    model.eval()
    raws, cors = [], []
    with torch.no_grad():
        for ref in refs:
            bundle = load_bundle(ref.bundle_path(budget))
            gt = load_bundle(ref.gt_path())
            x, _, (center, scale) = make_example(
                bundle["noisy"], gt["forcing"], bundle["mask"], None, include_forcing
            )
            out = model(x[None])[0, 0].numpy()
            corrected = (out * scale + center) * bundle["mask"]
            raws.append(psnr_db(bundle["noisy"], bundle["clean"], bundle["mask"]))
            cors.append(psnr_db(corrected, bundle["clean"], bundle["mask"]))
    return {
        "n": len(refs),
        "raw_psnr_db": float(np.mean(raws)),
        "corrected_psnr_db": float(np.mean(cors)),
        "gain_db": float(np.mean(cors) - np.mean(raws)),
    }


def train(train_refs: list[CaseRef], val_refs: list[CaseRef], config: TrainConfig,
          out_dir: str) -> dict:
    """Returns the training log; writes model.pt and log.json to out_dir."""
    n_bundles = len(train_refs) * len(config.budgets)
    if n_bundles < MIN_TRAIN_BUNDLES:
        raise DataTooSmall(
            f"{n_bundles} training bundles < required {MIN_TRAIN_BUNDLES}"
        )
    os.makedirs(out_dir, exist_ok=True)
    torch.manual_seed(config.seed)
    np.random.seed(config.seed)

    model = ResidualUNet(base=config.base_channels)
    opt = torch.optim.AdamW(model.parameters(), lr=config.lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(
        opt, T_max=config.epochs, eta_min=config.lr * 0.05
    )
    dataset = BundleDataset(
        train_refs, config.budgets, config.include_forcing, config.budget_mode
    )
    gen = torch.Generator().manual_seed(config.seed)

    log = {"config": config.to_dict(), "epochs": [], "model_parameters": model.n_parameters()}
    best_psnr = -np.inf
    best_path = os.path.join(out_dir, "model.pt")
    for epoch in range(config.epochs):
        t0 = time.time()
        dataset.set_epoch(epoch)
        loader = DataLoader(
            dataset, batch_size=config.batch_size, shuffle=True, generator=gen,
            num_workers=config.num_workers,
        )
        model.train()
        tot, nb = 0.0, 0
        for x, y, w in loader:
            opt.zero_grad()
            out = model(x)
            loss = masked_mse(out, y, x[:, 2:3], w)
            loss.backward()
            opt.step()
            tot += float(loss.detach())
            nb += 1
        sched.step()
        val = evaluate(model, val_refs, config.eval_budget, config.include_forcing)
        entry = {
            "epoch": epoch,
            "train_loss": tot / max(nb, 1),
            "val_psnr_db": val["corrected_psnr_db"],
            "val_raw_psnr_db": val["raw_psnr_db"],
            "seconds": time.time() - t0,
        }
        log["epochs"].append(entry)
        if val["corrected_psnr_db"] > best_psnr:
            best_psnr = val["corrected_psnr_db"]
            torch.save(
                {"state_dict": model.state_dict(), "config": config.to_dict()}, best_path
            )
        print(
            f"epoch {epoch:3d}: loss {entry['train_loss']:.5f} "
            f"val psnr {entry['val_psnr_db']:.2f} dB (raw {entry['val_raw_psnr_db']:.2f}) "
            f"[{entry['seconds']:.0f}s]",
            flush=True,
        )
    log["best_val_psnr_db"] = float(best_psnr)
    with open(os.path.join(out_dir, "log.json"), "w", encoding="utf-8") as fp:
        json.dump(log, fp, indent=2, sort_keys=True)
    return log


def load_model(path: str) -> ResidualUNet:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    base = payload["config"].get("base_channels", 24)
    model = ResidualUNet(base=base)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
