"""Masked error metrics, convergence-slope fits, and difficulty tiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import EmptyMask, Field, ShapeMismatch

PSNR_CAP_DB = 300.0

TIER_NAMES = ("easy", "medium", "hard", "very_hard")
# MSE at the reference budget B=32: [0, 1e-2), [1e-2, 1), [1, 1e2), [1e2, inf)
TIER_EDGES = (1e-2, 1.0, 1e2)


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class MetricReport:
    mse: float
    psnr_db: float
    snr_db: float
    n_pixels: int

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "psnr_db": self.psnr_db,
            "snr_db": self.snr_db,
            "n_pixels": self.n_pixels,
        }


@dataclass(frozen=True)
class DifficultyTier:
    tier: str
    mse_at_32: float


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f)


def masked_metrics(pred, clean, mask) -> MetricReport:
    """MSE/PSNR/SNR over masked-in pixels.

    peak is the dynamic range of clean over the mask (1 if constant);
    identical fields report the 300 dB cap.
    """
    p = _values(pred).astype(np.float64)
    c = _values(clean).astype(np.float64)
    m = _values(mask)
    if p.shape != c.shape or p.shape != m.shape:
        raise ShapeMismatch(f"{p.shape}, {c.shape}, {m.shape}")
    sel = m > 0
    n = int(np.sum(sel))
    if n == 0:
        raise EmptyMask("metrics need at least one masked-in pixel")
    diff = p[sel] - c[sel]
    mse = float(np.mean(diff * diff))
    peak = float(np.max(c[sel]) - np.min(c[sel]))
    if peak == 0.0:
        peak = 1.0
    if mse == 0.0:
        return MetricReport(0.0, PSNR_CAP_DB, PSNR_CAP_DB, n)
    psnr = min(10.0 * np.log10(peak * peak / mse), PSNR_CAP_DB)
    sig = float(np.sum(c[sel] * c[sel]))
    err = float(np.sum(diff * diff))
    snr = PSNR_CAP_DB if err == 0.0 or sig == 0.0 else min(10.0 * np.log10(sig / err), PSNR_CAP_DB)
    return MetricReport(mse, float(psnr), float(snr), n)


def convergence_slope(mses) -> float:
    """OLS slope of log2(mse) against log2(budget).

    ``mses`` is a sequence of (budget, mse) pairs, at least three, with
    positive mse values.
    """
    pairs = list(mses)
    if len(pairs) < 3:
        raise DegenerateFit("need at least 3 budget points")
    budgets = np.array([float(b) for b, _ in pairs])
    vals = np.array([float(v) for _, v in pairs])
    if np.any(vals <= 0.0) or np.any(budgets <= 0.0):
        raise DegenerateFit("budgets and mses must be positive")
    lb = np.log2(budgets)
    lv = np.log2(vals)
    lbc = lb - lb.mean()
    return float(np.sum(lbc * (lv - lv.mean())) / np.sum(lbc * lbc))


def difficulty_tier(mse_at_32: float) -> DifficultyTier:
    if mse_at_32 < 0.0:
        raise ValueError("mse must be non-negative")
    for name, edge in zip(TIER_NAMES, TIER_EDGES):
        if mse_at_32 < edge:
            return DifficultyTier(name, mse_at_32)
    return DifficultyTier(TIER_NAMES[-1], mse_at_32)


def tier_distribution(mses) -> dict[str, float]:
    """Fraction of cases per tier, keyed by tier name."""
    counts = {t: 0 for t in TIER_NAMES}
    mses = list(mses)
    for m in mses:
        counts[difficulty_tier(m).tier] += 1
    n = max(len(mses), 1)
    return {t: counts[t] / n for t in TIER_NAMES}


# -- reporting -------------------------------------------------------------


def reports_to_csv(rows: list[dict], path: str):
    """Write dict rows as CSV with a stable header order."""
    if not rows:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write("")
        return
    keys = list(rows[0].keys())
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(",".join(keys) + "\n")
        for row in rows:
            fp.write(",".join(str(row.get(k, "")) for k in keys) + "\n")


def mse_budget_curves_svg(curves: dict[str, list[tuple[float, float]]], path: str,
                          title: str = "masked MSE vs budget"):
    """Log-log polyline chart written as a standalone SVG document."""
    width, height, pad = 640, 440, 56
    pts_all = [p for pts in curves.values() for p in pts]
    if not pts_all:
        raise ValueError("no curves to plot")
    lx = [np.log2(b) for b, _ in pts_all]
    ly = [np.log2(max(v, 1e-300)) for _, v in pts_all]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width//2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<text x="{width//2}" y="{height-12}" text-anchor="middle" font-size="12">log2 budget</text>',
        f'<text x="16" y="{height//2}" font-size="12" transform="rotate(-90 16 {height//2})" text-anchor="middle">log2 MSE</text>',
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
    ]
    for i, (name, pts) in enumerate(sorted(curves.items())):
        color = palette[i % len(palette)]
        coords = " ".join(
            f"{sx(np.log2(b)):.1f},{sy(np.log2(max(v, 1e-300))):.1f}" for b, v in pts
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width-pad+4}" y="{pad + 16*i}" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fp:
        fp.write("\n".join(parts))
