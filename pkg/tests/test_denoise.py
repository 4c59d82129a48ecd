import numpy as np
import pytest

from wosbench.denoise import METHODS, UnknownMethod, denoise, estimate_noise_std, tv_energy_trace
from wosbench.field import EmptyMask, Field
from wosbench.metrics import masked_metrics


def disk_mask(res=64, radius=0.85):
    yy, xx = np.mgrid[0:res, 0:res]
    cx = (xx + 0.5) / res * 2 - 1
    cy = (yy + 0.5) / res * 2 - 1
    return (cx * cx + cy * cy < radius * radius).astype(np.float32)


def smooth_clean(res=64, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:res, 0:res]
    x = (xx + 0.5) / res * 2 - 1
    y = (yy + 0.5) / res * 2 - 1
    out = np.zeros((res, res))
    for _ in range(3):
        kx, ky = rng.uniform(0.5, 2.5, 2)
        ph = rng.uniform(0, 2 * np.pi)
        out += rng.uniform(0.4, 1.0) * np.sin(kx * np.pi * x + ph) * np.cos(ky * np.pi * y)
    return out


def noisy_pair(res=64, sigma=0.6, seed=0):
    mask = disk_mask(res)
    clean = smooth_clean(res, seed) * mask
    noise = np.random.default_rng(seed + 999).normal(size=clean.shape) * sigma
    noisy = (clean + noise) * mask
    return Field(noisy.astype(np.float32), mask), Field(clean.astype(np.float32), mask), Field(mask, mask)


@pytest.mark.parametrize("method", METHODS)
def test_constant_field_preserved(method):
    mask = disk_mask(48)
    const = Field((3.7 * mask).astype(np.float32), mask)
    out = denoise(const, Field(mask, mask), method)
    sel = mask > 0
    assert np.allclose(out.values[sel], 3.7, atol=1e-5)
    assert np.all(out.values[~sel] == 0.0)


def test_gaussian_kernel_mass_preserved():
    res = 64
    mask = np.ones((res, res), dtype=np.float32)
    delta = np.zeros((res, res), dtype=np.float32)
    delta[32, 32] = 1.0
    out = denoise(Field(delta, mask), Field(mask, mask), "gaussian")
    assert float(out.values.sum()) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("method", METHODS)
def test_mask_invariance(method):
    noisy, clean, mask = noisy_pair(48, seed=2)
    out1 = denoise(noisy, mask, method)
    corrupted = noisy.values.copy()
    corrupted[mask.values == 0] = 1e6  # garbage outside the domain
    out2 = denoise(Field(corrupted, mask.values), mask, method)
    sel = mask.values > 0
    assert np.array_equal(out1.values[sel], out2.values[sel])
    assert np.all(out2.values[~sel] == 0.0)


def test_unmasked_variant_differs_near_boundary():
    noisy, clean, mask = noisy_pair(48, seed=3)
    m = denoise(noisy, mask, "gaussian", masked=True)
    u = denoise(noisy, mask, "gaussian", masked=False)
    assert not np.array_equal(m.values, u.values)


def test_tv_energy_descent():
    noisy, clean, mask = noisy_pair(64, sigma=0.8, seed=4)
    energies = tv_energy_trace(noisy, mask)
    assert len(energies) >= 3
    e = np.array(energies)
    slack = 1e-9 * (1.0 + abs(e[0]))
    assert np.all(np.diff(e) <= slack)


def test_denoisers_improve_noisy_fields():
    stats = {m: [] for m in ("gaussian", "tv", "nlm")}
    raw = []
    for seed in range(3):
        noisy, clean, mask = noisy_pair(64, sigma=0.6, seed=seed)
        raw.append(masked_metrics(noisy, clean, mask).psnr_db)
        for m in stats:
            out = denoise(noisy, mask, m)
            stats[m].append(masked_metrics(out, clean, mask).psnr_db)
    raw_m = np.mean(raw)
    assert np.mean(stats["gaussian"]) > raw_m
    assert np.mean(stats["tv"]) > np.mean(stats["gaussian"])
    assert np.mean(stats["nlm"]) > raw_m + 3.0


def test_noise_estimator_tracks_truth():
    mask = disk_mask(96)
    rng = np.random.default_rng(7)
    for sigma in (0.05, 0.5, 5.0):
        field = smooth_clean(96, 1) * mask + rng.normal(size=(96, 96)) * sigma * mask
        est = estimate_noise_std(field, mask)
        assert 0.6 * sigma <= est <= 1.6 * sigma


def test_unknown_method_and_empty_mask():
    noisy, clean, mask = noisy_pair(32)
    with pytest.raises(UnknownMethod):
        denoise(noisy, mask, "wavelet")
    with pytest.raises(EmptyMask):
        denoise(noisy, np.zeros_like(mask.values), "gaussian")
