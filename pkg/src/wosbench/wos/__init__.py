"""Walk-on-Spheres estimator for Laplace, Poisson and Yukawa instances.

The hot kernel exists twice: a compiled Cython extension and a pure-Python
twin with identical arithmetic.  The compiled one is selected at import
when available; set ``WOSBENCH_BACKEND=python`` to force the fallback.
``wosbench bench`` compares their throughput.

Estimates are unbiased up to the epsilon-shell termination bias and fully
deterministic: every walk is keyed by (seed, case id, pixel, walk index)
through a counter-based generator, so thread/process scheduling cannot
change results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .. import geometry
from ..field import Field
from ..manufactured import PdeInstance
from ..rng import RngStream, combine, fnv1a64, mix64
from . import _pykernel
from .encode import encode_instance

if os.environ.get("WOSBENCH_BACKEND", "") == "python":
    _backend = _pykernel
else:
    try:
        from . import _kernel as _backend  # type: ignore[attr-defined]
    except ImportError:
        _backend = _pykernel

BACKEND = _backend.BACKEND_NAME

WALKABLE_FAMILIES = ("laplace", "poisson", "yukawa")


class ComputeCapExceeded(Exception):
    pass


@dataclass(frozen=True)
class WosParams:
    epsilon: float = 1e-4
    max_steps: int = 128
    resolution: int = 256
    compute_cap: int = 1 << 33  # max walks per grid solve

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


EVAL_MAX_STEPS = 256  # convergence-verification setting


@dataclass
class Trajectory:
    budgets: tuple[int, ...]
    fields: list[Field]
    seed: int
    overflow_rate: float = 0.0

    def __post_init__(self):
        if list(self.budgets) != sorted(set(self.budgets)):
            raise ValueError("budgets must be strictly ascending")


def bessel_i0(x: float) -> float:
    """Modified Bessel I0 as computed by the active kernel."""
    return _backend.i0_s(float(x))


def bessel_k0(x: float) -> float:
    return _backend.k0_s(float(x))


def greens_sample_ball(radius: float, rng: RngStream) -> tuple[np.ndarray, float]:
    """Sample a source point in the ball with density proportional to the
    2D ball Green's function, G(r) = ln(R/r)/(2 pi).

    r = R*sqrt(U1*U2) has density (4r/R^2) ln(R/r), the normalized Green's
    function; the returned normalization is its total mass R^2/4, so a
    one-sample estimate of the source integral is mass * f(center+offset).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    u1 = rng.u01()
    u2 = rng.u01()
    theta = 2.0 * math.pi * rng.u01()
    r = radius * math.sqrt(u1 * u2)
    return np.array([r * math.cos(theta), r * math.sin(theta)]), radius * radius / 4.0


def _check_family(instance: PdeInstance):
    if instance.family not in WALKABLE_FAMILIES:
        raise ValueError(
            f"walk estimator supports {WALKABLE_FAMILIES}, not {instance.family}"
        )


def base_key(seed: int, case_id: str) -> int:
    return combine(mix64(seed), fnv1a64(case_id))


def wos_walk(instance: PdeInstance, start, params: WosParams, rng: RngStream) -> float:
    """One walk estimate of u(start); consumes one slot of the stream."""
    _check_family(instance)
    enc = encode_instance(instance)
    wkey = combine(rng.key, rng.counter)
    rng.counter += 1
    est, _, _ = _backend.walk_single(
        enc["domain_ints"],
        enc["domain_dbl"],
        enc["atom_kinds"],
        enc["atom_variants"],
        enc["atom_params"],
        enc["family"],
        enc["lam"],
        float(start[0]),
        float(start[1]),
        params.epsilon,
        params.max_steps,
        wkey,
    )
    return est


def estimate_point(
    instance: PdeInstance,
    point,
    n_walks: int,
    params: WosParams,
    rng: RngStream | None = None,
    seed: int = 0,
    point_tag: int = 0,
) -> tuple[float, float]:
    """Mean and unbiased sample variance of n independent walks.

    A single walk reports variance 0 by convention.
    """
    _check_family(instance)
    if n_walks < 1:
        raise ValueError("n_walks must be >= 1")
    enc = encode_instance(instance)
    key = rng.key if rng is not None else base_key(seed, instance.case_id)
    mean, var, _ = _backend.estimate_point_kernel(
        enc["domain_ints"],
        enc["domain_dbl"],
        enc["atom_kinds"],
        enc["atom_variants"],
        enc["atom_params"],
        enc["family"],
        enc["lam"],
        float(point[0]),
        float(point[1]),
        int(n_walks),
        key,
        int(point_tag),
        params.epsilon,
        params.max_steps,
    )
    return mean, var


def solve_grid(
    instance: PdeInstance,
    budgets,
    params: WosParams,
    seed: int,
    mask: np.ndarray | None = None,
) -> Trajectory:
    """Cumulative prefix-mean estimate fields at each budget.

    Deterministic in (instance, budgets, params, seed); masked-out pixels
    stay exactly 0.  The mask defaults to sdf > 0 at pixel centers.
    """
    _check_family(instance)
    budgets = [int(b) for b in budgets]
    if budgets != sorted(set(budgets)) or budgets[0] < 1:
        raise ValueError("budgets must be ascending positive integers")
    res = params.resolution
    if mask is None:
        mask = geometry.grid_mask(instance.domain, res)
    n_masked = int(np.sum(mask > 0))
    if n_masked * budgets[-1] > params.compute_cap:
        raise ComputeCapExceeded(
            f"{n_masked} pixels x {budgets[-1]} walks exceeds cap {params.compute_cap}"
        )
    enc = encode_instance(instance)
    mask_u8 = (mask > 0).astype(np.uint8)
    out, overflow, total = _backend.solve_grid_kernel(
        enc["domain_ints"],
        enc["domain_dbl"],
        enc["atom_kinds"],
        enc["atom_variants"],
        enc["atom_params"],
        enc["family"],
        enc["lam"],
        mask_u8,
        np.asarray(budgets, dtype=np.int64),
        base_key(seed, instance.case_id),
        params.epsilon,
        params.max_steps,
        res,
    )
    maskf = mask_u8.astype(np.float32)
    fields = [Field(out[i], maskf.copy()) for i in range(len(budgets))]
    rate = overflow / total if total else 0.0
    return Trajectory(tuple(budgets), fields, seed, rate)


def mean_walk_steps(
    instance: PdeInstance, point, n_walks: int, params: WosParams, seed: int = 0
) -> float:
    """Average step count of walks from a point (diagnostics)."""
    _check_family(instance)
    enc = encode_instance(instance)
    return _backend.mean_walk_steps(
        enc["domain_ints"],
        enc["domain_dbl"],
        enc["atom_kinds"],
        enc["atom_variants"],
        enc["atom_params"],
        enc["family"],
        enc["lam"],
        float(point[0]),
        float(point[1]),
        int(n_walks),
        base_key(seed, instance.case_id),
        params.epsilon,
        params.max_steps,
    )
