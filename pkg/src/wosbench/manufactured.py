"""Instance generation by the method of manufactured solutions.

An instance fixes (family, domain, analytic solution); forcing and
boundary data are derived exactly from the solution, so the estimator's
target is known in closed form.  Generation applies an ordered chain of
quality filters and retries a case up to 40 times before giving up.

Five families:
    laplace     lap(u) = 0            (harmonic atom pool, f = 0)
    poisson     lap(u) = f
    yukawa      lap(u) - lambda*u = f,  lambda ~ U[0.5, 50]
    biharmonic  lap^2(u) = f
    helmholtz   lap(u) + k^2*u = f,     k ~ U[0.5, 10]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import atoms as atoms_mod
from . import geometry
from .field import Field, NonFiniteGroundTruth
from .rng import RngStream, combine, fnv1a64, mix64

FAMILIES = ("laplace", "poisson", "yukawa", "biharmonic", "helmholtz")
FORCED_FAMILIES = ("poisson", "yukawa", "biharmonic", "helmholtz")
TRAIN_FAMILIES = {"laplace": 1.0, "poisson": 1.0, "yukawa": 1.0}
TEST_FAMILIES = {f: 1.0 for f in FAMILIES}

YUKAWA_LAMBDA_RANGE = (0.5, 50.0)
HELMHOLTZ_K_RANGE = (0.5, 10.0)

# substream tags for the per-case RNG tree
_TAG_FAMILY = 1
_TAG_DOMAIN = 2
_TAG_SOLUTION = 3
_TAG_PDE_PARAM = 4
_TAG_FILTER = 5

FILTER_NAMES = (
    "finite_test_point",
    "finite_forcing",
    "domain_interior",
    "composed_thickness",
    "solution_amplitude",
    "boundary_values",
    "forcing_amplitude",
    "finite_ground_truth",
)


class GenerationExhausted(Exception):
    def __init__(self, attempts: int, last_reason: str):
        super().__init__(f"no viable instance in {attempts} attempts (last: {last_reason})")
        self.attempts = attempts
        self.last_reason = last_reason

    def __reduce__(self):  # keep picklable across process pools
        return (GenerationExhausted, (self.attempts, self.last_reason))


@dataclass(frozen=True)
class PdeInstance:
    case_id: str
    family: str
    lam: float
    k: float
    domain: geometry.Domain
    solution: atoms_mod.Solution
    std_u: float = float("nan")
    std_f: float = float("nan")

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family}")


@dataclass(frozen=True)
class GenConfig:
    families: dict = field(default_factory=lambda: dict(TRAIN_FAMILIES))
    hard_extra: int = 4
    max_retries: int = 40
    n_interior: int = 512
    n_domain_probe: int = 128
    min_interior_hits: int = 10
    thickness_min: float = 0.03
    std_u_min: float = 1e-3
    std_u_max: float = 200.0
    boundary_u_max: float = 500.0
    n_boundary: int = 256
    std_f_min: float = 1e-4
    std_f_max: float = 500.0
    gt_resolution: int = 256

    @staticmethod
    def train(**overrides) -> "GenConfig":
        return GenConfig(**overrides)

    @staticmethod
    def test(**overrides) -> "GenConfig":
        return GenConfig(families=dict(TEST_FAMILIES), **overrides)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------


def derive_forcing(instance: PdeInstance, points):
    """The family's right-hand side derived analytically from u."""
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    x, y = pts[..., 0], pts[..., 1]
    fam = instance.family
    if fam == "laplace":
        out = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
    elif fam == "poisson":
        out = atoms_mod.solution_laplacian(instance.solution, x, y)
    elif fam == "yukawa":
        out = atoms_mod.solution_laplacian(
            instance.solution, x, y
        ) - instance.lam * atoms_mod.solution_value(instance.solution, x, y)
    elif fam == "helmholtz":
        out = atoms_mod.solution_laplacian(
            instance.solution, x, y
        ) + instance.k**2 * atoms_mod.solution_value(instance.solution, x, y)
    else:  # biharmonic
        out = atoms_mod.solution_bilaplacian(instance.solution, x, y)
    return float(out[0]) if scalar else out


def boundary_value(instance: PdeInstance, points):
    """Dirichlet data: u restricted to the boundary."""
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    out = atoms_mod.solution_value(instance.solution, pts[..., 0], pts[..., 1])
    return float(out[0]) if scalar else out


def ground_truth_grid(instance: PdeInstance, resolution: int = 256) -> tuple[Field, Field]:
    """(clean, mask) fields at pixel centers; raises NonFiniteGroundTruth."""
    pts = geometry.grid_points(resolution)
    mask = geometry.grid_mask(instance.domain, resolution)
    u = atoms_mod.solution_value(instance.solution, pts[..., 0], pts[..., 1])
    with np.errstate(invalid="ignore"):
        u = np.where(mask > 0, u, 0.0)
    clean = Field.from_values(u, mask)
    return clean, Field(mask.copy(), mask.copy())


def forcing_grid(instance: PdeInstance, resolution: int = 256) -> Field:
    """Forcing rasterized on the evaluation grid (zero off-mask)."""
    pts = geometry.grid_points(resolution)
    mask = geometry.grid_mask(instance.domain, resolution)
    f = derive_forcing(instance, pts)
    f = np.where(mask > 0, f, 0.0)
    return Field.from_values(f, mask)


# ---------------------------------------------------------------------------
# quality filters
# ---------------------------------------------------------------------------


@dataclass
class FilterResult:
    passed: bool
    reason: Optional[str] = None
    std_u: float = float("nan")
    std_f: float = float("nan")
    gt_clean: Optional[Field] = None
    gt_mask: Optional[Field] = None


def _filter_stream(instance: PdeInstance) -> RngStream:
    return RngStream(combine(fnv1a64(instance.case_id), _TAG_FILTER))


def quality_filter(
    instance: PdeInstance,
    config: GenConfig = GenConfig(),
    rng: Optional[RngStream] = None,
) -> FilterResult:
    """Ordered acceptance checks; returns the first failing filter's name.

    Deterministic: the interior/boundary sample substream is derived from
    the case id unless an explicit stream is supplied.
    """
    rng = rng if rng is not None else _filter_stream(instance)
    sol = instance.solution
    probe = np.array([0.3, 0.4])

    # 1: finite u at the fixed probe (singular atoms may evaluate to inf/nan)
    with np.errstate(all="ignore"):
        if not np.isfinite(boundary_value(instance, probe)):
            return FilterResult(False, "finite_test_point")
        # 2: finite forcing at the probe (forced families)
        if instance.family in FORCED_FAMILIES:
            if not np.isfinite(derive_forcing(instance, probe)):
                return FilterResult(False, "finite_forcing")
    # 3: domain occupies enough of its bbox (hits among fixed proposals)
    probe_stream = rng.substream(1)
    xmin, xmax, ymin, ymax = instance.domain.bbox()
    uu = probe_stream.u01_array(2 * config.n_domain_probe)
    probes = np.stack(
        [xmin + (xmax - xmin) * uu[0::2], ymin + (ymax - ymin) * uu[1::2]], axis=-1
    )
    hits = int(np.sum(geometry.sdf_eval(instance.domain, probes) > 0.0))
    if hits < config.min_interior_hits:
        return FilterResult(False, "domain_interior")
    # interior sample set shared by filters 4, 5, 7
    try:
        interior, _ = geometry.sample_interior(
            instance.domain, rng.substream(2), config.n_interior
        )
    except geometry.EmptyDomain:
        return FilterResult(False, "domain_interior")
    ix, iy = interior[:, 0], interior[:, 1]
    # 4: composed domains must not be needle-thin
    if instance.domain.kind == "composed":
        med = float(np.median(geometry.sdf_eval(instance.domain, interior)))
        if not med > config.thickness_min:
            return FilterResult(False, "composed_thickness")
    # 5: solution amplitude window
    with np.errstate(all="ignore"):
        u_vals = atoms_mod.solution_value(sol, ix, iy)
    if not np.all(np.isfinite(u_vals)):
        return FilterResult(False, "solution_amplitude")
    std_u = float(np.std(u_vals))
    if not (config.std_u_min < std_u < config.std_u_max):
        return FilterResult(False, "solution_amplitude")
    # 6: boundary magnitude (composed only)
    if instance.domain.kind == "composed":
        try:
            bpts = geometry.sample_boundary(instance.domain, rng.substream(3), config.n_boundary)
        except geometry.EmptyDomain:
            return FilterResult(False, "boundary_values")
        with np.errstate(all="ignore"):
            bu = boundary_value(instance, bpts)
        if not np.all(np.isfinite(bu)) or float(np.max(np.abs(bu))) >= config.boundary_u_max:
            return FilterResult(False, "boundary_values")
    # 7: forcing amplitude window (forced families)
    std_f = 0.0
    if instance.family in FORCED_FAMILIES:
        with np.errstate(all="ignore"):
            f_vals = derive_forcing(instance, interior)
        if not np.all(np.isfinite(f_vals)):
            return FilterResult(False, "forcing_amplitude")
        std_f = float(np.std(f_vals))
        if not (config.std_f_min < std_f < config.std_f_max):
            return FilterResult(False, "forcing_amplitude")
    # 8: finite ground truth on the full grid
    try:
        clean, mask = ground_truth_grid(instance, config.gt_resolution)
    except NonFiniteGroundTruth:
        return FilterResult(False, "finite_ground_truth")
    return FilterResult(True, None, std_u, std_f, clean, mask)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _case_id(index: int, key: int) -> str:
    return f"{index:08d}-{mix64(key) & 0xFFFFFFFF:08x}"


def _sample_candidate(config: GenConfig, rng: RngStream, case_id: str) -> PdeInstance:
    names = list(config.families.keys())
    weights = [config.families[n] for n in names]
    family = names[rng.substream(_TAG_FAMILY).choice_weighted(weights)]
    domain = geometry.sample_domain(rng.substream(_TAG_DOMAIN))
    pool = "harmonic" if family == "laplace" else "general"
    solution = atoms_mod.sample_solution(pool, config.hard_extra, rng.substream(_TAG_SOLUTION))
    lam = 0.0
    k = 0.0
    prng = rng.substream(_TAG_PDE_PARAM)
    if family == "yukawa":
        lam = prng.uniform(*YUKAWA_LAMBDA_RANGE)
    elif family == "helmholtz":
        k = prng.uniform(*HELMHOLTZ_K_RANGE)
    return PdeInstance(
        case_id=case_id, family=family, lam=lam, k=k, domain=domain, solution=solution
    )


def sample_instance(
    config: GenConfig, rng: RngStream, case_index: int = 0
) -> tuple[PdeInstance, FilterResult, dict]:
    """Draw candidates until the filters pass (<= max_retries attempts).

    Returns (instance, filter artifacts, rejection tally by filter name).
    Raises GenerationExhausted when every attempt fails.
    """
    rejections: dict[str, int] = {}
    last_reason = "none"
    for attempt in range(config.max_retries):
        akey = combine(rng.key, attempt)
        case_id = _case_id(case_index, akey)
        candidate = _sample_candidate(config, RngStream(akey), case_id)
        result = quality_filter(candidate, config)
        if result.passed:
            instance = replace(candidate, std_u=result.std_u, std_f=result.std_f)
            return instance, result, rejections
        rejections[result.reason] = rejections.get(result.reason, 0) + 1
        last_reason = result.reason
    raise GenerationExhausted(config.max_retries, last_reason)


def case_stream(seed: int, case_index: int) -> RngStream:
    """The per-case RNG root used by generators and CLI workers."""
    return RngStream(combine(mix64(seed), case_index))
