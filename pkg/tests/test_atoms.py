import math

import numpy as np
import pytest

from wosbench import atoms as at
from wosbench.expr import atom_to_expr, eval_expr_jet
from wosbench.rng import RngStream

ALL_KINDS = at.GENERAL_KINDS + at.HARMONIC_KINDS


def spot_points(n=32, seed=0):
    """Random points in the annulus 0.1 <= r <= 1.3: away from the origin
    (polar kinds) and from singular centers (placed at radius >= 1.8)."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.1, 1.3, n)
    th = rng.uniform(0, 2 * np.pi, n)
    return r * np.cos(th), r * np.sin(th)


def sample_of_kind(kind, seed=0):
    return at._sample_params(kind, RngStream.from_seed(seed))


# -- pool composition ---------------------------------------------------------


def test_general_pool_hard_probability():
    pool = at.build_pool("general", 4)
    hard = sum(1 for k in pool if k in at.HARD_GENERAL)
    assert len(pool) == 40 and hard == 25
    assert hard / len(pool) == 0.625


def test_general_pool_no_extra():
    pool = at.build_pool("general", 0)
    assert len(pool) == 20
    assert sum(1 for k in pool if k in at.HARD_GENERAL) / len(pool) == 0.25


def test_harmonic_pool_base_weights():
    pool = at.build_pool("harmonic", 0)
    assert len(pool) == 19
    assert pool.count("h_linear") == 1
    assert pool.count("h_polar") == 2


def test_sampled_hard_fraction():
    rng = RngStream.from_seed(99)
    n = 20_000
    hard = sum(1 for _ in range(n) if at.sample_atom("general", 4, rng).hard)
    # binomial 3.5-sigma band around 0.625
    assert abs(hard / n - 0.625) <= 3.5 * math.sqrt(0.625 * 0.375 / n)


def test_solution_term_count_range():
    rng = RngStream.from_seed(5)
    counts = {at.sample_solution("general", 4, rng).n_terms for _ in range(300)}
    assert counts == {2, 3, 4, 5, 6}


def test_parameters_within_table_ranges():
    rng = RngStream.from_seed(7)
    for _ in range(300):
        a = at._sample_params("trig", rng)
        assert -1 <= a.params[0] <= 1 and 1 <= a.params[1] <= 6
        g = at._sample_params("gaussian_bump", rng)
        assert 0.8 <= g.params[1] <= 2.0
        nb = at._sample_params("narrow_bump", rng)
        assert 8.0 <= nb.params[1] <= 25.0
        ls = at._sample_params("log_source", rng)
        rho = math.hypot(ls.params[1], ls.params[2])
        assert 1.8 <= rho <= 2.5


# -- value examples ------------------------------------------------------------


def test_linear_plus_zero_bilinear():
    sol = at.Solution((at.Atom("h_linear", (1.0, 0.0)), at.Atom("h_bilinear", (0.0,))))
    assert at.solution_value(sol, 0.3, 0.4) == pytest.approx(0.3)


def test_gaussian_at_center():
    a = at.Atom("gaussian_bump", (0.8, 1.5, 0.2, -0.1))
    assert at.atom_value(a, 0.2, -0.1) == pytest.approx(0.8)


def test_harmonic_polar_example():
    a = at.Atom("harmonic_polar", (1.0, 2.0))
    x, y = 0.5 * math.cos(math.pi / 4), 0.5 * math.sin(math.pi / 4)
    assert at.atom_value(a, x, y) == pytest.approx(0.25 * math.cos(math.pi / 2), abs=1e-15)


# -- derivative examples ----------------------------------------------------------


def test_harmonic_pool_laplacian_vanishes():
    rng = RngStream.from_seed(11)
    sol = at.Solution(tuple(at.sample_atom("harmonic", 4, rng) for _ in range(6)))
    x, y = spot_points(100)
    lap = at.solution_laplacian(sol, x, y)
    u = at.solution_value(sol, x, y)
    scale = 1.0 + float(np.max(np.abs(u)))
    assert float(np.max(np.abs(lap))) <= 1e-6 * scale
    # the jet route agrees that it vanishes
    _, _, lap_jet = at.eval_derivs(sol, np.stack([x, y], axis=-1), strategy="jet")
    assert float(np.max(np.abs(lap_jet))) <= 1e-6 * scale


def test_gaussian_laplacian_at_center():
    a = at.Atom("gaussian_bump", (0.7, 1.9, 0.1, 0.2))
    assert at.atom_laplacian(a, 0.1, 0.2) == pytest.approx(-4 * 0.7 * 1.9)


def test_plane_wave_bilaplacian_identity():
    a = at.Atom("plane_wave", (0.9, 5.0, math.cos(0.3), math.sin(0.3)))
    x, y = spot_points(10, seed=3)
    u = at.atom_value(a, x, y)
    bil = at.atom_bilaplacian_closed(a, x, y)
    assert bil == pytest.approx(5.0**4 * u, rel=1e-12)


def test_yukawa_i0_eigenfunction_identities():
    a = at.Atom("yukawa_i0", (0.6, 1.8))
    x, y = spot_points(10, seed=4)
    u = at.atom_value(a, x, y)
    assert at.atom_laplacian(a, x, y) == pytest.approx(1.8**2 * u, rel=1e-10)
    assert at.atom_bilaplacian_closed(a, x, y) == pytest.approx(1.8**4 * u, rel=1e-10)


# -- finite-difference consistency ----------------------------------------------


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_laplacian_matches_finite_differences(kind):
    x, y = spot_points(32, seed=hash(kind) & 0xFFFF)
    for trial in range(3):
        atom = sample_of_kind(kind, seed=trial)
        if kind in ("h_exp_trig", "h_high_freq_exp_trig"):
            # keep exp(k x) at moderate magnitude: the FD truncation term
            # h^2 k^4 u / 6 swamps any absolute tolerance when u blows up
            x = np.clip(x, -1.3, 2.0 / abs(atom.params[1]))
        if kind == "h_high_n_polar":
            r = np.sqrt(x * x + y * y)
            shrink = np.where(r > 1.0, 1.0 / r, 1.0)
            x, y = x * shrink, y * shrink
        lap = at.atom_laplacian(atom, x, y)
        tol = 1e-2 if atom.hard else 1e-3
        for h in (1e-3, 1e-4):
            v0 = at.atom_value(atom, x, y)
            fd = (
                at.atom_value(atom, x + h, y)
                + at.atom_value(atom, x - h, y)
                + at.atom_value(atom, x, y + h)
                + at.atom_value(atom, x, y - h)
                - 4.0 * v0
            ) / (h * h)
            err = np.max(np.abs(fd - lap) / (1.0 + np.abs(lap)))
            assert err <= tol, (kind, trial, h, float(err))


@pytest.mark.parametrize(
    "kind",
    [k for k in at.GENERAL_KINDS if k not in at.HARD_KINDS],
)
def test_bilaplacian_smoke_13_point(kind):
    x, y = spot_points(8, seed=hash(kind) & 0xFF)
    atom = sample_of_kind(kind, seed=1)
    sol = at.Solution((atom,))
    bil = at.solution_bilaplacian(sol, x, y)
    h = 4e-3

    def lap_fd(xx, yy):
        return (
            at.atom_value(atom, xx + h, yy)
            + at.atom_value(atom, xx - h, yy)
            + at.atom_value(atom, xx, yy + h)
            + at.atom_value(atom, xx, yy - h)
            - 4.0 * at.atom_value(atom, xx, yy)
        ) / (h * h)

    fd = (lap_fd(x + h, y) + lap_fd(x - h, y) + lap_fd(x, y + h) + lap_fd(x, y - h) - 4.0 * lap_fd(x, y)) / (h * h)
    err = np.max(np.abs(fd - bil) / (1.0 + np.abs(bil)))
    assert err <= 1e-1, (kind, float(err))


# -- dual-route agreement -----------------------------------------------------------


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_closed_forms_agree_with_jets(kind):
    x, y = spot_points(16, seed=hash(kind) & 0xFFF)
    pts = np.stack([x, y], axis=-1)
    for trial in range(4):
        atom = sample_of_kind(kind, seed=100 + trial)
        sol = at.Solution((atom,))
        u1, (gx1, gy1), l1, b1 = at.eval_derivs(sol, pts, "bilaplacian", "closed")
        u2, (gx2, gy2), l2, b2 = at.eval_derivs(sol, pts, "bilaplacian", "jet")
        jet = eval_expr_jet(atom_to_expr(atom), x, y, degree=4)
        idx = jet.scheme.index
        # derivative extraction cancels terms of this magnitude, so
        # "relative" is measured against the pre-cancellation term scale
        lap_scale = 2.0 * (np.abs(jet.c[idx[(2, 0)]]) + np.abs(jet.c[idx[(0, 2)]]))
        bil_scale = 24.0 * (np.abs(jet.c[idx[(4, 0)]]) + np.abs(jet.c[idx[(0, 4)]])) + 8.0 * np.abs(
            jet.c[idx[(2, 2)]]
        )

        def rel(p, q, scale=0.0):
            return np.max(np.abs(p - q) / (1.0 + np.maximum(np.abs(p), np.abs(q)) + scale))

        worst = max(
            rel(u1, u2),
            rel(gx1, gx2),
            rel(gy1, gy2),
            rel(l1, l2, lap_scale),
            rel(b1, b2, bil_scale),
        )
        assert worst <= 1e-10, (kind, trial, float(worst))


def test_solution_linearity_exact():
    a1 = sample_of_kind("gaussian_bump", 1)
    a2 = sample_of_kind("plane_wave", 2)
    x, y = spot_points(20, seed=9)
    s12 = at.Solution((a1, a2))
    assert np.array_equal(
        at.solution_value(s12, x, y), at.atom_value(a1, x, y) + at.atom_value(a2, x, y)
    )
    assert np.array_equal(
        at.solution_laplacian(s12, x, y),
        at.atom_laplacian(a1, x, y) + at.atom_laplacian(a2, x, y),
    )


def test_arctan_branch_cut_points_away_from_domain():
    # the angle must be continuous on the evaluation square
    for seed in range(30):
        atom = sample_of_kind("h_arctan", seed)
        xs = np.linspace(-1.4, 1.4, 301)
        for ys in (xs, -xs, np.zeros_like(xs)):
            vals = at.atom_value(atom, xs, ys)
            assert np.max(np.abs(np.diff(vals))) < 1.0, seed
