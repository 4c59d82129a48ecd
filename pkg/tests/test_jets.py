import math

import numpy as np
import pytest
import scipy.special as sps

from wosbench.jets import (
    Jet,
    jet_atan2,
    jet_cos,
    jet_erf,
    jet_exp,
    jet_i0_of_r2,
    jet_log,
    jet_logaddexp,
    jet_pow,
    jet_sin,
    jet_sqrt,
    jet_tanh,
)


def vars_at(x, y, degree=4):
    return (
        Jet.variable("x", np.atleast_1d(np.asarray(x, dtype=float)), degree),
        Jet.variable("y", np.atleast_1d(np.asarray(y, dtype=float)), degree),
    )


def test_polynomial_derivatives_exact():
    x, y = vars_at(0.7, -0.3)
    f = x * x * y + 2.0 * y - x  # u = x^2 y + 2y - x
    assert f.value()[0] == pytest.approx(0.7**2 * -0.3 + 2 * -0.3 - 0.7, abs=0)
    gx, gy = f.grad()
    assert gx[0] == pytest.approx(2 * 0.7 * -0.3 - 1)
    assert gy[0] == pytest.approx(0.7**2 + 2)
    assert f.laplacian()[0] == pytest.approx(2 * -0.3)
    assert f.bilaplacian()[0] == 0.0


def test_exp_sin_harmonic_combination():
    # exp(x) sin(y) is harmonic; bilaplacian also vanishes
    x, y = vars_at(0.4, 1.1)
    f = jet_exp(x) * jet_sin(y)
    assert abs(f.laplacian()[0]) < 1e-13
    assert abs(f.bilaplacian()[0]) < 1e-11


def test_gaussian_against_closed_form():
    w = 1.7
    x, y = vars_at(0.25, -0.6)
    s = x * x + y * y
    f = jet_exp(s * (-w))
    r2 = 0.25**2 + 0.6**2
    e = math.exp(-w * r2)
    assert f.value()[0] == pytest.approx(e, rel=1e-14)
    assert f.laplacian()[0] == pytest.approx(e * (4 * w * w * r2 - 4 * w), rel=1e-12)
    bil = 16 * e * (w**4 * r2 * r2 - 4 * w**3 * r2 + 2 * w * w)
    assert f.bilaplacian()[0] == pytest.approx(bil, rel=1e-11)


def test_atan2_is_harmonic_with_correct_gradient():
    x, y = vars_at(0.31, 0.44)
    th = jet_atan2(y, x)
    r2 = 0.31**2 + 0.44**2
    assert th.value()[0] == pytest.approx(math.atan2(0.44, 0.31), abs=0)
    gx, gy = th.grad()
    assert gx[0] == pytest.approx(-0.44 / r2, rel=1e-13)
    assert gy[0] == pytest.approx(0.31 / r2, rel=1e-13)
    assert abs(th.laplacian()[0]) < 1e-12
    assert abs(th.bilaplacian()[0]) < 1e-10


def test_sqrt_log_pow_chain():
    x, y = vars_at(1.2, 0.5)
    r = jet_sqrt(x * x + y * y)
    f = jet_log(r)  # log|x|: harmonic away from origin
    assert abs(f.laplacian()[0]) < 1e-12
    g = jet_pow(r, 3.0) * jet_cos(jet_atan2(y, x) * 3.0)  # r^3 cos(3 theta)
    assert abs(g.laplacian()[0]) < 1e-10


def test_erf_derivative_structure():
    x, _ = vars_at(0.8, 0.0, degree=4)
    f = jet_erf(x)
    g = 2.0 / math.sqrt(math.pi) * math.exp(-0.64)
    gx, _ = f.grad()
    assert gx[0] == pytest.approx(g, rel=1e-15)
    assert f.laplacian()[0] == pytest.approx(-2 * 0.8 * g, rel=1e-13)


def test_i0_radial_composition():
    mu = 2.1
    x, y = vars_at(0.5, -0.2)
    f = jet_i0_of_r2(x * x + y * y, mu)
    r = math.hypot(0.5, 0.2)
    assert f.value()[0] == pytest.approx(sps.i0(mu * r), rel=1e-13)
    # modified Helmholtz eigenfunction: lap = mu^2 f, bilap = mu^4 f
    assert f.laplacian()[0] == pytest.approx(mu * mu * sps.i0(mu * r), rel=1e-12)
    assert f.bilaplacian()[0] == pytest.approx(mu**4 * sps.i0(mu * r), rel=1e-10)


def test_i0_radial_is_finite_at_origin():
    x, y = vars_at(0.0, 0.0)
    f = jet_i0_of_r2(x * x + y * y, 1.5)
    assert f.value()[0] == 1.0
    assert f.laplacian()[0] == pytest.approx(1.5**2, rel=1e-13)


def test_logaddexp_stability_and_value():
    x, y = vars_at(0.3, -0.2)
    f = jet_logaddexp(x * 3.0, y * 2.0)
    assert f.value()[0] == pytest.approx(np.logaddexp(0.9, -0.4), rel=1e-14)
    sig = 1.0 / (1.0 + math.exp(-(0.9 - -0.4)))
    assert f.laplacian()[0] == pytest.approx((9 + 4) * sig * (1 - sig), rel=1e-12)


def test_tanh_fourth_derivative_vs_finite_difference():
    x, _ = vars_at(0.37, 0.0)
    f = jet_tanh(x * 2.0)
    h = 1e-2
    vals = [math.tanh(2.0 * (0.37 + k * h)) for k in (-2, -1, 0, 1, 2)]
    fd4 = (vals[0] - 4 * vals[1] + 6 * vals[2] - 4 * vals[3] + vals[4]) / h**4
    assert f.bilaplacian()[0] == pytest.approx(fd4, rel=5e-3)


def test_batched_evaluation():
    xs = np.array([0.1, 0.2, 0.3])
    ys = np.array([0.5, -0.5, 0.0])
    x, y = vars_at(xs, ys)
    f = jet_exp(x) * jet_sin(y)
    assert f.value() == pytest.approx(np.exp(xs) * np.sin(ys))
    assert np.max(np.abs(f.laplacian())) < 1e-13
