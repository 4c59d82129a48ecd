import math

import numpy as np
import pytest
import scipy.special as sps

from wosbench.special import bessel_i0, bessel_i1, bessel_k0, erf


def series_i0(x, terms=30):
    """Independent oracle: truncated ascending series sum (x/2)^2m / (m!)^2."""
    acc = 0.0
    for m in range(terms):
        acc += (0.5 * x) ** (2 * m) / math.factorial(m) ** 2
    return acc


def test_i0_at_zero():
    assert bessel_i0(0.0) == 1.0


def test_i0_series_oracle_values():
    assert bessel_i0(1.0) == pytest.approx(1.26606588, abs=5e-9)
    assert bessel_i0(5.0) == pytest.approx(27.2398718, abs=5e-7)
    for x in (0.3, 1.0, 2.5, 5.0, 9.0):
        assert bessel_i0(x) == pytest.approx(series_i0(x), rel=1e-12)


def test_i0_relative_error_against_scipy():
    xs = np.concatenate([np.linspace(1e-6, 11.9, 300), np.linspace(12.01, 60, 300)])
    rel = np.abs(bessel_i0(xs) / sps.i0(xs) - 1.0)
    assert float(rel.max()) <= 1e-8


def test_i1_relative_error_against_scipy():
    xs = np.linspace(1e-6, 60, 600)
    rel = np.abs(bessel_i1(xs) / sps.i1(xs) - 1.0)
    assert float(rel.max()) <= 1e-8
    assert bessel_i1(-2.0) == -bessel_i1(2.0)


def test_k0_relative_error_against_scipy():
    xs = np.concatenate([np.linspace(1e-4, 6.99, 300), np.linspace(7.01, 40, 300)])
    rel = np.abs(bessel_k0(xs) / sps.k0(xs) - 1.0)
    assert float(rel.max()) <= 1e-6


def test_k0_rejects_nonpositive():
    with pytest.raises(ValueError):
        bessel_k0(0.0)


def test_erf_absolute_error():
    xs = np.linspace(-5, 5, 1001)
    assert float(np.max(np.abs(erf(xs) - sps.erf(xs)))) <= 1.5e-7
    assert abs(erf(0.0)) <= 1.5e-7
    assert erf(-1.3) == -erf(1.3)


def test_scalar_and_vector_paths_agree():
    for x in (0.5, 3.0, 20.0):
        assert bessel_i0(x) == bessel_i0(np.array([x]))[0]
