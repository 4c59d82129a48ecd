"""Special functions used by the solution atoms and the walk kernel.

Self-contained implementations of I0, I1, K0 and erf, vectorized over numpy
arrays.  The walk kernels (compiled and pure-Python) carry scalar twins of
the same algorithms; tests pin both against series/quadrature oracles and
``scipy.special``.

Accuracy targets: I0/I1 relative error <= 1e-8, K0 <= 1e-6, erf absolute
error <= 1.5e-7 (its derivative, used for exact differentiation, is the
Gaussian and therefore exact).
"""

from __future__ import annotations

import numpy as np

# The ascending series of I0/I1 is all-positive, hence stable at any
# argument; below the split it reaches ~1e-15 relative with <= 48 terms.
# The asymptotic tail needs x large enough that its optimal truncation
# error is < 1e-9, which holds beyond 12.
_I_SERIES_SPLIT = 12.0
# K0's ascending series cancels against the log term as x grows; at 7 the
# cancellation still leaves ~1e-7 relative, and the alternating asymptotic
# tail is already below 2e-7 there.
_K_SERIES_SPLIT = 7.0
_ASYM_N = 16


def _asym_tail(inv: np.ndarray, order: int, alternating: bool) -> np.ndarray:
    """Horner sum of a_k / x^k, a_k = prod((mu - (2j-1)^2)) / (k! 8^k)."""
    acc = np.zeros_like(inv)
    for k in range(_ASYM_N, 0, -1):
        c_k = 1.0
        fact = 1.0
        for j in range(1, k + 1):
            c_k *= ((2 * j - 1) ** 2) if order == 0 else (4.0 - (2 * j - 1) ** 2)
            fact *= j
        c_k /= fact * 8.0**k
        if alternating and k % 2 == 1:
            c_k = -c_k
        acc = (acc + c_k) * inv
    return acc


def bessel_i0(x):
    """Modified Bessel function of the first kind, order 0."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(np.abs(x))
    out = np.empty_like(x)

    small = x <= _I_SERIES_SPLIT
    if np.any(small):
        xs = x[small]
        t = 0.25 * xs * xs
        term = np.ones_like(xs)
        acc = np.ones_like(xs)
        for m in range(1, 48):
            term = term * t / (m * m)
            acc += term
        out[small] = acc
    if np.any(~small):
        xl = x[~small]
        tail = _asym_tail(1.0 / xl, order=0, alternating=False)
        out[~small] = np.exp(xl) / np.sqrt(2.0 * np.pi * xl) * (1.0 + tail)
    return out[0] if scalar else out


def bessel_i1(x):
    """Modified Bessel function of the first kind, order 1 (odd in x)."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    xin = np.atleast_1d(x)
    sign = np.where(xin < 0.0, -1.0, 1.0)
    ax = np.abs(xin)
    out = np.empty_like(ax)

    small = ax <= _I_SERIES_SPLIT
    if np.any(small):
        xs = ax[small]
        t = 0.25 * xs * xs
        term = 0.5 * xs
        acc = term.copy()
        for m in range(1, 48):
            term = term * t / (m * (m + 1.0))
            acc += term
        out[small] = acc
    if np.any(~small):
        xl = ax[~small]
        tail = _asym_tail(1.0 / xl, order=1, alternating=True)
        out[~small] = np.exp(xl) / np.sqrt(2.0 * np.pi * xl) * (1.0 + tail)
    res = sign * out
    return res[0] if scalar else res


_EULER_GAMMA = 0.5772156649015329


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0 (x > 0)."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x <= 0.0):
        raise ValueError("bessel_k0 requires x > 0")
    out = np.empty_like(x)

    small = x <= _K_SERIES_SPLIT
    if np.any(small):
        xs = x[small]
        t = 0.25 * xs * xs
        term = np.ones_like(xs)
        harm = 0.0
        acc = np.zeros_like(xs)
        for m in range(1, 60):
            term = term * t / (m * m)
            harm += 1.0 / m
            acc += term * harm
        out[small] = -(np.log(0.5 * xs) + _EULER_GAMMA) * bessel_i0(xs) + acc
    if np.any(~small):
        xl = x[~small]
        tail = _asym_tail(1.0 / xl, order=0, alternating=True)
        out[~small] = np.sqrt(0.5 * np.pi / xl) * np.exp(-xl) * (1.0 + tail)
    return out[0] if scalar else out


# Abramowitz-Stegun 7.1.26 rational approximation, |error| <= 1.5e-7.
_ERF_P = 0.3275911
_ERF_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)
TWO_OVER_SQRT_PI = 1.1283791670955126


def erf(x):
    """Error function via a rational approximation (abs error <= 1.5e-7)."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    sign = np.where(x < 0.0, -1.0, 1.0)
    ax = np.abs(x)
    t = 1.0 / (1.0 + _ERF_P * ax)
    poly = t * (_ERF_A[0] + t * (_ERF_A[1] + t * (_ERF_A[2] + t * (_ERF_A[3] + t * _ERF_A[4]))))
    y = 1.0 - poly * np.exp(-ax * ax)
    out = sign * y
    return out[0] if scalar else out
