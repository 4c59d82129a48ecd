"""Exact forward-mode differentiation with truncated bivariate polynomials.

A ``Jet`` carries the Taylor coefficients of a function about a batch of
points, up to total degree 2 (gradient/Laplacian) or 4 (bi-Laplacian).
Arithmetic on jets is exact polynomial arithmetic; analytic functions are
applied by composing their exact Taylor expansion about the jet's constant
term.  This gives machine-precision derivatives independently of the
per-kind closed forms, which is what makes the two routes checkable
against each other.

Coefficients may be complex (the harmonic atoms are real/imaginary parts
of holomorphic expressions, which jets handle natively via complex
arithmetic).
"""

from __future__ import annotations

import numpy as np

from .special import TWO_OVER_SQRT_PI, erf as _erf_value


def _monomials(degree: int) -> list[tuple[int, int]]:
    out = []
    for d in range(degree + 1):
        for j in range(d + 1):
            out.append((d - j, j))
    return out


class _Scheme:
    """Precomputed index tables for one truncation degree."""

    def __init__(self, degree: int):
        self.degree = degree
        self.monos = _monomials(degree)
        self.index = {m: i for i, m in enumerate(self.monos)}
        self.n = len(self.monos)
        # (ia, ib, iout) triples for truncated polynomial products
        table = []
        for ia, (i1, j1) in enumerate(self.monos):
            for ib, (i2, j2) in enumerate(self.monos):
                if i1 + i2 + j1 + j2 <= degree:
                    table.append((ia, ib, self.index[(i1 + i2, j1 + j2)]))
        self.mul_table = table


_SCHEMES = {2: _Scheme(2), 4: _Scheme(4)}


class Jet:
    """Truncated Taylor polynomial in (dx, dy) with batched coefficients."""

    __slots__ = ("scheme", "c")

    def __init__(self, scheme: _Scheme, coeffs: np.ndarray):
        self.scheme = scheme
        self.c = coeffs  # shape (n_monomials, *batch)

    # -- constructors -------------------------------------------------
    @staticmethod
    def variable(which: str, values, degree: int = 4) -> "Jet":
        sch = _SCHEMES[degree]
        values = np.asarray(values, dtype=np.float64)
        c = np.zeros((sch.n,) + values.shape, dtype=np.float64)
        c[0] = values
        c[sch.index[(1, 0) if which == "x" else (0, 1)]] = 1.0
        return Jet(sch, c)

    @staticmethod
    def constant_like(other: "Jet", value) -> "Jet":
        c = np.zeros_like(other.c)
        c[0] = value
        return Jet(other.scheme, c)

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant_like(self, other)

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.scheme, self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.scheme, -self.c)

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.scheme, self.c - other.c)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.scheme, self.c * other)
        a, b = self.c, other.c
        out_dtype = np.result_type(a.dtype, b.dtype)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=out_dtype)
        for ia, ib, io in self.scheme.mul_table:
            out[io] += a[ia] * b[ib]
        return Jet(self.scheme, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.scheme, self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- composition with analytic functions ---------------------------
    def compose(self, scaled_derivs) -> "Jet":
        """Evaluate sum_k scaled_derivs[k] * (self - c0)^k.

        ``scaled_derivs[k]`` must be f^(k)(c0) / k! evaluated at the
        constant term c0 (batched).
        """
        delta = Jet(self.scheme, self.c.copy())
        delta.c[0] = 0.0
        out = Jet.constant_like(self, scaled_derivs[0])
        power = None
        for k in range(1, self.scheme.degree + 1):
            power = delta if power is None else power * delta
            out = out + power * np.asarray(scaled_derivs[k])
        return out

    def reciprocal(self) -> "Jet":
        c0 = self.c[0]
        inv = 1.0 / c0
        derivs = [inv]
        for k in range(1, self.scheme.degree + 1):
            derivs.append(derivs[-1] * (-inv))
        return self.compose(derivs)

    def powi(self, n: int) -> "Jet":
        if n == 0:
            return Jet.constant_like(self, np.ones_like(self.c[0]))
        base = self if n > 0 else self.reciprocal()
        m = abs(n)
        out = base
        for _ in range(m - 1):
            out = out * base
        return out

    # -- extraction -----------------------------------------------------
    def value(self):
        return self.c[0]

    def grad(self):
        idx = self.scheme.index
        return self.c[idx[(1, 0)]], self.c[idx[(0, 1)]]

    def laplacian(self):
        idx = self.scheme.index
        return 2.0 * (self.c[idx[(2, 0)]] + self.c[idx[(0, 2)]])

    def bilaplacian(self):
        if self.scheme.degree < 4:
            raise ValueError("bilaplacian requires a degree-4 jet")
        idx = self.scheme.index
        return 24.0 * (self.c[idx[(4, 0)]] + self.c[idx[(0, 4)]]) + 8.0 * self.c[idx[(2, 2)]]


# -- analytic functions on jets ----------------------------------------


def _factorials(n):
    out = [1.0]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return out


def jet_exp(j: Jet) -> Jet:
    e = np.exp(j.c[0])
    fact = _factorials(j.scheme.degree)
    return j.compose([e / fact[k] for k in range(j.scheme.degree + 1)])


def jet_log(j: Jet) -> Jet:
    c0 = j.c[0]
    derivs = [np.log(c0)]
    inv = 1.0 / c0
    p = inv
    for k in range(1, j.scheme.degree + 1):
        derivs.append(((-1.0) ** (k - 1)) * p / k)
        p = p * inv
    return j.compose(derivs)


def jet_sin(j: Jet) -> Jet:
    s, c = np.sin(j.c[0]), np.cos(j.c[0])
    cycle = [s, c, -s, -c]
    fact = _factorials(j.scheme.degree)
    return j.compose([cycle[k % 4] / fact[k] for k in range(j.scheme.degree + 1)])


def jet_cos(j: Jet) -> Jet:
    s, c = np.sin(j.c[0]), np.cos(j.c[0])
    cycle = [c, -s, -c, s]
    fact = _factorials(j.scheme.degree)
    return j.compose([cycle[k % 4] / fact[k] for k in range(j.scheme.degree + 1)])


def jet_sinh(j: Jet) -> Jet:
    sh, ch = np.sinh(j.c[0]), np.cosh(j.c[0])
    cycle = [sh, ch]
    fact = _factorials(j.scheme.degree)
    return j.compose([cycle[k % 2] / fact[k] for k in range(j.scheme.degree + 1)])


def jet_cosh(j: Jet) -> Jet:
    sh, ch = np.sinh(j.c[0]), np.cosh(j.c[0])
    cycle = [ch, sh]
    fact = _factorials(j.scheme.degree)
    return j.compose([cycle[k % 2] / fact[k] for k in range(j.scheme.degree + 1)])


def jet_tanh(j: Jet) -> Jet:
    t = np.tanh(j.c[0])
    u = 1.0 - t * t  # sech^2
    # Successive derivatives of tanh expressed through t and u = 1 - t^2.
    d1 = u
    d2 = -2.0 * t * u
    d3 = u * (6.0 * t * t - 2.0)
    d4 = u * t * (16.0 - 24.0 * t * t)
    fact = _factorials(4)
    derivs = [t, d1, d2 / fact[2], d3 / fact[3], d4 / fact[4]]
    return j.compose(derivs[: j.scheme.degree + 1])


def jet_sqrt(j: Jet) -> Jet:
    c0 = j.c[0]
    r = np.sqrt(c0)
    inv = 1.0 / c0
    # d^k/dc^k sqrt(c) / k! = binom(1/2, k) c^(1/2 - k)
    derivs = [r]
    coeff = 0.5
    p = r * inv
    derivs.append(coeff * p)
    binom = 0.5
    for k in range(2, j.scheme.degree + 1):
        binom *= (0.5 - (k - 1)) / k
        p = p * inv
        derivs.append(binom * p)
    return j.compose(derivs)


def jet_erf(j: Jet) -> Jet:
    """erf on a jet: approximate value, exact derivative structure."""
    c0 = j.c[0]
    g = TWO_OVER_SQRT_PI * np.exp(-c0 * c0)
    d1 = g
    d2 = -2.0 * c0 * g
    d3 = (4.0 * c0 * c0 - 2.0) * g
    d4 = (12.0 * c0 - 8.0 * c0**3) * g
    fact = _factorials(4)
    derivs = [_erf_value(c0), d1, d2 / fact[2], d3 / fact[3], d4 / fact[4]]
    return j.compose(derivs[: j.scheme.degree + 1])


def jet_pow(j: Jet, p: float) -> Jet:
    if float(p).is_integer():
        return j.powi(int(p))
    if float(2.0 * p).is_integer():
        return jet_sqrt(j).powi(int(round(2.0 * p)))
    return jet_exp(jet_log(j) * p)


def jet_atan2(y: Jet, x: Jet) -> Jet:
    """Angle of (x, y): imaginary part of log(x + iy), branch from atan2."""
    z = Jet(x.scheme, x.c.astype(np.complex128) + 1j * y.c.astype(np.complex128))
    c0 = z.c[0]
    # Only the imaginary part survives extraction, so place the branch-cut
    # respecting angle there; the (discarded) real part would be log|z|.
    derivs = [1j * np.arctan2(np.real(y.c[0]), np.real(x.c[0]))]
    inv = 1.0 / c0
    p = inv
    for k in range(1, z.scheme.degree + 1):
        derivs.append(((-1.0) ** (k - 1)) * p / k)
        p = p * inv
    w = z.compose(derivs)
    return Jet(x.scheme, np.imag(w.c))


def jet_i0_of_r2(s: Jet, mu: float, n_terms: int = 40) -> Jet:
    """I0(mu * sqrt(s)) as an entire function of s = r^2.

    F(s) = sum_m (mu^2 s / 4)^m / (m!)^2 is entire, so the composition is
    well-conditioned even at r = 0 where sqrt would not be.
    """
    q = 0.25 * mu * mu
    alphas = [1.0]
    for m in range(1, n_terms):
        alphas.append(alphas[-1] * q / (m * m))
    s0 = s.c[0]
    derivs = []
    for k in range(s.scheme.degree + 1):
        # F^(k)(s)/k! = sum_{m>=k} alpha_m C(m,k) s^(m-k)
        acc = np.zeros_like(s0)
        binom = 1.0
        for m in range(n_terms - 1, k - 1, -1):
            comb = 1.0
            for j in range(k):
                comb *= (m - j) / (j + 1.0)
            acc = acc * s0 + alphas[m] * comb
        derivs.append(acc)
    return s.compose(derivs)


def jet_logaddexp(a: Jet, b: Jet) -> Jet:
    """log(exp(a) + exp(b)), stabilized about the larger constant term."""
    m = np.maximum(np.real(a.c[0]), np.real(b.c[0]))
    ea = jet_exp(a - m)
    eb = jet_exp(b - m)
    return jet_log(ea + eb) + m
