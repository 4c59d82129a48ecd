"""Pure-Python walk kernel: the fallback backend and the parity reference.

This module mirrors the compiled kernel operation for operation (same RNG
integers, same floating-point expression order, same libm calls), so the
two backends produce bit-identical estimates.  It is orders of magnitude
slower and intended for environments without a compiler and for tests.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0
TWO_PI = 6.283185307179586

_TRI_ANGLES = (-math.pi / 2, math.pi / 6, 5 * math.pi / 6)
_HEX_ANGLES = tuple(k * math.pi / 3 for k in range(6))


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def combine(key: int, fieldv: int) -> int:
    return mix64((key ^ mix64((fieldv + GAMMA) & MASK64)) & MASK64)


def u01(key: int, counter: int) -> float:
    return (mix64((key + (counter + 1) * GAMMA) & MASK64) >> 11) * _INV_2_53


# -- scalar special functions (same algorithm as wosbench.special) ---------

_I_SPLIT = 12.0
_K_SPLIT = 7.0
_ASYM_N = 16
_EULER_GAMMA = 0.5772156649015329
_ERF_P = 0.3275911
_ERF_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)
TWO_OVER_SQRT_PI = 1.1283791670955126


def _asym_coeff(k: int, order: int) -> float:
    c = 1.0
    fact = 1.0
    for j in range(1, k + 1):
        c *= ((2 * j - 1) ** 2) if order == 0 else (4.0 - (2 * j - 1) ** 2)
        fact *= j
    return c / (fact * 8.0**k)


def erf_s(x: float) -> float:
    sign = -1.0 if x < 0.0 else 1.0
    ax = abs(x)
    t = 1.0 / (1.0 + _ERF_P * ax)
    poly = t * (_ERF_A[0] + t * (_ERF_A[1] + t * (_ERF_A[2] + t * (_ERF_A[3] + t * _ERF_A[4]))))
    return sign * (1.0 - poly * math.exp(-ax * ax))


def i0_s(x: float) -> float:
    x = abs(x)
    if x <= _I_SPLIT:
        t = 0.25 * x * x
        term = 1.0
        acc = 1.0
        for m in range(1, 48):
            term = term * t / (m * m)
            acc += term
            if term <= 1e-17 * acc:
                break
        return acc
    inv = 1.0 / x
    tail = 0.0
    for k in range(_ASYM_N, 0, -1):
        tail = (tail + _asym_coeff(k, 0)) * inv
    return math.exp(x) / math.sqrt(TWO_PI * x) * (1.0 + tail)


def i1_s(x: float) -> float:
    sign = -1.0 if x < 0.0 else 1.0
    ax = abs(x)
    if ax <= _I_SPLIT:
        t = 0.25 * ax * ax
        term = 0.5 * ax
        acc = term
        for m in range(1, 48):
            term = term * t / (m * (m + 1.0))
            acc += term
            if term <= 1e-17 * acc:
                break
        return sign * acc
    inv = 1.0 / ax
    tail = 0.0
    for k in range(_ASYM_N, 0, -1):
        c = _asym_coeff(k, 1)
        if k % 2 == 1:
            c = -c
        tail = (tail + c) * inv
    return sign * math.exp(ax) / math.sqrt(TWO_PI * ax) * (1.0 + tail)


def k0_s(x: float) -> float:
    if x <= _K_SPLIT:
        t = 0.25 * x * x
        term = 1.0
        harm = 0.0
        acc = 0.0
        for m in range(1, 60):
            term = term * t / (m * m)
            harm += 1.0 / m
            acc += term * harm
            if term * harm <= 1e-17 * (1.0 + acc):
                break
        return -(math.log(0.5 * x) + _EULER_GAMMA) * i0_s(x) + acc
    inv = 1.0 / x
    tail = 0.0
    for k in range(_ASYM_N, 0, -1):
        c = _asym_coeff(k, 0)
        if k % 2 == 1:
            c = -c
        tail = (tail + c) * inv
    return math.sqrt(0.5 * math.pi / x) * math.exp(-x) * (1.0 + tail)


# -- scalar SDF -------------------------------------------------------------


def _prim_sdf(kind: int, p, o: int, x: float, y: float) -> float:
    if kind == 0:  # disk
        return p[o] - math.sqrt(x * x + y * y)
    if kind == 1:  # square
        return min(p[o] - abs(x), p[o] - abs(y))
    if kind == 2:  # rectangle
        return min(p[o] - abs(x), p[o + 1] - abs(y))
    if kind == 3:  # ellipse
        rx, ry = p[o], p[o + 1]
        rho = math.sqrt((x / rx) * (x / rx) + (y / ry) * (y / ry))
        return (1.0 - rho) * min(rx, ry)
    if kind == 4:  # annulus
        r = math.sqrt(x * x + y * y)
        return min(p[o + 1] - r, r - p[o])
    if kind == 5:  # triangle
        inr = 0.5 * p[o]
        d = 1e300
        for ang in _TRI_ANGLES:
            e = inr - (math.cos(ang) * x + math.sin(ang) * y)
            if e < d:
                d = e
        return d
    if kind == 6:  # hexagon
        inr = p[o] * math.sqrt(3.0) / 2.0
        d = 1e300
        for ang in _HEX_ANGLES:
            e = inr - (math.cos(ang) * x + math.sin(ang) * y)
            if e < d:
                d = e
        return d
    if kind == 7:  # stadium
        qx = abs(x) - p[o]
        if qx < 0.0:
            qx = 0.0
        return p[o + 1] - math.sqrt(qx * qx + y * y)
    raise ValueError(kind)


def sdf_s(dints, ddbl, x: float, y: float) -> float:
    kind = dints[0]
    if kind != 8:
        return _prim_sdf(kind, ddbl, 0, x, y)
    vals = [0.0, 0.0]
    for c in range(2):
        ct = ddbl[12 + 2 * c]
        st = ddbl[13 + 2 * c]
        dx = x - ddbl[16 + 2 * c]
        dy = y - ddbl[17 + 2 * c]
        lx = ct * dx + st * dy
        ly = -st * dx + ct * dy
        vals[c] = _prim_sdf(dints[2 + c], ddbl, 4 + 4 * c, lx, ly)
    op = dints[1]
    if op == 0:
        return vals[0] if vals[0] > vals[1] else vals[1]
    if op == 1:
        return vals[0] if vals[0] < vals[1] else vals[1]
    nb = -vals[1]
    return vals[0] if vals[0] < nb else nb


def _prim_project(kind: int, p, o: int, x: float, y: float) -> tuple[float, float]:
    if kind == 0:
        radius = p[o]
        r = math.sqrt(x * x + y * y)
        if r == 0.0:
            return (radius, 0.0)
        s = radius / r
        return (x * s, y * s)
    if kind in (1, 2):
        a = p[o]
        b = p[o] if kind == 1 else p[o + 1]
        if abs(x) > a or abs(y) > b:
            cx = min(max(x, -a), a)
            cy = min(max(y, -b), b)
            return (cx, cy)
        if a - abs(x) <= b - abs(y):
            return (math.copysign(a, x) if x != 0.0 else a, y)
        return (x, math.copysign(b, y) if y != 0.0 else b)
    if kind == 3:
        rx, ry = p[o], p[o + 1]
        rho = math.sqrt((x / rx) * (x / rx) + (y / ry) * (y / ry))
        if rho == 0.0:
            return (rx, 0.0)
        return (x / rho, y / rho)
    if kind == 4:
        r_in, r_out = p[o], p[o + 1]
        r = math.sqrt(x * x + y * y)
        if r == 0.0:
            return (r_in, 0.0)
        target = r_out if (r_out - r) <= (r - r_in) else r_in
        s = target / r
        return (x * s, y * s)
    if kind in (5, 6):
        if kind == 5:
            inr, angles = 0.5 * p[o], _TRI_ANGLES
        else:
            inr, angles = p[o] * math.sqrt(3.0) / 2.0, _HEX_ANGLES
        best = 1e300
        bx, by = x, y
        for ang in angles:
            nx, ny = math.cos(ang), math.sin(ang)
            e = inr - (nx * x + ny * y)
            if e < best:
                best = e
                bx, by = x + e * nx, y + e * ny
        return (bx, by)
    if kind == 7:
        half_len, radius = p[o], p[o + 1]
        cx = min(max(x, -half_len), half_len)
        dx, dy = x - cx, y
        d = math.sqrt(dx * dx + dy * dy)
        if d == 0.0:
            return (cx, radius)
        s = radius / d
        return (cx + dx * s, dy * s)
    raise ValueError(kind)


def project_s(dints, ddbl, x: float, y: float) -> tuple[float, float]:
    kind = dints[0]
    if kind != 8:
        return _prim_project(kind, ddbl, 0, x, y)
    h = 1e-5
    for _ in range(64):
        s = sdf_s(dints, ddbl, x, y)
        if abs(s) <= 1e-6:
            return (x, y)
        gx = (sdf_s(dints, ddbl, x + h, y) - sdf_s(dints, ddbl, x - h, y)) / (2.0 * h)
        gy = (sdf_s(dints, ddbl, x, y + h) - sdf_s(dints, ddbl, x, y - h)) / (2.0 * h)
        g2 = gx * gx + gy * gy
        if g2 < 1e-12:
            break
        x -= s * gx / g2
        y -= s * gy / g2
    return (x, y)


# -- scalar atom evaluation --------------------------------------------------


def atom_value_s(kind: int, variant: int, p, x: float, y: float) -> float:
    if kind == 0:  # poly
        return (
            p[0]
            + p[1] * x
            + p[2] * y
            + p[3] * x * x
            + p[4] * x * y
            + p[5] * y * y
            + p[6] * x * x * x
            + p[7] * x * x * y
            + p[8] * x * y * y
            + p[9] * y * y * y
        )
    if kind == 1:  # trig
        return p[0] * math.sin(p[1] * math.pi * x)
    if kind == 2:  # exp
        return p[0] * math.exp(p[1] * x)
    if kind == 3:  # log
        return p[0] * math.log(x * x + 0.01)
    if kind == 4:  # hyper
        if variant == 0:
            return p[0] * math.sinh(x)
        if variant == 1:
            return p[0] * math.cosh(x)
        return p[0] * math.tanh(x)
    if kind == 5:  # special
        if variant == 0:
            return p[0] * erf_s(x)
        return p[0] * math.sqrt(x * x + 0.1)
    if kind in (6, 20, 31):  # harmonic_polar, h_polar, h_high_n_polar
        n = int(p[1])
        re, im = 1.0, 0.0
        for _ in range(n):
            re, im = re * x - im * y, re * y + im * x
        if kind == 6 or variant == 0:
            return p[0] * re
        return p[0] * im
    if kind == 7:  # plane_wave
        return p[0] * math.cos(p[1] * (p[2] * x + p[3] * y))
    if kind == 8:  # yukawa_i0
        return p[0] * i0_s(p[1] * math.sqrt(x * x + y * y))
    if kind in (9, 23):  # log_source, h_log_source
        dx, dy = x - p[1], y - p[2]
        return p[0] * 0.5 * math.log(dx * dx + dy * dy)
    if kind in (10, 18):  # gaussian_bump, narrow_bump
        dx, dy = x - p[2], y - p[3]
        return p[0] * math.exp(-p[1] * (dx * dx + dy * dy))
    if kind == 11:  # rational
        return p[0] / (1.0 + p[1] * x * x + p[2] * y * y)
    if kind == 12:  # product
        return p[0] * _pf(variant // 3, p[1] * x) * _pf(variant % 3, p[2] * y)
    if kind == 13:  # multi_rbf
        m = int(p[0])
        out = 0.0
        for i in range(m):
            a, w, cx, cy = p[1 + 4 * i], p[2 + 4 * i], p[3 + 4 * i], p[4 + 4 * i]
            dx, dy = x - cx, y - cy
            out += a * math.exp(-w * (dx * dx + dy * dy))
        return out
    if kind in (14, 17):  # high_freq_trig, very_high_freq_trig
        return p[0] * math.sin(p[1] * math.pi * x) * math.cos(p[2] * math.pi * y)
    if kind == 15:  # logsumexp
        s, t = p[1] * x, p[2] * y
        m = s if s > t else t
        return p[0] * (m + math.log(math.exp(s - m) + math.exp(t - m)))
    if kind == 16:  # sech_bump
        chp = math.cosh(p[1] * (x - p[3]))
        chq = math.cosh(p[2] * (y - p[4]))
        return p[0] / (chp * chp * chq * chq)
    if kind == 19:  # sharp_transition
        return p[0] * math.tanh(p[1] * (p[2] * x + p[3] * y - p[4]))
    if kind in (21, 30):  # h_exp_trig, h_high_freq_exp_trig
        e = math.exp(p[1] * x)
        if variant == 0:
            return p[0] * e * math.cos(p[1] * y)
        return p[0] * e * math.sin(p[1] * y)
    if kind == 22:  # h_trig_hyp
        fx = math.sin(p[1] * x) if variant in (0, 1) else math.cos(p[1] * x)
        fy = math.sinh(p[1] * y) if variant in (0, 2) else math.cosh(p[1] * y)
        return p[0] * fx * fy
    if kind == 24:  # h_linear
        return p[0] * x + p[1] * y
    if kind == 25:  # h_bilinear
        return p[0] * x * y
    if kind == 26:  # h_arctan
        return p[0] * math.atan2(p[4] * x + p[5] * y + p[6], p[1] * x + p[2] * y + p[3])
    if kind == 27:  # h_inversion
        dx, dy = x - p[1], y - p[2]
        return p[0] * dx / (dx * dx + dy * dy)
    if kind == 28:  # h_dipole
        dx, dy = x - p[1], y - p[2]
        r2 = dx * dx + dy * dy
        return p[0] * (dx * dx - dy * dy) / (r2 * r2)
    if kind == 29:  # h_quadratic
        c, s = p[1], p[2]
        u = c * x + s * y
        v = -s * x + c * y
        if variant == 0:
            return p[0] * (u * u - v * v)
        return p[0] * 2.0 * u * v
    raise ValueError(kind)


def _pf(idx: int, t: float) -> float:
    if idx == 0:
        return math.sin(t)
    if idx == 1:
        return math.cos(t)
    return math.tanh(t)


def _pf_d2(idx: int, t: float) -> float:
    if idx == 0:
        return -math.sin(t)
    if idx == 1:
        return -math.cos(t)
    th = math.tanh(t)
    return -2.0 * th * (1.0 - th * th)


def atom_lap_s(kind: int, variant: int, p, x: float, y: float) -> float:
    if kind >= 20 or kind in (6, 9):  # harmonic kinds
        return 0.0
    if kind == 0:
        return 2.0 * p[3] + 2.0 * p[5] + 6.0 * p[6] * x + 2.0 * p[7] * y + 2.0 * p[8] * x + 6.0 * p[9] * y
    if kind == 1:
        w = p[1] * math.pi
        return -(w * w) * p[0] * math.sin(w * x)
    if kind == 2:
        return p[1] * p[1] * p[0] * math.exp(p[1] * x)
    if kind == 3:
        d = x * x + 0.01
        return 2.0 * p[0] * (0.01 - x * x) / (d * d)
    if kind == 4:
        if variant == 0:
            return p[0] * math.sinh(x)
        if variant == 1:
            return p[0] * math.cosh(x)
        t = math.tanh(x)
        return -2.0 * p[0] * t * (1.0 - t * t)
    if kind == 5:
        if variant == 0:
            return -2.0 * p[0] * TWO_OVER_SQRT_PI * x * math.exp(-x * x)
        s2 = x * x + 0.1
        return p[0] * 0.1 / (s2 * math.sqrt(s2))
    if kind == 7:
        return -(p[1] * p[1]) * p[0] * math.cos(p[1] * (p[2] * x + p[3] * y))
    if kind == 8:
        return p[1] * p[1] * p[0] * i0_s(p[1] * math.sqrt(x * x + y * y))
    if kind in (10, 18):
        dx, dy = x - p[2], y - p[3]
        s = dx * dx + dy * dy
        w = p[1]
        return p[0] * math.exp(-w * s) * (4.0 * w * w * s - 4.0 * w)
    if kind == 11:
        b, c = p[1], p[2]
        d = 1.0 + b * x * x + c * y * y
        return -2.0 * p[0] * (b + c) / (d * d) + 8.0 * p[0] * (b * b * x * x + c * c * y * y) / (d * d * d)
    if kind == 12:
        k1, k2 = p[1], p[2]
        f1, f2 = variant // 3, variant % 3
        return p[0] * (
            k1 * k1 * _pf_d2(f1, k1 * x) * _pf(f2, k2 * y)
            + k2 * k2 * _pf(f1, k1 * x) * _pf_d2(f2, k2 * y)
        )
    if kind == 13:
        m = int(p[0])
        out = 0.0
        for i in range(m):
            a, w, cx, cy = p[1 + 4 * i], p[2 + 4 * i], p[3 + 4 * i], p[4 + 4 * i]
            dx, dy = x - cx, y - cy
            s = dx * dx + dy * dy
            out += a * math.exp(-w * s) * (4.0 * w * w * s - 4.0 * w)
        return out
    if kind in (14, 17):
        al, be = p[1] * math.pi, p[2] * math.pi
        return -(al * al + be * be) * p[0] * math.sin(al * x) * math.cos(be * y)
    if kind == 15:
        b, c = p[1], p[2]
        sig = 1.0 / (1.0 + math.exp(-(b * x - c * y)))
        return p[0] * (b * b + c * c) * sig * (1.0 - sig)
    if kind == 16:
        b, c = p[1], p[2]
        tp, tq = math.tanh(b * (x - p[3])), math.tanh(c * (y - p[4]))
        chp, chq = math.cosh(b * (x - p[3])), math.cosh(c * (y - p[4]))
        sp, sq = 1.0 / (chp * chp), 1.0 / (chq * chq)
        d2p = sp * (6.0 * tp * tp - 2.0)
        d2q = sq * (6.0 * tq * tq - 2.0)
        return p[0] * (b * b * d2p * sq + c * c * sp * d2q)
    if kind == 19:
        t = math.tanh(p[1] * (p[2] * x + p[3] * y - p[4]))
        return -2.0 * p[0] * p[1] * p[1] * t * (1.0 - t * t)
    raise ValueError(kind)


def sol_value_s(kinds, variants, params, x: float, y: float) -> float:
    out = 0.0
    for i in range(len(kinds)):
        out += atom_value_s(kinds[i], variants[i], params[i], x, y)
    return out


def forcing_s(family: int, lam: float, kinds, variants, params, x: float, y: float) -> float:
    """f for the walk families: poisson lap(u); yukawa lap(u) - lam*u."""
    lap = 0.0
    for i in range(len(kinds)):
        lap += atom_lap_s(kinds[i], variants[i], params[i], x, y)
    if family == 1:
        return lap
    return lap - lam * sol_value_s(kinds, variants, params, x, y)


# -- the walk ----------------------------------------------------------------


def walk_single(
    dints,
    ddbl,
    kinds,
    variants,
    params,
    family: int,
    lam: float,
    x0: float,
    y0: float,
    eps: float,
    max_steps: int,
    wkey: int,
) -> tuple[float, int, int]:
    """One walk from (x0, y0): returns (estimate, steps, overflowed)."""
    x, y = x0, y0
    acc = 0.0
    w = 1.0
    counter = 0
    steps = 0
    overflow = 0
    mu = math.sqrt(lam) if family == 2 else 0.0
    while True:
        r_ball = sdf_s(dints, ddbl, x, y)
        if r_ball < eps:
            break
        if steps >= max_steps:
            overflow = 1
            break
        if family == 1:  # poisson: Green's-density source sample
            u1 = u01(wkey, counter)
            u2 = u01(wkey, counter + 1)
            th = TWO_PI * u01(wkey, counter + 2)
            counter += 3
            rs = r_ball * math.sqrt(u1 * u2)
            sx = x + rs * math.cos(th)
            sy = y + rs * math.sin(th)
            fv = forcing_s(family, lam, kinds, variants, params, sx, sy)
            acc -= 0.25 * r_ball * r_ball * fv
        elif family == 2:
            # yukawa: importance-sample from the unscreened Green density
            # (mass R^2/4) and reweight by the screened/unscreened ratio;
            # the ratio is bounded and matches the log singularity exactly
            u1 = u01(wkey, counter)
            u2 = u01(wkey, counter + 1)
            th = TWO_PI * u01(wkey, counter + 2)
            counter += 3
            rs = r_ball * math.sqrt(u1 * u2)
            re = rs if rs > r_ball * 1e-12 else r_ball * 1e-12
            sx = x + rs * math.cos(th)
            sy = y + rs * math.sin(th)
            i0R = i0_s(mu * r_ball)
            k0R = k0_s(mu * r_ball)
            green = k0_s(mu * re) - k0R * i0_s(mu * re) / i0R
            g0 = math.log(r_ball / re)
            ratio = green / g0 if g0 > 0.0 else 0.0
            fv = forcing_s(family, lam, kinds, variants, params, sx, sy)
            acc -= w * 0.25 * r_ball * r_ball * ratio * fv
            w /= i0R
        phi = TWO_PI * u01(wkey, counter)
        counter += 1
        x += r_ball * math.cos(phi)
        y += r_ball * math.sin(phi)
        steps += 1
    px, py = project_s(dints, ddbl, x, y)
    g = sol_value_s(kinds, variants, params, px, py)
    return acc + w * g, steps, overflow


def estimate_point_kernel(
    dints, ddbl, kinds, variants, params, family, lam,
    px, py, n_walks, base_key, point_tag, eps, max_steps,
) -> tuple[float, float, int]:
    pk = combine(base_key, point_tag)
    mean = 0.0
    m2 = 0.0
    overflow = 0
    for k in range(n_walks):
        wk = combine(pk, k)
        est, _, ov = walk_single(
            dints, ddbl, kinds, variants, params, family, lam, px, py, eps, max_steps, wk
        )
        overflow += ov
        delta = est - mean
        mean += delta / (k + 1)
        m2 += delta * (est - mean)
    var = m2 / (n_walks - 1) if n_walks > 1 else 0.0
    return mean, var, overflow


def solve_grid_kernel(
    dints, ddbl, kinds, variants, params, family, lam,
    mask, budgets, base_key, eps, max_steps, resolution,
) -> tuple[np.ndarray, int, int]:
    nb = len(budgets)
    out = np.zeros((nb, resolution, resolution), dtype=np.float32)
    max_b = int(budgets[-1])
    step = 2.0 / resolution
    overflow = 0
    total = 0
    for i in range(resolution):
        cy = -1.0 + (i + 0.5) * step
        for j in range(resolution):
            if mask[i, j] == 0:
                continue
            cx = -1.0 + (j + 0.5) * step
            pk = combine(base_key, i * resolution + j)
            acc = 0.0
            bi = 0
            for widx in range(max_b):
                wk = combine(pk, widx)
                est, _, ov = walk_single(
                    dints, ddbl, kinds, variants, params, family, lam, cx, cy, eps, max_steps, wk
                )
                overflow += ov
                acc += est
                if widx + 1 == budgets[bi]:
                    out[bi, i, j] = acc / (widx + 1)
                    bi += 1
            total += max_b
    return out, overflow, total


def mean_walk_steps(
    dints, ddbl, kinds, variants, params, family, lam,
    px, py, n_walks, base_key, eps, max_steps,
) -> float:
    pk = combine(base_key, 0)
    tot = 0
    for k in range(n_walks):
        wk = combine(pk, k)
        _, steps, _ = walk_single(
            dints, ddbl, kinds, variants, params, family, lam, px, py, eps, max_steps, wk
        )
        tot += steps
    return tot / n_walks
