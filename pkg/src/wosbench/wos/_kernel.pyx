# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk kernel.

A line-for-line transcription of ``_pykernel.py``: identical counter-based
RNG integers, identical floating-point expression order, same libm calls,
so both backends produce bit-identical estimates.  Keep the two files in
sync; the parity suite in tests/test_backends.py enforces it.
"""

from libc.math cimport (atan2, copysign, cos, cosh, exp, fabs, log, sin,
                        sinh, sqrt, tanh, M_PI)
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

import numpy as np

BACKEND_NAME = "compiled"

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef uint64_t GAMMA = (<uint64_t>0x9E3779B9 << 32) | <uint64_t>0x7F4A7C15
cdef uint64_t MIX_C1 = (<uint64_t>0xBF58476D << 32) | <uint64_t>0x1CE4E5B9
cdef uint64_t MIX_C2 = (<uint64_t>0x94D049BB << 32) | <uint64_t>0x133111EB
cdef double EULER_GAMMA = 0.5772156649015329
cdef double ERF_P = 0.3275911
cdef double ERF_A0 = 0.254829592
cdef double ERF_A1 = -0.284496736
cdef double ERF_A2 = 1.421413741
cdef double ERF_A3 = -1.453152027
cdef double ERF_A4 = 1.061405429
cdef double TWO_OVER_SQRT_PI = 1.1283791670955126
cdef double I_SPLIT = 12.0
cdef double K_SPLIT = 7.0
cdef int ASYM_N = 16

cdef double[3] TRI_ANG
cdef double[6] HEX_ANG
TRI_ANG[0] = -M_PI / 2
TRI_ANG[1] = M_PI / 6
TRI_ANG[2] = 5 * M_PI / 6
for _k in range(6):
    HEX_ANG[_k] = _k * M_PI / 3


# -- counter-based RNG -------------------------------------------------------

cdef inline uint64_t c_mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX_C1
    z = (z ^ (z >> 27)) * MIX_C2
    return z ^ (z >> 31)


cdef inline uint64_t c_combine(uint64_t key, uint64_t fieldv) nogil:
    return c_mix64(key ^ c_mix64(fieldv + GAMMA))


cdef inline double c_u01(uint64_t key, uint64_t counter) nogil:
    return <double>(c_mix64(key + (counter + 1) * GAMMA) >> 11) * INV_2_53


def mix64(z):
    return int(c_mix64(<uint64_t>(int(z) & ((1 << 64) - 1))))


def combine(key, fieldv):
    return int(c_combine(<uint64_t>(int(key) & ((1 << 64) - 1)),
                         <uint64_t>(int(fieldv) & ((1 << 64) - 1))))


def u01(key, counter):
    return c_u01(<uint64_t>(int(key) & ((1 << 64) - 1)), <uint64_t>int(counter))


# -- scalar special functions ------------------------------------------------

cdef double c_asym_coeff(int k, int order) nogil:
    cdef double c = 1.0
    cdef double fact = 1.0
    cdef int j
    cdef double odd
    for j in range(1, k + 1):
        odd = <double>(2 * j - 1)
        if order == 0:
            c *= odd * odd
        else:
            c *= 4.0 - odd * odd
        fact *= j
    cdef double p8 = 1.0
    for j in range(k):
        p8 *= 8.0
    return c / (fact * p8)


cdef double c_erf(double x) nogil:
    cdef double sign = -1.0 if x < 0.0 else 1.0
    cdef double ax = fabs(x)
    cdef double t = 1.0 / (1.0 + ERF_P * ax)
    cdef double poly = t * (ERF_A0 + t * (ERF_A1 + t * (ERF_A2 + t * (ERF_A3 + t * ERF_A4))))
    return sign * (1.0 - poly * exp(-ax * ax))


cdef double c_i0(double x) nogil:
    x = fabs(x)
    cdef double t, term, acc, inv, tail
    cdef int m, k
    if x <= I_SPLIT:
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
    for k in range(ASYM_N, 0, -1):
        tail = (tail + c_asym_coeff(k, 0)) * inv
    return exp(x) / sqrt(TWO_PI * x) * (1.0 + tail)


cdef double c_i1(double x) nogil:
    cdef double sign = -1.0 if x < 0.0 else 1.0
    cdef double ax = fabs(x)
    cdef double t, term, acc, inv, tail, c
    cdef int m, k
    if ax <= I_SPLIT:
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
    for k in range(ASYM_N, 0, -1):
        c = c_asym_coeff(k, 1)
        if k % 2 == 1:
            c = -c
        tail = (tail + c) * inv
    return sign * exp(ax) / sqrt(TWO_PI * ax) * (1.0 + tail)


cdef double c_k0(double x) nogil:
    cdef double t, term, harm, acc, inv, tail, c
    cdef int m, k
    if x <= K_SPLIT:
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
        return -(log(0.5 * x) + EULER_GAMMA) * c_i0(x) + acc
    inv = 1.0 / x
    tail = 0.0
    for k in range(ASYM_N, 0, -1):
        c = c_asym_coeff(k, 0)
        if k % 2 == 1:
            c = -c
        tail = (tail + c) * inv
    return sqrt(0.5 * M_PI / x) * exp(-x) * (1.0 + tail)


def erf_s(x):
    return c_erf(float(x))


def i0_s(x):
    return c_i0(float(x))


def i1_s(x):
    return c_i1(float(x))


def k0_s(x):
    return c_k0(float(x))


# -- scalar SDF ---------------------------------------------------------------

cdef double c_prim_sdf(int kind, const double* p, double x, double y) nogil:
    cdef double rx, ry, rho, r, inr, d, e, qx
    cdef int i
    if kind == 0:
        return p[0] - sqrt(x * x + y * y)
    if kind == 1:
        d = p[0] - fabs(x)
        e = p[0] - fabs(y)
        return d if d < e else e
    if kind == 2:
        d = p[0] - fabs(x)
        e = p[1] - fabs(y)
        return d if d < e else e
    if kind == 3:
        rx = p[0]
        ry = p[1]
        rho = sqrt((x / rx) * (x / rx) + (y / ry) * (y / ry))
        return (1.0 - rho) * (rx if rx < ry else ry)
    if kind == 4:
        r = sqrt(x * x + y * y)
        d = p[1] - r
        e = r - p[0]
        return d if d < e else e
    if kind == 5:
        inr = 0.5 * p[0]
        d = 1e300
        for i in range(3):
            e = inr - (cos(TRI_ANG[i]) * x + sin(TRI_ANG[i]) * y)
            if e < d:
                d = e
        return d
    if kind == 6:
        inr = p[0] * sqrt(3.0) / 2.0
        d = 1e300
        for i in range(6):
            e = inr - (cos(HEX_ANG[i]) * x + sin(HEX_ANG[i]) * y)
            if e < d:
                d = e
        return d
    # stadium
    qx = fabs(x) - p[0]
    if qx < 0.0:
        qx = 0.0
    return p[1] - sqrt(qx * qx + y * y)


cdef double c_sdf(const int32_t* dints, const double* ddbl, double x, double y) nogil:
    cdef int kind = dints[0]
    cdef double va, vb, ct, st, dx, dy, lx, ly, nb
    cdef int c
    if kind != 8:
        return c_prim_sdf(kind, ddbl, x, y)
    ct = ddbl[12]
    st = ddbl[13]
    dx = x - ddbl[16]
    dy = y - ddbl[17]
    lx = ct * dx + st * dy
    ly = -st * dx + ct * dy
    va = c_prim_sdf(dints[2], ddbl + 4, lx, ly)
    ct = ddbl[14]
    st = ddbl[15]
    dx = x - ddbl[18]
    dy = y - ddbl[19]
    lx = ct * dx + st * dy
    ly = -st * dx + ct * dy
    vb = c_prim_sdf(dints[3], ddbl + 8, lx, ly)
    if dints[1] == 0:
        return va if va > vb else vb
    if dints[1] == 1:
        return va if va < vb else vb
    nb = -vb
    return va if va < nb else nb


cdef void c_prim_project(int kind, const double* p, double x, double y,
                         double* ox, double* oy) nogil:
    cdef double radius, r, s, a, b, cx, cy, rx, ry, rho, r_in, r_out, target
    cdef double inr, best, bx, by, nx, ny, e, half_len, dx, dy, d
    cdef int i, n_ang
    cdef const double* angles
    if kind == 0:
        radius = p[0]
        r = sqrt(x * x + y * y)
        if r == 0.0:
            ox[0] = radius
            oy[0] = 0.0
            return
        s = radius / r
        ox[0] = x * s
        oy[0] = y * s
        return
    if kind == 1 or kind == 2:
        a = p[0]
        b = p[0] if kind == 1 else p[1]
        if fabs(x) > a or fabs(y) > b:
            cx = x
            if cx < -a:
                cx = -a
            if cx > a:
                cx = a
            cy = y
            if cy < -b:
                cy = -b
            if cy > b:
                cy = b
            ox[0] = cx
            oy[0] = cy
            return
        if a - fabs(x) <= b - fabs(y):
            ox[0] = copysign(a, x) if x != 0.0 else a
            oy[0] = y
        else:
            ox[0] = x
            oy[0] = copysign(b, y) if y != 0.0 else b
        return
    if kind == 3:
        rx = p[0]
        ry = p[1]
        rho = sqrt((x / rx) * (x / rx) + (y / ry) * (y / ry))
        if rho == 0.0:
            ox[0] = rx
            oy[0] = 0.0
            return
        ox[0] = x / rho
        oy[0] = y / rho
        return
    if kind == 4:
        r_in = p[0]
        r_out = p[1]
        r = sqrt(x * x + y * y)
        if r == 0.0:
            ox[0] = r_in
            oy[0] = 0.0
            return
        target = r_out if (r_out - r) <= (r - r_in) else r_in
        s = target / r
        ox[0] = x * s
        oy[0] = y * s
        return
    if kind == 5 or kind == 6:
        if kind == 5:
            inr = 0.5 * p[0]
            angles = TRI_ANG
            n_ang = 3
        else:
            inr = p[0] * sqrt(3.0) / 2.0
            angles = HEX_ANG
            n_ang = 6
        best = 1e300
        bx = x
        by = y
        for i in range(n_ang):
            nx = cos(angles[i])
            ny = sin(angles[i])
            e = inr - (nx * x + ny * y)
            if e < best:
                best = e
                bx = x + e * nx
                by = y + e * ny
        ox[0] = bx
        oy[0] = by
        return
    # stadium
    half_len = p[0]
    radius = p[1]
    cx = x
    if cx < -half_len:
        cx = -half_len
    if cx > half_len:
        cx = half_len
    dx = x - cx
    dy = y
    d = sqrt(dx * dx + dy * dy)
    if d == 0.0:
        ox[0] = cx
        oy[0] = radius
        return
    s = radius / d
    ox[0] = cx + dx * s
    oy[0] = dy * s


cdef void c_project(const int32_t* dints, const double* ddbl, double x, double y,
                    double* ox, double* oy) nogil:
    cdef int kind = dints[0]
    cdef double h = 1e-5
    cdef double s, gx, gy, g2
    cdef int it
    if kind != 8:
        c_prim_project(kind, ddbl, x, y, ox, oy)
        return
    for it in range(64):
        s = c_sdf(dints, ddbl, x, y)
        if fabs(s) <= 1e-6:
            break
        gx = (c_sdf(dints, ddbl, x + h, y) - c_sdf(dints, ddbl, x - h, y)) / (2.0 * h)
        gy = (c_sdf(dints, ddbl, x, y + h) - c_sdf(dints, ddbl, x, y - h)) / (2.0 * h)
        g2 = gx * gx + gy * gy
        if g2 < 1e-12:
            break
        x -= s * gx / g2
        y -= s * gy / g2
    ox[0] = x
    oy[0] = y


# -- scalar atom evaluation ----------------------------------------------------

cdef double c_pf(int idx, double t) nogil:
    if idx == 0:
        return sin(t)
    if idx == 1:
        return cos(t)
    return tanh(t)


cdef double c_pf_d2(int idx, double t) nogil:
    cdef double th
    if idx == 0:
        return -sin(t)
    if idx == 1:
        return -cos(t)
    th = tanh(t)
    return -2.0 * th * (1.0 - th * th)


cdef double c_atom_value(int kind, int variant, const double* p, double x, double y) nogil:
    cdef double re, im, tre, dx, dy, r2, e, chp, chq, s, t, m, u, v, c, out
    cdef int n, i
    if kind == 0:
        return (p[0] + p[1] * x + p[2] * y + p[3] * x * x + p[4] * x * y
                + p[5] * y * y + p[6] * x * x * x + p[7] * x * x * y
                + p[8] * x * y * y + p[9] * y * y * y)
    if kind == 1:
        return p[0] * sin(p[1] * M_PI * x)
    if kind == 2:
        return p[0] * exp(p[1] * x)
    if kind == 3:
        return p[0] * log(x * x + 0.01)
    if kind == 4:
        if variant == 0:
            return p[0] * sinh(x)
        if variant == 1:
            return p[0] * cosh(x)
        return p[0] * tanh(x)
    if kind == 5:
        if variant == 0:
            return p[0] * c_erf(x)
        return p[0] * sqrt(x * x + 0.1)
    if kind == 6 or kind == 20 or kind == 31:
        n = <int>p[1]
        re = 1.0
        im = 0.0
        for i in range(n):
            tre = re * x - im * y
            im = re * y + im * x
            re = tre
        if kind == 6 or variant == 0:
            return p[0] * re
        return p[0] * im
    if kind == 7:
        return p[0] * cos(p[1] * (p[2] * x + p[3] * y))
    if kind == 8:
        return p[0] * c_i0(p[1] * sqrt(x * x + y * y))
    if kind == 9 or kind == 23:
        dx = x - p[1]
        dy = y - p[2]
        return p[0] * 0.5 * log(dx * dx + dy * dy)
    if kind == 10 or kind == 18:
        dx = x - p[2]
        dy = y - p[3]
        return p[0] * exp(-p[1] * (dx * dx + dy * dy))
    if kind == 11:
        return p[0] / (1.0 + p[1] * x * x + p[2] * y * y)
    if kind == 12:
        return p[0] * c_pf(variant / 3, p[1] * x) * c_pf(variant % 3, p[2] * y)
    if kind == 13:
        n = <int>p[0]
        out = 0.0
        for i in range(n):
            dx = x - p[3 + 4 * i]
            dy = y - p[4 + 4 * i]
            out += p[1 + 4 * i] * exp(-p[2 + 4 * i] * (dx * dx + dy * dy))
        return out
    if kind == 14 or kind == 17:
        return p[0] * sin(p[1] * M_PI * x) * cos(p[2] * M_PI * y)
    if kind == 15:
        s = p[1] * x
        t = p[2] * y
        m = s if s > t else t
        return p[0] * (m + log(exp(s - m) + exp(t - m)))
    if kind == 16:
        chp = cosh(p[1] * (x - p[3]))
        chq = cosh(p[2] * (y - p[4]))
        return p[0] / (chp * chp * chq * chq)
    if kind == 19:
        return p[0] * tanh(p[1] * (p[2] * x + p[3] * y - p[4]))
    if kind == 21 or kind == 30:
        e = exp(p[1] * x)
        if variant == 0:
            return p[0] * e * cos(p[1] * y)
        return p[0] * e * sin(p[1] * y)
    if kind == 22:
        if variant == 0 or variant == 1:
            e = sin(p[1] * x)
        else:
            e = cos(p[1] * x)
        if variant == 0 or variant == 2:
            t = sinh(p[1] * y)
        else:
            t = cosh(p[1] * y)
        return p[0] * e * t
    if kind == 24:
        return p[0] * x + p[1] * y
    if kind == 25:
        return p[0] * x * y
    if kind == 26:
        return p[0] * atan2(p[4] * x + p[5] * y + p[6], p[1] * x + p[2] * y + p[3])
    if kind == 27:
        dx = x - p[1]
        dy = y - p[2]
        return p[0] * dx / (dx * dx + dy * dy)
    if kind == 28:
        dx = x - p[1]
        dy = y - p[2]
        r2 = dx * dx + dy * dy
        return p[0] * (dx * dx - dy * dy) / (r2 * r2)
    if kind == 29:
        c = p[1]
        s = p[2]
        u = c * x + s * y
        v = -s * x + c * y
        if variant == 0:
            return p[0] * (u * u - v * v)
        return p[0] * 2.0 * u * v
    return 0.0


cdef double c_atom_lap(int kind, int variant, const double* p, double x, double y) nogil:
    cdef double w, d, t, s2, dx, dy, s, b, c, sig, tp, tq, chp, chq, sp, sq
    cdef double d2p, d2q, al, be, k1, k2, out
    cdef int n, i
    if kind >= 20 or kind == 6 or kind == 9:
        return 0.0
    if kind == 0:
        return (2.0 * p[3] + 2.0 * p[5] + 6.0 * p[6] * x + 2.0 * p[7] * y
                + 2.0 * p[8] * x + 6.0 * p[9] * y)
    if kind == 1:
        w = p[1] * M_PI
        return -(w * w) * p[0] * sin(w * x)
    if kind == 2:
        return p[1] * p[1] * p[0] * exp(p[1] * x)
    if kind == 3:
        d = x * x + 0.01
        return 2.0 * p[0] * (0.01 - x * x) / (d * d)
    if kind == 4:
        if variant == 0:
            return p[0] * sinh(x)
        if variant == 1:
            return p[0] * cosh(x)
        t = tanh(x)
        return -2.0 * p[0] * t * (1.0 - t * t)
    if kind == 5:
        if variant == 0:
            return -2.0 * p[0] * TWO_OVER_SQRT_PI * x * exp(-x * x)
        s2 = x * x + 0.1
        return p[0] * 0.1 / (s2 * sqrt(s2))
    if kind == 7:
        return -(p[1] * p[1]) * p[0] * cos(p[1] * (p[2] * x + p[3] * y))
    if kind == 8:
        return p[1] * p[1] * p[0] * c_i0(p[1] * sqrt(x * x + y * y))
    if kind == 10 or kind == 18:
        dx = x - p[2]
        dy = y - p[3]
        s = dx * dx + dy * dy
        w = p[1]
        return p[0] * exp(-w * s) * (4.0 * w * w * s - 4.0 * w)
    if kind == 11:
        b = p[1]
        c = p[2]
        d = 1.0 + b * x * x + c * y * y
        return -2.0 * p[0] * (b + c) / (d * d) + 8.0 * p[0] * (b * b * x * x + c * c * y * y) / (d * d * d)
    if kind == 12:
        k1 = p[1]
        k2 = p[2]
        return p[0] * (k1 * k1 * c_pf_d2(variant / 3, k1 * x) * c_pf(variant % 3, k2 * y)
                       + k2 * k2 * c_pf(variant / 3, k1 * x) * c_pf_d2(variant % 3, k2 * y))
    if kind == 13:
        n = <int>p[0]
        out = 0.0
        for i in range(n):
            dx = x - p[3 + 4 * i]
            dy = y - p[4 + 4 * i]
            s = dx * dx + dy * dy
            w = p[2 + 4 * i]
            out += p[1 + 4 * i] * exp(-w * s) * (4.0 * w * w * s - 4.0 * w)
        return out
    if kind == 14 or kind == 17:
        al = p[1] * M_PI
        be = p[2] * M_PI
        return -(al * al + be * be) * p[0] * sin(al * x) * cos(be * y)
    if kind == 15:
        b = p[1]
        c = p[2]
        sig = 1.0 / (1.0 + exp(-(b * x - c * y)))
        return p[0] * (b * b + c * c) * sig * (1.0 - sig)
    if kind == 16:
        b = p[1]
        c = p[2]
        tp = tanh(b * (x - p[3]))
        tq = tanh(c * (y - p[4]))
        chp = cosh(b * (x - p[3]))
        chq = cosh(c * (y - p[4]))
        sp = 1.0 / (chp * chp)
        sq = 1.0 / (chq * chq)
        d2p = sp * (6.0 * tp * tp - 2.0)
        d2q = sq * (6.0 * tq * tq - 2.0)
        return p[0] * (b * b * d2p * sq + c * c * sp * d2q)
    if kind == 19:
        t = tanh(p[1] * (p[2] * x + p[3] * y - p[4]))
        return -2.0 * p[0] * p[1] * p[1] * t * (1.0 - t * t)
    return 0.0


cdef double c_sol_value(const int32_t* kinds, const int32_t* variants,
                        const double* params, int n_atoms, double x, double y) nogil:
    cdef double out = 0.0
    cdef int i
    for i in range(n_atoms):
        out += c_atom_value(kinds[i], variants[i], params + 24 * i, x, y)
    return out


cdef double c_forcing(int family, double lam, const int32_t* kinds,
                      const int32_t* variants, const double* params,
                      int n_atoms, double x, double y) nogil:
    cdef double lap = 0.0
    cdef int i
    for i in range(n_atoms):
        lap += c_atom_lap(kinds[i], variants[i], params + 24 * i, x, y)
    if family == 1:
        return lap
    return lap - lam * c_sol_value(kinds, variants, params, n_atoms, x, y)


# -- the walk ------------------------------------------------------------------

cdef double c_walk(const int32_t* dints, const double* ddbl,
                   const int32_t* kinds, const int32_t* variants,
                   const double* params, int n_atoms, int family, double lam,
                   double x0, double y0, double eps, int max_steps,
                   uint64_t wkey, int* out_steps, int* out_overflow) nogil:
    cdef double x = x0
    cdef double y = y0
    cdef double acc = 0.0
    cdef double w = 1.0
    cdef uint64_t counter = 0
    cdef int steps = 0
    cdef int overflow = 0
    cdef double mu = sqrt(lam) if family == 2 else 0.0
    cdef double r_ball, u1, u2, th, rs, sx, sy, fv, re, i0R, k0R, green, g0, ratio, phi
    cdef double px, py, g
    while True:
        r_ball = c_sdf(dints, ddbl, x, y)
        if r_ball < eps:
            break
        if steps >= max_steps:
            overflow = 1
            break
        if family == 1:
            u1 = c_u01(wkey, counter)
            u2 = c_u01(wkey, counter + 1)
            th = TWO_PI * c_u01(wkey, counter + 2)
            counter += 3
            rs = r_ball * sqrt(u1 * u2)
            sx = x + rs * cos(th)
            sy = y + rs * sin(th)
            fv = c_forcing(family, lam, kinds, variants, params, n_atoms, sx, sy)
            acc -= 0.25 * r_ball * r_ball * fv
        elif family == 2:
            # yukawa: importance-sample from the unscreened Green density
            # (mass R^2/4) and reweight by the screened/unscreened ratio;
            # the ratio is bounded and matches the log singularity exactly
            u1 = c_u01(wkey, counter)
            u2 = c_u01(wkey, counter + 1)
            th = TWO_PI * c_u01(wkey, counter + 2)
            counter += 3
            rs = r_ball * sqrt(u1 * u2)
            re = rs if rs > r_ball * 1e-12 else r_ball * 1e-12
            sx = x + rs * cos(th)
            sy = y + rs * sin(th)
            i0R = c_i0(mu * r_ball)
            k0R = c_k0(mu * r_ball)
            green = c_k0(mu * re) - k0R * c_i0(mu * re) / i0R
            g0 = log(r_ball / re)
            ratio = green / g0 if g0 > 0.0 else 0.0
            fv = c_forcing(family, lam, kinds, variants, params, n_atoms, sx, sy)
            acc -= w * 0.25 * r_ball * r_ball * ratio * fv
            w /= i0R
        phi = TWO_PI * c_u01(wkey, counter)
        counter += 1
        x += r_ball * cos(phi)
        y += r_ball * sin(phi)
        steps += 1
    c_project(dints, ddbl, x, y, &px, &py)
    g = c_sol_value(kinds, variants, params, n_atoms, px, py)
    out_steps[0] = steps
    out_overflow[0] = overflow
    return acc + w * g


# -- python entry points ---------------------------------------------------------


def walk_single(int32_t[::1] dints, double[::1] ddbl, int32_t[::1] kinds,
                int32_t[::1] variants, double[:, ::1] params, int family,
                double lam, double x0, double y0, double eps, int max_steps,
                wkey):
    cdef int steps = 0
    cdef int overflow = 0
    cdef uint64_t k = <uint64_t>(int(wkey) & ((1 << 64) - 1))
    cdef double est = c_walk(&dints[0], &ddbl[0], &kinds[0], &variants[0],
                             &params[0, 0], <int>kinds.shape[0], family, lam,
                             x0, y0, eps, max_steps, k, &steps, &overflow)
    return est, steps, overflow


def estimate_point_kernel(int32_t[::1] dints, double[::1] ddbl, int32_t[::1] kinds,
                          int32_t[::1] variants, double[:, ::1] params, int family,
                          double lam, double px, double py, int n_walks,
                          base_key, int point_tag, double eps, int max_steps):
    cdef uint64_t bk = <uint64_t>(int(base_key) & ((1 << 64) - 1))
    cdef uint64_t pk = c_combine(bk, <uint64_t>point_tag)
    cdef double mean = 0.0
    cdef double m2 = 0.0
    cdef double est, delta
    cdef int overflow = 0
    cdef int steps = 0
    cdef int ov = 0
    cdef int k
    cdef int n_atoms = <int>kinds.shape[0]
    with nogil:
        for k in range(n_walks):
            est = c_walk(&dints[0], &ddbl[0], &kinds[0], &variants[0],
                         &params[0, 0], n_atoms, family, lam, px, py,
                         eps, max_steps, c_combine(pk, <uint64_t>k), &steps, &ov)
            overflow += ov
            delta = est - mean
            mean += delta / (k + 1)
            m2 += delta * (est - mean)
    cdef double var = m2 / (n_walks - 1) if n_walks > 1 else 0.0
    return mean, var, overflow


def solve_grid_kernel(int32_t[::1] dints, double[::1] ddbl, int32_t[::1] kinds,
                      int32_t[::1] variants, double[:, ::1] params, int family,
                      double lam, uint8_t[:, ::1] mask, int64_t[::1] budgets,
                      base_key, double eps, int max_steps, int resolution):
    cdef int nb = <int>budgets.shape[0]
    out_arr = np.zeros((nb, resolution, resolution), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef uint64_t bk = <uint64_t>(int(base_key) & ((1 << 64) - 1))
    cdef int64_t max_b = budgets[nb - 1]
    cdef double step = 2.0 / resolution
    cdef long long overflow = 0
    cdef long long total = 0
    cdef double cx, cy, acc, est
    cdef uint64_t pk
    cdef int i, j, bi, steps, ov
    cdef int64_t widx
    cdef int n_atoms = <int>kinds.shape[0]
    with nogil:
        for i in range(resolution):
            cy = -1.0 + (i + 0.5) * step
            for j in range(resolution):
                if mask[i, j] == 0:
                    continue
                cx = -1.0 + (j + 0.5) * step
                pk = c_combine(bk, <uint64_t>(i * resolution + j))
                acc = 0.0
                bi = 0
                for widx in range(max_b):
                    est = c_walk(&dints[0], &ddbl[0], &kinds[0], &variants[0],
                                 &params[0, 0], n_atoms, family, lam, cx, cy,
                                 eps, max_steps, c_combine(pk, <uint64_t>widx),
                                 &steps, &ov)
                    overflow += ov
                    acc += est
                    if widx + 1 == budgets[bi]:
                        out[bi, i, j] = <float>(acc / (widx + 1))
                        bi += 1
                total += max_b
    return out_arr, int(overflow), int(total)


def mean_walk_steps(int32_t[::1] dints, double[::1] ddbl, int32_t[::1] kinds,
                    int32_t[::1] variants, double[:, ::1] params, int family,
                    double lam, double px, double py, int n_walks, base_key,
                    double eps, int max_steps):
    cdef uint64_t bk = <uint64_t>(int(base_key) & ((1 << 64) - 1))
    cdef uint64_t pk = c_combine(bk, <uint64_t>0)
    cdef long long tot = 0
    cdef int steps = 0
    cdef int ov = 0
    cdef int k
    cdef int n_atoms = <int>kinds.shape[0]
    with nogil:
        for k in range(n_walks):
            c_walk(&dints[0], &ddbl[0], &kinds[0], &variants[0], &params[0, 0],
                   n_atoms, family, lam, px, py, eps, max_steps,
                   c_combine(pk, <uint64_t>k), &steps, &ov)
            tot += steps
    return tot / <double>n_walks


def sdf_point(int32_t[::1] dints, double[::1] ddbl, double x, double y):
    return c_sdf(&dints[0], &ddbl[0], x, y)


def atom_value_point(int kind, int variant, double[::1] p, double x, double y):
    return c_atom_value(kind, variant, &p[0], x, y)


def atom_lap_point(int kind, int variant, double[::1] p, double x, double y):
    return c_atom_lap(kind, variant, &p[0], x, y)
