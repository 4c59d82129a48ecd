"""Implicit 2D domains: signed distance functions, Boolean composition,
boundary projection, and point sampling.

Sign convention is positive inside.  Every SDF is conservative: it never
overestimates the distance to the boundary from an interior point, so a
sphere of radius sdf(x) around an interior x is always contained in the
domain.  Primitive SDFs are exact except the ellipse, which uses the
normalized radial underestimate (1 - |x/r|) * min(rx, ry); composed SDFs
use max/min combination and are underestimates near reentrant features.

All evaluators are vectorized over a trailing point axis and pure;
``Domain`` values are immutable and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rng import RngStream

PRIMITIVE_KINDS = (
    "disk",
    "square",
    "rectangle",
    "ellipse",
    "annulus",
    "triangle",
    "hexagon",
    "stadium",
)
COMPOSED_CHILD_KINDS = ("disk", "rectangle", "ellipse", "triangle")
BOOLEAN_OPS = ("union", "intersection", "difference")

# Parameter ranges used by the domain sampler.
PARAM_RANGES = {
    "disk": {"radius": (1.0, 1.0)},
    "square": {"half": (1.0, 1.0)},
    "rectangle": {"a": (0.6, 1.2), "b": (0.6, 1.2)},
    "ellipse": {"rx": (0.6, 1.2), "ry": (0.6, 1.2)},
    "annulus": {"r_in": (0.2, 0.6), "r_out": (0.8, 1.4)},
    "triangle": {"circumradius": (0.6, 1.0)},
    "hexagon": {"circumradius": (0.6, 1.0)},
    "stadium": {"half_len": (0.2, 0.6), "radius": (0.25, 0.5)},
}
SEPARATION_RANGE = (0.15, 0.55)
COMPOSED_BBOX_PAD = 0.05

PROJECTION_TOL = 1e-6
_PROJECTION_MAX_ITERS = 64
_GRAD_H = 1e-5


class ProjectionDidNotConverge(Exception):
    """Iterative boundary projection failed to reach |sdf| <= tolerance."""


class EmptyDomain(Exception):
    """Rejection sampling found no interior point within the proposal cap."""


@dataclass(frozen=True)
class Domain:
    """An implicit domain; ``composed`` combines two transformed children.

    For composed domains, each child i is evaluated in its own frame:
    p_local = R(-rotations[i]) @ (p - offsets[i]).
    """

    kind: str
    params: tuple[float, ...] = ()
    children: Optional[tuple["Domain", "Domain"]] = None
    op: Optional[str] = None
    rotations: Optional[tuple[float, float]] = None
    offsets: Optional[tuple[tuple[float, float], tuple[float, float]]] = None

    def __post_init__(self):
        if self.kind == "composed":
            if self.children is None or self.op not in BOOLEAN_OPS:
                raise ValueError("composed domain needs two children and a Boolean op")
            if any(c.kind not in PRIMITIVE_KINDS for c in self.children):
                raise ValueError("composed children must be primitives")
        elif self.kind not in PRIMITIVE_KINDS:
            raise ValueError(f"unknown domain kind: {self.kind}")

    # -- serialization -------------------------------------------------
    def to_json_dict(self) -> dict:
        out = {"kind": self.kind, "params": list(self.params)}
        if self.kind == "composed":
            out["children"] = [c.to_json_dict() for c in self.children]
            out["op"] = self.op
            out["rotations"] = list(self.rotations)
            out["offsets"] = [list(o) for o in self.offsets]
        return out

    @staticmethod
    def from_json_dict(d: dict) -> "Domain":
        if d["kind"] == "composed":
            kids = tuple(Domain.from_json_dict(c) for c in d["children"])
            return Domain(
                kind="composed",
                params=tuple(d.get("params", ())),
                children=kids,
                op=d["op"],
                rotations=tuple(d["rotations"]),
                offsets=tuple(tuple(o) for o in d["offsets"]),
            )
        return Domain(kind=d["kind"], params=tuple(d["params"]))

    def bbox(self) -> tuple[float, float, float, float]:
        """Axis-aligned (xmin, xmax, ymin, ymax) containing {sdf >= 0}."""
        return _bbox(self)


# -- SDF evaluation ------------------------------------------------------

_TRIANGLE_NORMAL_ANGLES = (-math.pi / 2, math.pi / 6, 5 * math.pi / 6)
_HEXAGON_NORMAL_ANGLES = tuple(k * math.pi / 3 for k in range(6))


def _primitive_sdf(kind: str, params, x, y):
    if kind == "disk":
        (radius,) = params
        return radius - np.sqrt(x * x + y * y)
    if kind == "square":
        (half,) = params
        return np.minimum(half - np.abs(x), half - np.abs(y))
    if kind == "rectangle":
        a, b = params
        return np.minimum(a - np.abs(x), b - np.abs(y))
    if kind == "ellipse":
        rx, ry = params
        rho = np.sqrt((x / rx) ** 2 + (y / ry) ** 2)
        return (1.0 - rho) * min(rx, ry)
    if kind == "annulus":
        r_in, r_out = params
        r = np.sqrt(x * x + y * y)
        return np.minimum(r_out - r, r - r_in)
    if kind == "triangle":
        (cr,) = params
        inr = 0.5 * cr
        d = None
        for ang in _TRIANGLE_NORMAL_ANGLES:
            e = inr - (math.cos(ang) * x + math.sin(ang) * y)
            d = e if d is None else np.minimum(d, e)
        return d
    if kind == "hexagon":
        (cr,) = params
        inr = cr * math.sqrt(3.0) / 2.0
        d = None
        for ang in _HEXAGON_NORMAL_ANGLES:
            e = inr - (math.cos(ang) * x + math.sin(ang) * y)
            d = e if d is None else np.minimum(d, e)
        return d
    if kind == "stadium":
        half_len, radius = params
        qx = np.maximum(np.abs(x) - half_len, 0.0)
        return radius - np.sqrt(qx * qx + y * y)
    raise ValueError(f"unknown primitive kind: {kind}")


def sdf_eval(domain: Domain, points):
    """Signed distance (positive inside) at points of shape (..., 2)."""
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    x, y = pts[..., 0], pts[..., 1]
    if domain.kind != "composed":
        out = _primitive_sdf(domain.kind, domain.params, x, y)
    else:
        vals = []
        for child, theta, off in zip(domain.children, domain.rotations, domain.offsets):
            ct, st = math.cos(theta), math.sin(theta)
            dx, dy = x - off[0], y - off[1]
            lx = ct * dx + st * dy
            ly = -st * dx + ct * dy
            vals.append(_primitive_sdf(child.kind, child.params, lx, ly))
        a, b = vals
        if domain.op == "union":
            out = np.maximum(a, b)
        elif domain.op == "intersection":
            out = np.minimum(a, b)
        else:
            out = np.minimum(a, -b)
    return float(out[0]) if scalar else out


# -- bounding boxes -------------------------------------------------------


def _primitive_bbox(kind: str, params) -> tuple[float, float, float, float]:
    if kind == "disk":
        (r,) = params
        return (-r, r, -r, r)
    if kind == "square":
        (h,) = params
        return (-h, h, -h, h)
    if kind == "rectangle":
        a, b = params
        return (-a, a, -b, b)
    if kind == "ellipse":
        rx, ry = params
        return (-rx, rx, -ry, ry)
    if kind == "annulus":
        _, r_out = params
        return (-r_out, r_out, -r_out, r_out)
    if kind in ("triangle", "hexagon"):
        (cr,) = params
        return (-cr, cr, -cr, cr)
    if kind == "stadium":
        half_len, radius = params
        return (-(half_len + radius), half_len + radius, -radius, radius)
    raise ValueError(kind)


def _bbox(domain: Domain) -> tuple[float, float, float, float]:
    if domain.kind != "composed":
        return _primitive_bbox(domain.kind, domain.params)
    boxes = []
    for child, theta, off in zip(domain.children, domain.rotations, domain.offsets):
        xmin, xmax, ymin, ymax = _primitive_bbox(child.kind, child.params)
        corners = np.array(
            [[xmin, ymin], [xmin, ymax], [xmax, ymin], [xmax, ymax]], dtype=np.float64
        )
        ct, st = math.cos(theta), math.sin(theta)
        rot = np.array([[ct, -st], [st, ct]])
        world = corners @ rot.T + np.asarray(off)
        boxes.append((world[:, 0].min(), world[:, 0].max(), world[:, 1].min(), world[:, 1].max()))
    pad = COMPOSED_BBOX_PAD
    return (
        min(b[0] for b in boxes) - pad,
        max(b[1] for b in boxes) + pad,
        min(b[2] for b in boxes) - pad,
        max(b[3] for b in boxes) + pad,
    )


# -- boundary projection --------------------------------------------------


def _project_primitive(kind: str, params, x: float, y: float) -> tuple[float, float]:
    if kind == "disk":
        (radius,) = params
        r = math.hypot(x, y)
        if r == 0.0:
            return (radius, 0.0)
        s = radius / r
        return (x * s, y * s)
    if kind in ("square", "rectangle"):
        if kind == "square":
            a = b = params[0]
        else:
            a, b = params
        inside = abs(x) <= a and abs(y) <= b
        if not inside:
            return (min(max(x, -a), a), min(max(y, -b), b))
        if a - abs(x) <= b - abs(y):
            return (math.copysign(a, x) if x != 0.0 else a, y)
        return (x, math.copysign(b, y) if y != 0.0 else b)
    if kind == "ellipse":
        rx, ry = params
        rho = math.hypot(x / rx, y / ry)
        if rho == 0.0:
            return (rx, 0.0)
        return (x / rho, y / rho)
    if kind == "annulus":
        r_in, r_out = params
        r = math.hypot(x, y)
        if r == 0.0:
            return (r_in, 0.0)
        target = r_out if (r_out - r) <= (r - r_in) else r_in
        s = target / r
        return (x * s, y * s)
    if kind in ("triangle", "hexagon"):
        (cr,) = params
        if kind == "triangle":
            inr, angles = 0.5 * cr, _TRIANGLE_NORMAL_ANGLES
        else:
            inr, angles = cr * math.sqrt(3.0) / 2.0, _HEXAGON_NORMAL_ANGLES
        best, bx, by = None, x, y
        for ang in angles:
            nx, ny = math.cos(ang), math.sin(ang)
            e = inr - (nx * x + ny * y)
            if best is None or e < best:
                best = e
                bx, by = x + e * nx, y + e * ny
        return (bx, by)
    if kind == "stadium":
        half_len, radius = params
        cx = min(max(x, -half_len), half_len)
        dx, dy = x - cx, y
        d = math.hypot(dx, dy)
        if d == 0.0:
            return (cx, radius)
        s = radius / d
        return (cx + dx * s, dy * s)
    raise ValueError(kind)


def _numeric_gradient(domain: Domain, x: float, y: float) -> tuple[float, float]:
    h = _GRAD_H
    pts = np.array([[x + h, y], [x - h, y], [x, y + h], [x, y - h]])
    s = sdf_eval(domain, pts)
    return ((s[0] - s[1]) / (2 * h), (s[2] - s[3]) / (2 * h))


def project_to_boundary(domain: Domain, point) -> np.ndarray:
    """Nearest-boundary projection; |sdf(result)| <= 1e-6 or raises."""
    x, y = float(point[0]), float(point[1])
    if domain.kind != "composed":
        q = _project_primitive(domain.kind, domain.params, x, y)
        return np.array(q, dtype=np.float64)
    # Newton steps along the numerical SDF gradient.
    for _ in range(_PROJECTION_MAX_ITERS):
        s = sdf_eval(domain, np.array([x, y]))
        if abs(s) <= PROJECTION_TOL:
            return np.array([x, y])
        gx, gy = _numeric_gradient(domain, x, y)
        g2 = gx * gx + gy * gy
        if g2 < 1e-12:
            break
        x -= s * gx / g2
        y -= s * gy / g2
    raise ProjectionDidNotConverge(
        f"|sdf| > {PROJECTION_TOL} after {_PROJECTION_MAX_ITERS} iterations"
    )


# -- sampling -------------------------------------------------------------

_MAX_PROPOSAL_FACTOR = 64


def sample_interior(domain: Domain, rng: RngStream, n: int) -> tuple[np.ndarray, int]:
    """Uniform interior points by bbox rejection.

    Returns (points, n_proposals).  Up to 64*n proposals are made; raises
    EmptyDomain when none is accepted.  May return fewer than n points for
    very thin domains; callers treat that as a quality signal.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xmin, xmax, ymin, ymax = domain.bbox()
    cap = _MAX_PROPOSAL_FACTOR * n
    accepted = []
    n_acc = 0
    proposals = 0
    while proposals < cap and n_acc < n:
        # propose exactly what is still needed so the proposal count
        # reflects the true acceptance rate (the domain-interior filter
        # and area-ratio estimates rely on it)
        m = min(max(n - n_acc, 16), cap - proposals)
        u = rng.u01_array(2 * m)
        px = xmin + (xmax - xmin) * u[0::2]
        py = ymin + (ymax - ymin) * u[1::2]
        pts = np.stack([px, py], axis=-1)
        keep = sdf_eval(domain, pts) > 0.0
        take = pts[keep]
        proposals += m
        if take.shape[0]:
            accepted.append(take[: n - n_acc])
            n_acc += min(take.shape[0], n - n_acc)
    if n_acc == 0:
        raise EmptyDomain(f"no interior point in {cap} proposals")
    return np.concatenate(accepted, axis=0), proposals


def _primitive_boundary(kind: str, params, u: np.ndarray) -> np.ndarray:
    """Map uniform u in [0,1) onto the primitive boundary (perimeter-uniform
    for polygons/rectangles; angle-uniform for curved shapes)."""
    if kind == "disk":
        (r,) = params
        th = 2 * np.pi * u
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    if kind in ("square", "rectangle"):
        a = b = params[0]
        if kind == "rectangle":
            a, b = params
        per = 4 * (a + b)
        t = u * per
        out = np.empty((u.shape[0], 2))
        for i, ti in enumerate(t):
            if ti < 2 * a:
                out[i] = (-a + ti, -b)
            elif ti < 2 * a + 2 * b:
                out[i] = (a, -b + (ti - 2 * a))
            elif ti < 4 * a + 2 * b:
                out[i] = (a - (ti - 2 * a - 2 * b), b)
            else:
                out[i] = (-a, b - (ti - 4 * a - 2 * b))
        return out
    if kind == "ellipse":
        rx, ry = params
        th = 2 * np.pi * u
        return np.stack([rx * np.cos(th), ry * np.sin(th)], axis=-1)
    if kind == "annulus":
        r_in, r_out = params
        p_out = r_out / (r_in + r_out)  # pick circles by circumference
        radii = np.where(u < p_out, r_out, r_in)
        th = np.where(
            u < p_out,
            2 * np.pi * (u / p_out),
            2 * np.pi * ((u - p_out) / (1.0 - p_out)),
        )
        return np.stack([radii * np.cos(th), radii * np.sin(th)], axis=-1)
    if kind in ("triangle", "hexagon"):
        (cr,) = params
        if kind == "triangle":
            k = 3
            verts = [
                (cr * math.cos(math.pi / 2 + 2 * math.pi * i / 3),
                 cr * math.sin(math.pi / 2 + 2 * math.pi * i / 3))
                for i in range(3)
            ]
        else:
            k = 6
            verts = [
                (cr * math.cos(math.pi / 6 + 2 * math.pi * i / 6),
                 cr * math.sin(math.pi / 6 + 2 * math.pi * i / 6))
                for i in range(6)
            ]
        t = u * k
        edge = np.minimum(t.astype(np.int64), k - 1)
        frac = t - edge
        out = np.empty((u.shape[0], 2))
        for i in range(u.shape[0]):
            v0 = verts[edge[i]]
            v1 = verts[(edge[i] + 1) % k]
            out[i] = (
                v0[0] + frac[i] * (v1[0] - v0[0]),
                v0[1] + frac[i] * (v1[1] - v0[1]),
            )
        return out
    if kind == "stadium":
        half_len, radius = params
        per = 2 * (2 * half_len) + 2 * np.pi * radius
        t = u * per
        out = np.empty((u.shape[0], 2))
        for i, ti in enumerate(t):
            if ti < 2 * half_len:
                out[i] = (-half_len + ti, -radius)
            elif ti < 2 * half_len + np.pi * radius:
                ang = -np.pi / 2 + (ti - 2 * half_len) / radius
                out[i] = (half_len + radius * np.cos(ang), radius * np.sin(ang))
            elif ti < 4 * half_len + np.pi * radius:
                out[i] = (half_len - (ti - 2 * half_len - np.pi * radius), radius)
            else:
                ang = np.pi / 2 + (ti - 4 * half_len - np.pi * radius) / radius
                out[i] = (-half_len + radius * np.cos(ang), radius * np.sin(ang))
        return out
    raise ValueError(kind)


def sample_boundary(domain: Domain, rng: RngStream, n: int) -> np.ndarray:
    """n points on the boundary (|sdf| <= 1e-9).

    For composed domains this keeps child-boundary points that remain on
    the composed boundary; very thin compositions may raise EmptyDomain.
    """
    if domain.kind != "composed":
        u = rng.u01_array(n)
        return _primitive_boundary(domain.kind, domain.params, u)
    out = []
    n_found = 0
    for _ in range(_MAX_PROPOSAL_FACTOR):
        m = max(n, 32)
        u = rng.u01_array(m)
        which = rng.u01_array(m) < 0.5
        pts = np.empty((m, 2))
        for idx, (child, theta, off) in enumerate(
            zip(domain.children, domain.rotations, domain.offsets)
        ):
            sel = which if idx == 0 else ~which
            if not np.any(sel):
                continue
            local = _primitive_boundary(child.kind, child.params, u[sel])
            ct, st = math.cos(theta), math.sin(theta)
            rot = np.array([[ct, -st], [st, ct]])
            pts[sel] = local @ rot.T + np.asarray(off)
        keep = np.abs(sdf_eval(domain, pts)) <= 1e-9
        found = pts[keep]
        if found.shape[0]:
            out.append(found[: n - n_found])
            n_found += min(found.shape[0], n - n_found)
        if n_found >= n:
            return np.concatenate(out, axis=0)
    if n_found == 0:
        raise EmptyDomain("no boundary point survived composition")
    return np.concatenate(out, axis=0)


def dense_boundary(domain: Domain, n: int) -> np.ndarray:
    """Evenly spaced boundary points (worst-case gap = perimeter / n).

    For composed domains each child contributes n evenly spaced candidates
    and the points remaining on the composed boundary are returned.
    """
    u = (np.arange(n) + 0.5) / n
    if domain.kind != "composed":
        return _primitive_boundary(domain.kind, domain.params, u)
    out = []
    for child, theta, off in zip(domain.children, domain.rotations, domain.offsets):
        local = _primitive_boundary(child.kind, child.params, u)
        ct, st = math.cos(theta), math.sin(theta)
        rot = np.array([[ct, -st], [st, ct]])
        world = local @ rot.T + np.asarray(off)
        keep = np.abs(sdf_eval(domain, world)) <= 1e-9
        out.append(world[keep])
    pts = np.concatenate(out, axis=0)
    if pts.shape[0] == 0:
        raise EmptyDomain("no boundary point survived composition")
    return pts


# -- grids ----------------------------------------------------------------


def grid_points(resolution: int) -> np.ndarray:
    """Pixel-center coordinates over [-1,1]^2, shape (res, res, 2).

    Index [i, j] maps to (x_j, y_i); centers never lie exactly on the unit
    square's boundary.
    """
    step = 2.0 / resolution
    coords = -1.0 + (np.arange(resolution) + 0.5) * step
    xx, yy = np.meshgrid(coords, coords)
    return np.stack([xx, yy], axis=-1)


def grid_mask(domain: Domain, resolution: int) -> np.ndarray:
    """float32 indicator of sdf > 0 at pixel centers."""
    pts = grid_points(resolution)
    return (sdf_eval(domain, pts) > 0.0).astype(np.float32)


# -- domain sampling ------------------------------------------------------


def _sample_primitive(kind: str, rng: RngStream) -> Domain:
    ranges = PARAM_RANGES[kind]
    params = tuple(rng.uniform(lo, hi) for lo, hi in ranges.values())
    return Domain(kind=kind, params=params)


def sample_domain(rng: RngStream) -> Domain:
    """Domain sampler: each primitive w.p. 1/11, composed w.p. 3/11."""
    idx = rng.choice_weighted([1.0] * len(PRIMITIVE_KINDS) + [3.0])
    if idx < len(PRIMITIVE_KINDS):
        return _sample_primitive(PRIMITIVE_KINDS[idx], rng)
    op = BOOLEAN_OPS[rng.choice_weighted([3.0, 2.0, 2.0])]
    kids = tuple(
        _sample_primitive(COMPOSED_CHILD_KINDS[rng.randint(len(COMPOSED_CHILD_KINDS))], rng)
        for _ in range(2)
    )
    rotations = (rng.uniform(0.0, 2 * math.pi), rng.uniform(0.0, 2 * math.pi))
    sep = rng.uniform(*SEPARATION_RANGE)
    ang = rng.uniform(0.0, 2 * math.pi)
    ux, uy = math.cos(ang), math.sin(ang)
    offsets = ((0.5 * sep * ux, 0.5 * sep * uy), (-0.5 * sep * ux, -0.5 * sep * uy))
    return Domain(
        kind="composed",
        children=kids,
        op=op,
        rotations=rotations,
        offsets=offsets,
    )
