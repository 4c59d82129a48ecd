import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wosbench import geometry as geo
from wosbench.rng import RngStream


def make_union_disks(offset=0.3):
    return geo.Domain(
        "composed",
        children=(geo.Domain("disk", (1.0,)), geo.Domain("disk", (1.0,))),
        op="union",
        rotations=(0.0, 0.0),
        offsets=((offset, 0.0), (-offset, 0.0)),
    )


def sample_domains(n, seed=0):
    rng = RngStream.from_seed(seed)
    return [geo.sample_domain(rng.substream(i)) for i in range(n)]


def brute_boundary_distance(domain, points, n_boundary=4096, seed=123):
    b = geo.dense_boundary(domain, n_boundary)
    d = np.linalg.norm(points[:, None, :] - b[None, :, :], axis=-1)
    return d.min(axis=1)


# -- sdf examples -----------------------------------------------------------


def test_disk_center():
    assert geo.sdf_eval(geo.Domain("disk", (1.0,)), np.array([0.0, 0.0])) == 1.0


def test_annulus_midpoint():
    d = geo.Domain("annulus", (0.4, 1.0))
    assert geo.sdf_eval(d, np.array([0.7, 0.0])) == pytest.approx(0.3)


def test_union_of_offset_disks_at_origin():
    # each child sdf at origin is 1 - 0.3; union takes the max
    assert geo.sdf_eval(make_union_disks(0.3), np.array([0.0, 0.0])) == pytest.approx(0.7)


def test_composition_algebra_pointwise():
    rng = RngStream.from_seed(5)
    kids = (geo.Domain("rectangle", (0.8, 1.1)), geo.Domain("ellipse", (0.7, 1.0)))
    rot = (0.4, 2.2)
    off = ((0.2, 0.1), (-0.2, -0.1))
    pts = np.random.default_rng(0).uniform(-1.5, 1.5, size=(500, 2))

    def child_sdf(i):
        ct, st_ = math.cos(rot[i]), math.sin(rot[i])
        d = pts - np.asarray(off[i])
        local = np.stack([ct * d[:, 0] + st_ * d[:, 1], -st_ * d[:, 0] + ct * d[:, 1]], axis=-1)
        return geo.sdf_eval(kids[i], local)

    a, b = child_sdf(0), child_sdf(1)
    for op, expected in [
        ("union", np.maximum(a, b)),
        ("intersection", np.minimum(a, b)),
        ("difference", np.minimum(a, -b)),
    ]:
        dom = geo.Domain("composed", children=kids, op=op, rotations=rot, offsets=off)
        assert np.array_equal(geo.sdf_eval(dom, pts), expected)


def test_exact_primitives_match_brute_force_distance():
    rng = RngStream.from_seed(17)
    for kind in ("disk", "square", "rectangle", "annulus", "triangle", "hexagon", "stadium"):
        dom = geo._sample_primitive(kind, rng)
        pts, _ = geo.sample_interior(dom, rng.substream(hash(kind) & 0xFFFF), 100)
        vals = geo.sdf_eval(dom, pts)
        brute = brute_boundary_distance(dom, pts)
        assert np.max(np.abs(vals - brute)) <= 1e-3, kind


def test_conservativeness_over_random_domains():
    rng = RngStream.from_seed(29)
    checked = 0
    for i, dom in enumerate(sample_domains(60, seed=29)):
        try:
            pts, _ = geo.sample_interior(dom, rng.substream(i), 250)
        except geo.EmptyDomain:
            continue
        vals = geo.sdf_eval(dom, pts)
        brute = brute_boundary_distance(dom, pts, n_boundary=512, seed=1000 + i)
        assert np.all(vals <= brute + 1e-3), (dom.kind, i)
        checked += len(pts)
    assert checked >= 10_000


def test_bbox_contains_interior():
    rng = RngStream.from_seed(31)
    for i, dom in enumerate(sample_domains(30, seed=31)):
        xmin, xmax, ymin, ymax = dom.bbox()
        try:
            pts, _ = geo.sample_interior(dom, rng.substream(i), 200)
        except geo.EmptyDomain:
            continue
        assert np.all(pts[:, 0] >= xmin) and np.all(pts[:, 0] <= xmax)
        assert np.all(pts[:, 1] >= ymin) and np.all(pts[:, 1] <= ymax)


# -- projection ---------------------------------------------------------------


def test_disk_projection_example():
    p = geo.project_to_boundary(geo.Domain("disk", (1.0,)), (0.5, 0.0))
    assert p == pytest.approx([1.0, 0.0])


def test_square_projection_example():
    p = geo.project_to_boundary(geo.Domain("square", (1.0,)), (0.9, 0.2))
    assert p == pytest.approx([1.0, 0.2])


def test_projection_reaches_boundary_everywhere():
    rng = RngStream.from_seed(41)
    for i, dom in enumerate(sample_domains(40, seed=41)):
        try:
            pts, _ = geo.sample_interior(dom, rng.substream(i), 40)
        except geo.EmptyDomain:
            continue
        brute = brute_boundary_distance(dom, pts, n_boundary=2048, seed=i)
        for j, pt in enumerate(pts):
            q = geo.project_to_boundary(dom, pt)
            assert abs(geo.sdf_eval(dom, q)) <= 1e-6
            # within 2x the true boundary distance (brute force is an upper bound)
            assert np.linalg.norm(q - pt) <= 2.0 * brute[j] + 1e-6


def test_projection_composed_difference():
    dom = geo.Domain(
        "composed",
        children=(geo.Domain("disk", (1.0,)), geo.Domain("disk", (1.0,))),
        op="difference",
        rotations=(0.0, 0.0),
        offsets=((0.0, 0.0), (0.9, 0.0)),
    )
    rng = RngStream.from_seed(43)
    pts, _ = geo.sample_interior(dom, rng, 50)
    for pt in pts:
        q = geo.project_to_boundary(dom, pt)
        assert abs(geo.sdf_eval(dom, q)) <= 1e-6


# -- sampling -------------------------------------------------------------------


def test_sample_interior_all_inside():
    dom = geo.Domain("disk", (1.0,))
    pts, _ = geo.sample_interior(dom, RngStream.from_seed(7), 100)
    assert pts.shape == (100, 2)
    assert np.all(geo.sdf_eval(dom, pts) > 0)


def test_sample_interior_acceptance_fraction_square():
    dom = geo.Domain("square", (1.0,))
    pts, proposals = geo.sample_interior(dom, RngStream.from_seed(7), 10_000)
    assert len(pts) == 10_000
    assert abs(len(pts) / proposals - 1.0) <= 0.01  # square fills its bbox


def test_sample_interior_acceptance_fraction_disk():
    dom = geo.Domain("disk", (1.0,))
    got, proposals = geo.sample_interior(dom, RngStream.from_seed(8), 10_000)
    frac = len(got) / proposals
    assert abs(frac - math.pi / 4) <= 0.02


def test_empty_domain_raises():
    dom = geo.Domain(
        "composed",
        children=(geo.Domain("disk", (1.0,)), geo.Domain("disk", (1.0,))),
        op="intersection",
        rotations=(0.0, 0.0),
        offsets=((1.5, 0.0), (-1.5, 0.0)),
    )
    with pytest.raises(geo.EmptyDomain):
        geo.sample_interior(dom, RngStream.from_seed(9), 10)


def test_boundary_sampler_on_boundary():
    rng = RngStream.from_seed(101)
    for i, dom in enumerate(sample_domains(25, seed=101)):
        try:
            pts = geo.sample_boundary(dom, rng.substream(i), 64)
        except geo.EmptyDomain:
            continue
        assert np.max(np.abs(geo.sdf_eval(dom, pts))) <= 1e-9


# -- domain sampler statistics -----------------------------------------------


def test_domain_sampler_composed_fraction():
    doms = sample_domains(40_000, seed=777)
    frac = sum(1 for d in doms if d.kind == "composed") / len(doms)
    # 3/11 = 0.2727; binomial 3.5-sigma band at n=40k is +-0.0078
    assert abs(frac - 3 / 11) <= 0.008


def test_domain_sampler_separation_range():
    for dom in sample_domains(300, seed=11):
        if dom.kind != "composed":
            continue
        (ax, ay), (bx, by) = dom.offsets
        sep = math.hypot(ax - bx, ay - by)
        assert 0.15 - 1e-12 <= sep <= 0.55 + 1e-12
        assert all(c.kind in geo.COMPOSED_CHILD_KINDS for c in dom.children)


def test_param_ranges_respected():
    for dom in sample_domains(500, seed=13):
        if dom.kind == "composed":
            continue
        ranges = list(geo.PARAM_RANGES[dom.kind].values())
        for p, (lo, hi) in zip(dom.params, ranges):
            assert lo <= p <= hi


# -- serialization ----------------------------------------------------------------


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_domain_json_roundtrip(seed):
    dom = geo.sample_domain(RngStream.from_seed(seed))
    back = geo.Domain.from_json_dict(dom.to_json_dict())
    assert back == dom


def test_grid_mask_and_points():
    pts = geo.grid_points(256)
    assert pts.shape == (256, 256, 2)
    assert pts[0, 0, 0] == pytest.approx(-1 + 0.5 / 128)
    assert pts[5, 9, 0] == pytest.approx(-1 + 9.5 / 128)
    assert pts[5, 9, 1] == pytest.approx(-1 + 5.5 / 128)
    mask = geo.grid_mask(geo.Domain("disk", (1.0,)), 256)
    assert abs(mask.mean() - math.pi / 4) <= 0.01
