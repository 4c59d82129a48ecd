"""Bit-parity between the compiled kernel and its pure-Python twin."""

import time

import numpy as np
import pytest

from wosbench import geometry as geo
from wosbench.manufactured import GenConfig, case_stream, sample_instance
from wosbench.rng import RngStream
from wosbench.wos import _pykernel as pk
from wosbench.wos.encode import encode_instance

ck = pytest.importorskip("wosbench.wos._kernel")


def kernel_args(inst):
    enc = encode_instance(inst)
    return (
        enc["domain_ints"], enc["domain_dbl"], enc["atom_kinds"],
        enc["atom_variants"], enc["atom_params"], enc["family"], enc["lam"],
    )


def walkable_instances(n, seed=31):
    out = []
    i = 0
    while len(out) < n:
        inst, _, _ = sample_instance(GenConfig.test(), case_stream(seed, i), i)
        if inst.family in ("laplace", "poisson", "yukawa"):
            out.append(inst)
        i += 1
    return out


def test_rng_parity_exhaustive():
    for z in [0, 1, 1234567, 2**31, 2**63 + 17, 2**64 - 1]:
        assert pk.mix64(z) == ck.mix64(z)
        assert pk.combine(z, 99) == ck.combine(z, 99)
    for key, c in [(123, 0), (987654321, 77), (2**64 - 5, 12), (42, 2**31)]:
        assert pk.u01(key, c) == ck.u01(key, c)


def test_special_function_parity_bitwise():
    xs = np.concatenate([np.linspace(1e-4, 25, 700), [0.0, 30.0, 50.0]])
    for x in xs:
        assert pk.i0_s(float(x)) == ck.i0_s(float(x))
        assert pk.i1_s(float(x)) == ck.i1_s(float(x))
        assert pk.erf_s(float(x)) == ck.erf_s(float(x))
        if x > 0:
            assert pk.k0_s(float(x)) == ck.k0_s(float(x))


def test_sdf_parity_bitwise():
    rng = RngStream.from_seed(3)
    pts = np.random.default_rng(0).uniform(-1.6, 1.6, (200, 2))
    for i in range(25):
        dom = geo.sample_domain(rng.substream(i))
        from wosbench.wos.encode import encode_domain

        ints, dbl = encode_domain(dom)
        for x, y in pts[:40]:
            assert pk.sdf_s(ints, dbl, x, y) == ck.sdf_point(ints, dbl, x, y)


def test_atom_eval_parity_bitwise():
    from wosbench import atoms as at
    from wosbench.wos.encode import ATOM_CODES, N_ATOM_PARAMS

    rng = RngStream.from_seed(8)
    pts = np.random.default_rng(1).uniform(-1.2, 1.2, (30, 2))
    for kind in at.GENERAL_KINDS + at.HARMONIC_KINDS:
        for trial in range(3):
            atom = at._sample_params(kind, rng)
            p = np.zeros(N_ATOM_PARAMS)
            p[: len(atom.params)] = atom.params
            code = ATOM_CODES[kind]
            for x, y in pts[:10]:
                assert pk.atom_value_s(code, atom.variant, p, x, y) == ck.atom_value_point(
                    code, atom.variant, p, x, y
                )
                assert pk.atom_lap_s(code, atom.variant, p, x, y) == ck.atom_lap_point(
                    code, atom.variant, p, x, y
                )


def test_walk_parity_bitwise():
    for idx, inst in enumerate(walkable_instances(12)):
        args = kernel_args(inst)
        pts, _ = geo.sample_interior(inst.domain, RngStream.from_seed(55 + idx), 4)
        for j, (x, y) in enumerate(pts):
            key = 777 + 31 * idx + j
            assert pk.walk_single(*args, x, y, 1e-4, 256, key) == ck.walk_single(
                *args, x, y, 1e-4, 256, key
            )


def test_estimate_point_parity():
    inst = walkable_instances(1)[0]
    args = kernel_args(inst)
    pts, _ = geo.sample_interior(inst.domain, RngStream.from_seed(70), 1)
    a = pk.estimate_point_kernel(*args, pts[0, 0], pts[0, 1], 64, 99, 0, 1e-4, 256)
    b = ck.estimate_point_kernel(*args, pts[0, 0], pts[0, 1], 64, 99, 0, 1e-4, 256)
    assert a == b


def test_solve_grid_parity_and_speed():
    inst = walkable_instances(1, seed=90)[0]
    args = kernel_args(inst)
    mask = (geo.grid_mask(inst.domain, 20) > 0).astype(np.uint8)
    budgets = np.array([1, 2, 4], dtype=np.int64)
    t0 = time.time()
    out_py, ov_py, tot = pk.solve_grid_kernel(*args, mask, budgets, 5, 1e-4, 256, 20)
    t_py = time.time() - t0
    t0 = time.time()
    out_c, ov_c, _ = ck.solve_grid_kernel(*args, mask, budgets, 5, 1e-4, 256, 20)
    t_c = time.time() - t0
    assert np.array_equal(out_py, out_c)
    assert ov_py == ov_c
    print(f"\nbackend benchmark: python {tot/max(t_py,1e-9):,.0f} walks/s, "
          f"compiled {tot/max(t_c,1e-9):,.0f} walks/s, speedup {t_py/max(t_c,1e-9):.0f}x")


def test_backend_env_override(monkeypatch):
    import importlib
    import wosbench.wos as wosmod

    monkeypatch.setenv("WOSBENCH_BACKEND", "python")
    mod = importlib.reload(wosmod)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("WOSBENCH_BACKEND")
        importlib.reload(wosmod)
