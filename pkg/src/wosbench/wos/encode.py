"""Flat array encodings of instances for the walk kernels.

Both the compiled kernel and the pure-Python twin consume the same
encoding, so an instance is lowered exactly once per solve.
"""

from __future__ import annotations

import numpy as np

from ..atoms import GENERAL_KINDS, HARMONIC_KINDS, Solution
from ..geometry import BOOLEAN_OPS, PRIMITIVE_KINDS, Domain
from ..manufactured import FAMILIES, PdeInstance

DOMAIN_CODES = {k: i for i, k in enumerate(PRIMITIVE_KINDS)}
DOMAIN_CODES["composed"] = len(PRIMITIVE_KINDS)
OP_CODES = {k: i for i, k in enumerate(BOOLEAN_OPS)}
ATOM_CODES = {k: i for i, k in enumerate(GENERAL_KINDS + HARMONIC_KINDS)}
FAMILY_CODES = {k: i for i, k in enumerate(FAMILIES)}

N_DOMAIN_DOUBLES = 24
N_ATOM_PARAMS = 24


def encode_domain(domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    ints = np.zeros(4, dtype=np.int32)
    dbl = np.zeros(N_DOMAIN_DOUBLES, dtype=np.float64)
    ints[0] = DOMAIN_CODES[domain.kind]
    if domain.kind != "composed":
        ints[1] = -1
        dbl[: len(domain.params)] = domain.params
        return ints, dbl
    ints[1] = OP_CODES[domain.op]
    for c, child in enumerate(domain.children):
        ints[2 + c] = DOMAIN_CODES[child.kind]
        base = 4 + 4 * c
        dbl[base : base + len(child.params)] = child.params
    import math

    for c, theta in enumerate(domain.rotations):
        dbl[12 + 2 * c] = math.cos(theta)
        dbl[13 + 2 * c] = math.sin(theta)
    for c, off in enumerate(domain.offsets):
        dbl[16 + 2 * c] = off[0]
        dbl[17 + 2 * c] = off[1]
    return ints, dbl


def encode_solution(sol: Solution) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(sol.atoms)
    kinds = np.zeros(n, dtype=np.int32)
    variants = np.zeros(n, dtype=np.int32)
    params = np.zeros((n, N_ATOM_PARAMS), dtype=np.float64)
    for i, atom in enumerate(sol.atoms):
        kinds[i] = ATOM_CODES[atom.kind]
        variants[i] = atom.variant
        params[i, : len(atom.params)] = atom.params
    return kinds, variants, params


def encode_instance(instance: PdeInstance) -> dict:
    dints, ddbl = encode_domain(instance.domain)
    kinds, variants, params = encode_solution(instance.solution)
    return {
        "domain_ints": dints,
        "domain_dbl": ddbl,
        "atom_kinds": kinds,
        "atom_variants": variants,
        "atom_params": params,
        "family": FAMILY_CODES[instance.family],
        "lam": float(instance.lam),
    }
