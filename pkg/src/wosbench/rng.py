"""Counter-based pseudorandom numbers for reproducible parallel Monte Carlo.

Every random decision in the toolkit is derived from a 64-bit key by a
stateless mixing function, so work can be split across processes in any
order and still produce bit-identical output.  The generator is the
SplitMix64 sequence: draw ``i`` from key ``k`` is ``mix64(k + (i+1)*GAMMA)``.
Keys for nested objects (case -> pixel -> walk) are derived with
:func:`combine`, which hashes a new field into an existing key.

The compiled walk kernel re-implements ``mix64``/``combine``/``u01`` with
identical integer arithmetic; ``tests/test_backends.py`` asserts bit
equality between the two.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def combine(key: int, field: int) -> int:
    """Derive a child key by hashing an integer field into ``key``."""
    return mix64((key ^ mix64((field + GAMMA) & MASK64)) & MASK64)


def draw_u64(key: int, counter: int) -> int:
    """The ``counter``-th 64-bit draw of the stream with the given key."""
    return mix64((key + ((counter + 1) * GAMMA)) & MASK64)


def u64_to_unit(u: int) -> float:
    """Map a 64-bit word to a double in [0, 1) using the top 53 bits."""
    return (u >> 11) * (1.0 / 9007199254740992.0)


def fnv1a64(data: str) -> int:
    """FNV-1a hash of a UTF-8 string; used to key walks by case id."""
    h = 0xCBF29CE484222325
    for b in data.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


class RngStream:
    """A named, forkable stream of uniform variates.

    A stream is a (key, counter) pair.  ``substream(tag)`` derives an
    independent stream without consuming draws from the parent, which is
    how the generator gives every case / filter / parameter its own
    reproducible randomness.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        return cls(mix64(seed))

    def substream(self, tag: int) -> "RngStream":
        return RngStream(combine(self.key, tag))

    def u01(self) -> float:
        u = draw_u64(self.key, self.counter)
        self.counter += 1
        return u64_to_unit(u)

    def u01_array(self, n: int):
        """n consecutive draws, identical to n scalar u01() calls."""
        import numpy as np

        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        z = (np.uint64(self.key) + idx * np.uint64(GAMMA)).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)).astype(np.uint64)
        z = z ^ (z >> np.uint64(31))
        self.counter += n
        return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.u01()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n).  Bias is O(n / 2^53): negligible here."""
        v = int(self.u01() * n)
        return n - 1 if v >= n else v

    def choice_weighted(self, weights: list[float]) -> int:
        total = sum(weights)
        x = self.u01() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if x < acc:
                return i
        return len(weights) - 1
