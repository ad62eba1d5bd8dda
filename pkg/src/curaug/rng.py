"""Deterministic, derivable random streams.

Every stochastic decision in this package (op sampling, crop offsets,
probe selection, epoch gating, simulated predictions) is drawn from a
``Stream``.  Streams are counter-based SplitMix64 generators: the i-th
output is a pure integer function of (key, i), so scalar draws and
vectorized numpy draws produce bit-identical values, results do not
depend on numpy or CPython RNG internals, and replaying any draw only
requires the key.  Child streams are derived by folding tokens into the
parent key, which makes per-sample / per-probe streams independent of
consumption order and safe to hand out across threads.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1E3D82B4
_MIX2 = 0x94D049BB133111EB

# numpy constants for the vectorized path (same arithmetic as the scalar path)
_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)

_INV_2_53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _token_to_int(token) -> int:
    if isinstance(token, bool):  # bool is an int subclass; keep it distinct anyway
        return int(token)
    if isinstance(token, int):
        return token & _MASK
    if isinstance(token, str):
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big")
    if isinstance(token, bytes):
        digest = hashlib.sha256(token).digest()
        return int.from_bytes(digest[:8], "big")
    raise TypeError(f"stream tokens must be int, str or bytes, got {type(token)!r}")


def _fold(key: int, token) -> int:
    # Order-sensitive fold so child("a", "b") != child("b", "a").
    return _mix((key ^ _mix(_token_to_int(token))) + _GOLDEN & _MASK)


class Stream:
    """A seeded random stream with cheap, collision-resistant children."""

    __slots__ = ("_key", "_pos")

    def __init__(self, *tokens):
        key = 0x8C2F_9D17_4A0B_66E3  # domain constant, arbitrary but fixed
        for token in tokens:
            key = _fold(key, token)
        self._key = key
        self._pos = 0

    @property
    def key(self) -> int:
        return self._key

    def child(self, *tokens) -> "Stream":
        """Derive an independent stream; unaffected by draws made so far."""
        s = Stream.__new__(Stream)
        key = self._key
        for token in tokens:
            key = _fold(key, token)
        s._key = key
        s._pos = 0
        return s

    def _next_raw(self) -> int:
        self._pos += 1
        return _mix((self._key + (self._pos * _GOLDEN & _MASK)) & _MASK)

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return (self._next_raw() >> 11) * _INV_2_53

    def randoms(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1); identical values to n scalar random() calls."""
        if n < 0:
            raise ValueError("n must be >= 0")
        idx = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        z = np.uint64(self._key) + idx * _U_GOLDEN
        z = (z ^ (z >> _U30)) * _U_MIX1
        z = (z ^ (z >> _U27)) * _U_MIX2
        z = z ^ (z >> _U31)
        return (z >> _U11) * _INV_2_53

    def randint(self, bound: int) -> int:
        """Uniform int in [0, bound). Bias is O(bound / 2**53), negligible here."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        v = int(self.random() * bound)
        return bound - 1 if v >= bound else v

    def randints(self, n: int, bound: int) -> np.ndarray:
        if bound < 1:
            raise ValueError("bound must be >= 1")
        v = (self.randoms(n) * bound).astype(np.int64)
        np.minimum(v, bound - 1, out=v)
        return v

    def seed_bits(self) -> int:
        """A 53-bit integer suitable as a child Stream token."""
        return self._next_raw() >> 11

    def seed_bits_many(self, n: int) -> np.ndarray:
        idx = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        z = np.uint64(self._key) + idx * _U_GOLDEN
        z = (z ^ (z >> _U30)) * _U_MIX1
        z = (z ^ (z >> _U27)) * _U_MIX2
        z = z ^ (z >> _U31)
        return (z >> _U11).astype(np.int64)

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), order random (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got k={k} n={n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randint(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
