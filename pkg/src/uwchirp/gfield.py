"""GF(2^m) arithmetic via log/antilog tables.

Supports m from 1 to 10 (q up to 1024). Elements are plain integers in
[0, q); scalar and numpy-array operations share the same tables.
"""

from __future__ import annotations

import numpy as np

# One standard primitive polynomial per field size (integer encoding,
# x^8+x^4+x^3+x^2+1 -> 0x11D etc.).
DEFAULT_PRIMITIVE_POLY = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
}

MAX_M = 10


class GaloisField:
    """Tables and operations for one GF(2^m).

    Immutable after construction; safe to share between workers.
    """

    def __init__(self, m: int, primitive_poly: int | None = None):
        if not 1 <= m <= MAX_M:
            raise ValueError(f"m must be in [1, {MAX_M}], got {m}")
        self.m = m
        self.q = 1 << m
        self.primitive_poly = primitive_poly or DEFAULT_PRIMITIVE_POLY[m]
        self.exp_table = np.zeros(2 * self.q, dtype=np.int64)
        self.log_table = np.zeros(self.q, dtype=np.int64)
        x = 1
        for i in range(self.q - 1):
            self.exp_table[i] = x
            self.log_table[x] = i
            x <<= 1
            if x & self.q:
                x ^= self.primitive_poly
        # a primitive polynomial cycles through all q-1 nonzero elements
        if x != 1 or len(set(self.exp_table[: self.q - 1].tolist())) != self.q - 1:
            raise ValueError(
                f"polynomial {self.primitive_poly:#x} is not primitive for GF(2^{m})"
            )
        # doubled table avoids a modulo in scalar mul
        self.exp_table[self.q - 1 : 2 * self.q - 2] = self.exp_table[: self.q - 1]

    def __repr__(self):
        return f"GaloisField(m={self.m}, poly={self.primitive_poly:#x})"

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} outside GF(2^{self.m})")

    def add(self, a: int, b: int) -> int:
        """Field addition (characteristic 2: XOR)."""
        self._check(a)
        self._check(b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return int(self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)])

    def pow(self, a: int, n: int) -> int:
        self._check(a)
        if a == 0:
            return 0 if n else 1
        return int(self.exp_table[(self.log_table[a] * n) % (self.q - 1)])

    # --- vectorized variants (decoder/encoder hot paths) ---

    def mul_arr(self, a, b):
        """Elementwise product of two integer arrays (broadcasting ok)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_arr(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)]


def poly_mul_reduce(a: int, b: int, m: int, primitive_poly: int) -> int:
    """Schoolbook polynomial multiply-and-reduce over GF(2).

    Independent oracle for table-based multiplication; deliberately
    avoids the exp/log tables.
    """
    acc = 0
    x = a
    while b:
        if b & 1:
            acc ^= x
        b >>= 1
        x <<= 1
        if x & (1 << m):
            x ^= primitive_poly
    return acc
