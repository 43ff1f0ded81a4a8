"""GF(2^m) arithmetic for the base MDS code and the coupling transform.

Elements are integers whose bits are polynomial coefficients over GF(2),
reduced modulo a fixed primitive polynomial per extension degree.  Scalar
operations use exp/log tables; the vectorised ``scale``/``mul_arrays``
paths work on numpy arrays of symbols (one entry per plane and stripe).
Matrix inversion and friends are delegated to ``galois`` through ``gf``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict

import galois
import numpy as np

from .errors import FieldError

# Primitive polynomials, one per extension degree (integer representation,
# bit i = coefficient of x^i).  Fixed so codewords are reproducible.
PRIMITIVE_POLYS: Dict[int, int] = {
    2: 0x7,        # x^2 + x + 1
    3: 0xB,        # x^3 + x + 1
    4: 0x13,       # x^4 + x + 1
    5: 0x25,       # x^5 + x^2 + 1
    6: 0x43,       # x^6 + x + 1
    7: 0x89,       # x^7 + x^3 + 1
    8: 0x11D,      # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,      # x^9 + x^4 + 1
    10: 0x409,     # x^10 + x^3 + 1
    11: 0x805,     # x^11 + x^2 + 1
    12: 0x1053,    # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,    # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,    # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,    # x^15 + x + 1
    16: 0x1100B,   # x^16 + x^12 + x^3 + x + 1
}

MIN_DEGREE = 2
MAX_DEGREE = 16
# Full multiplication tables are only materialised up to GF(256).
_MUL_TABLE_MAX_DEGREE = 8


def _mul_raw(a: int, b: int, m: int, modulus: int) -> int:
    """Carry-less multiply reduced mod ``modulus`` (no tables)."""
    p = 0
    for _ in range(m):
        if b & 1:
            p ^= a
        a <<= 1
        if a & (1 << m):
            a ^= modulus
        b >>= 1
    return p


@dataclass(frozen=True, eq=False)
class FieldTable:
    m: int
    modulus: int
    exp_table: np.ndarray   # exp_table[i] = x^i, i in [0, Q-1]; exp_table[Q-1] = 1
    log_table: np.ndarray   # log_table[a] for a != 0; entry 0 is unused

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def order(self) -> int:
        # multiplicative group order
        return self.size - 1

    @property
    def byte_width(self) -> int:
        return (self.m + 7) // 8

    @property
    def dtype(self):
        return np.uint8 if self.m <= 8 else np.uint16

    @cached_property
    def gf(self):
        """The matching ``galois`` field class (same modulus, same elements)."""
        return galois.GF(self.size, irreducible_poly=galois.Poly.Int(self.modulus))

    @cached_property
    def mul_table(self) -> np.ndarray:
        if self.m > _MUL_TABLE_MAX_DEGREE:
            raise FieldError(f"no dense multiplication table for m={self.m}")
        q = self.size
        logs = self.log_table.astype(np.int64)
        idx = (logs[:, None] + logs[None, :]) % self.order
        table = self.exp_table[idx].astype(self.dtype)
        table[0, :] = 0
        table[:, 0] = 0
        assert table.shape == (q, q)
        return table

    # ---------------- scalar ops ----------------
    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[(int(self.log_table[a]) + int(self.log_table[b])) % self.order])

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return int(self.exp_table[(self.order - int(self.log_table[a])) % self.order])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp_table[(int(self.log_table[a]) * e) % self.order])

    # ---------------- vectorised ops ----------------
    def scale(self, c: int, arr: np.ndarray) -> np.ndarray:
        """c * arr, elementwise."""
        arr = np.asarray(arr)
        if c == 0:
            return np.zeros_like(arr)
        if c == 1:
            return arr.copy()
        if self.m <= _MUL_TABLE_MAX_DEGREE:
            return self.mul_table[c][arr]
        out = np.zeros_like(arr)
        nz = arr != 0
        logs = self.log_table[arr[nz]].astype(np.int64) + int(self.log_table[c])
        out[nz] = self.exp_table[logs % self.order]
        return out

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        if self.m <= _MUL_TABLE_MAX_DEGREE:
            return self.mul_table[a, b]
        out = np.zeros(a.shape, dtype=self.dtype)
        nz = (a != 0) & (b != 0)
        logs = self.log_table[a[nz]].astype(np.int64) + self.log_table[b[nz]].astype(np.int64)
        out[nz] = self.exp_table[logs % self.order]
        return out

    def matvec(self, mat: np.ndarray, stack: np.ndarray) -> np.ndarray:
        """mat (a x b) applied to a stack of b symbol arrays -> a arrays."""
        mat = np.asarray(mat)
        stack = np.asarray(stack)
        out = np.zeros((mat.shape[0],) + stack.shape[1:], dtype=stack.dtype)
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                c = int(mat[i, j])
                if c:
                    out[i] ^= self.scale(c, stack[j])
        return out

    def elements_in_exp_order(self) -> list[int]:
        """Nonzero elements as 1, x, x^2, ... (length Q-1)."""
        return [int(v) for v in self.exp_table[: self.order]]

    def describe(self) -> dict:
        return {"m": self.m, "modulus": self.modulus, "size": self.size}


def build_field(m: int) -> FieldTable:
    if not (MIN_DEGREE <= m <= MAX_DEGREE):
        raise FieldError(f"extension degree m={m} out of range [{MIN_DEGREE},{MAX_DEGREE}]")
    modulus = PRIMITIVE_POLYS[m]
    size = 1 << m
    exp_table = np.zeros(size, dtype=np.int64)
    log_table = np.zeros(size, dtype=np.int64)
    val = 1
    for i in range(size - 1):
        if i > 0 and val == 1:
            raise FieldError(f"modulus {modulus:#x} is not primitive for m={m}")
        exp_table[i] = val
        log_table[val] = i
        val = _mul_raw(val, 2, m, modulus)
    if val != 1:
        raise FieldError(f"modulus {modulus:#x} is not primitive for m={m}")
    exp_table[size - 1] = 1
    return FieldTable(m=m, modulus=modulus, exp_table=exp_table, log_table=log_table)


def degree_for(n: int) -> int:
    """Smallest m with 2^m >= max(n, 4)."""
    need = max(int(n), 4)
    m = MIN_DEGREE
    while (1 << m) < need:
        m += 1
    if m > MAX_DEGREE:
        raise FieldError(f"block length {n} needs a field larger than GF(2^{MAX_DEGREE})")
    return m


def field_for(n: int) -> FieldTable:
    return build_field(degree_for(n))


@dataclass(frozen=True)
class CouplingConstant:
    u: int

    def check(self, field: FieldTable) -> "CouplingConstant":
        if self.u <= 0 or self.u >= field.size:
            raise FieldError(f"u={self.u} is not a nonzero element of GF({field.size})")
        if field.mul(self.u, self.u) == 1:
            raise FieldError(f"u={self.u} has u^2 = 1")
        return self


def pick_u(field: FieldTable) -> CouplingConstant:
    """Smallest element in exp-table order that is neither 0 nor 1."""
    if field.size < 4:
        raise FieldError(f"GF({field.size}) has no element with u != 0 and u^2 != 1")
    for a in field.elements_in_exp_order():
        if a not in (0, 1) and field.mul(a, a) != 1:
            return CouplingConstant(a)
    raise FieldError(f"no valid coupling constant in GF({field.size})")
