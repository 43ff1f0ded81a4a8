# src/coupling.py
"""Pairwise coupling between companion symbols.

Both couplers are symmetric: (A1, A2) -> (B1, B2) = (A1 + T A2, T A1 + A2),
with T = multiplication by u (scalar form) or a binary m x m matrix acting
on m-bit symbols (vector form).  The four symbols (B1, B2, A1, A2) form a
length-4 code of minimum distance 3, so any two determine the rest.
"""
from __future__ import annotations

from typing import Dict, Mapping, Tuple

import galois
import numpy as np

from .errors import CouplerError
from .gf_field import PRIMITIVE_POLYS, FieldTable

LABELS = ("B1", "B2", "A1", "A2")


class PairCoupler:
    kind = "abstract"

    # subclasses provide T, T^-1 and M = (I + T^2)^-1 on symbol arrays
    def mul_t(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mul_t_inv(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mul_m(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def couple(self, a1, a2) -> Tuple[np.ndarray, np.ndarray]:
        a1, a2 = np.asarray(a1), np.asarray(a2)
        return a1 ^ self.mul_t(a2), self.mul_t(a1) ^ a2

    def decouple(self, b1, b2) -> Tuple[np.ndarray, np.ndarray]:
        b1, b2 = np.asarray(b1), np.asarray(b2)
        return self.mul_m(b1 ^ self.mul_t(b2)), self.mul_m(self.mul_t(b1) ^ b2)

    def recover_any2(self, known: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
        """Complete (B1, B2, A1, A2) from exactly two labelled values."""
        labels = set(known)
        if len(known) != 2 or not labels <= set(LABELS):
            raise CouplerError(f"need exactly two of {LABELS}, got {sorted(known)}")
        k = {lab: np.asarray(v) for lab, v in known.items()}
        if labels == {"A1", "A2"}:
            a1, a2 = k["A1"], k["A2"]
        elif labels == {"B1", "B2"}:
            a1, a2 = self.decouple(k["B1"], k["B2"])
        elif labels == {"B1", "A1"}:
            a1 = k["A1"]
            a2 = self.mul_t_inv(k["B1"] ^ a1)
        elif labels == {"B2", "A2"}:
            a2 = k["A2"]
            a1 = self.mul_t_inv(k["B2"] ^ a2)
        elif labels == {"B1", "A2"}:
            a2 = k["A2"]
            a1 = k["B1"] ^ self.mul_t(a2)
        else:  # {"B2", "A1"}
            a1 = k["A1"]
            a2 = k["B2"] ^ self.mul_t(a1)
        b1, b2 = self.couple(a1, a2)
        return {"B1": b1, "B2": b2, "A1": a1, "A2": a2}

    def describe(self) -> dict:
        return {"kind": self.kind}


class ScalarCoupler(PairCoupler):
    """[[1, u], [u, 1]] over GF(2^m)."""

    kind = "scalar"

    def __init__(self, field: FieldTable, u: int):
        if u <= 0 or u >= field.size:
            raise CouplerError(f"u={u} is not a nonzero element of GF({field.size})")
        if field.mul(u, u) == 1:
            raise CouplerError(f"u={u} gives u^2 = 1; the coupling is not invertible")
        self.field = field
        self.u = int(u)
        self.u_inv = field.inv(self.u)
        self.m_scale = field.inv(1 ^ field.mul(self.u, self.u))

    def mul_t(self, arr):
        return self.field.scale(self.u, arr)

    def mul_t_inv(self, arr):
        return self.field.scale(self.u_inv, arr)

    def mul_m(self, arr):
        return self.field.scale(self.m_scale, arr)

    def describe(self) -> dict:
        return {"kind": self.kind, "u": self.u}


def _apply_table(mat: np.ndarray) -> np.ndarray:
    """Lookup table of the GF(2)-linear map ``mat`` on all m-bit integers."""
    m = mat.shape[0]
    vals = np.arange(1 << m, dtype=np.int64)
    shifts = np.arange(m, dtype=np.int64)
    bits = (vals[:, None] >> shifts[None, :]) & 1
    out_bits = (bits @ mat.T) & 1
    return (out_bits << shifts[None, :]).sum(axis=1)


def companion_matrix(m: int) -> np.ndarray:
    """Binary matrix of multiplication by x modulo the degree-m primitive polynomial."""
    if m not in PRIMITIVE_POLYS:
        raise CouplerError(f"no primitive polynomial of degree {m}")
    modulus = PRIMITIVE_POLYS[m]
    T = np.zeros((m, m), dtype=np.int64)
    for j in range(m):
        v = 1 << (j + 1)
        if v & (1 << m):
            v ^= modulus
        for i in range(m):
            T[i, j] = (v >> i) & 1
    return T


class VectorCoupler(PairCoupler):
    """[[I, T], [T, I]] over m-bit binary tuples."""

    kind = "vector"

    def __init__(self, T: np.ndarray, poly: int = 0):
        T = np.asarray(T, dtype=np.int64) & 1
        m = T.shape[0]
        if T.shape != (m, m) or m < 2:
            raise CouplerError(f"T must be a square binary matrix of size >= 2, got {T.shape}")
        GF2 = galois.GF2
        I = np.eye(m, dtype=np.int64)
        if np.linalg.det(GF2(T)) == 0:
            raise CouplerError("T is singular")
        shifted = (I + T @ T) & 1
        if np.linalg.det(GF2(shifted)) == 0:
            raise CouplerError("I + T^2 is singular; the pair code would not be MDS")
        self.m = m
        self.T = T
        self.poly = int(poly)
        dtype = np.uint8 if m <= 8 else np.uint16
        self._t = _apply_table(T).astype(dtype)
        self._t_inv = _apply_table(np.asarray(np.linalg.inv(GF2(T)), dtype=np.int64)).astype(dtype)
        self._m = _apply_table(np.asarray(np.linalg.inv(GF2(shifted)), dtype=np.int64)).astype(dtype)

    def mul_t(self, arr):
        return self._t[np.asarray(arr)]

    def mul_t_inv(self, arr):
        return self._t_inv[np.asarray(arr)]

    def mul_m(self, arr):
        return self._m[np.asarray(arr)]

    def describe(self) -> dict:
        return {"kind": self.kind, "m": self.m, "poly": self.poly}


def build_scalar_coupler(field: FieldTable, u: int) -> ScalarCoupler:
    return ScalarCoupler(field, u)


def build_vector_coupler(m: int) -> VectorCoupler:
    if m < 2:
        raise CouplerError(f"vector coupler needs m >= 2, got {m}")
    return VectorCoupler(companion_matrix(m), poly=PRIMITIVE_POLYS.get(m, 0))
