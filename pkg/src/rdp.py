# src/rdp.py
"""Row-diagonal parity (RDP) array code as a vector-alphabet MDS code.

A codeword is a (p-1) x (p+1) bit array.  Columns 0..p-2 carry data, column
p-1 is the row parity and column p the diagonal parity.  Each column is one
code symbol: an m = p-1 bit integer whose bit i is row i.
"""
from __future__ import annotations

from typing import Dict, Sequence, Tuple

import galois
import numpy as np

from .errors import DecodeError, RdpError


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


class VectorMdsCode:
    """(n, k) = (p+1, p-1) RDP code over (p-1)-bit symbols; corrects any 2 erasures."""

    name = "RDP"

    def __init__(self, p: int):
        if not is_odd_prime(p):
            raise RdpError(f"RDP needs an odd prime, got p={p}")
        self.p = p
        self.m = p - 1
        self.n = p + 1
        self.k = p - 1
        self.r = 2
        self.symbol_bits = self.m
        self.H = self._parity_check()
        self._shifts = np.arange(self.m, dtype=np.int64)
        self._inverses: Dict[Tuple[int, ...], np.ndarray] = {}

    def _parity_check(self) -> np.ndarray:
        p, m = self.p, self.m
        H = np.zeros((2 * m, self.n * m), dtype=np.int64)
        for i in range(m):
            for j in range(p):
                H[i, j * m + i] = 1
        for d in range(m):
            for j in range(p):
                i = (d - j) % p
                if i < m:
                    H[m + d, j * m + i] = 1
            H[m + d, p * m + d] = 1
        return H

    # ---------------- bit <-> symbol ----------------
    def _to_bits(self, cols: np.ndarray) -> np.ndarray:
        c = cols.shape[0]
        flat = cols.reshape(c, -1).astype(np.int64)
        bits = (flat[:, None, :] >> self._shifts[None, :, None]) & 1
        return bits.reshape(c * self.m, -1)

    def _from_bits(self, bits: np.ndarray, batch_shape, dtype) -> np.ndarray:
        c = bits.shape[0] // self.m
        vals = (bits.reshape(c, self.m, -1) << self._shifts[None, :, None]).sum(axis=1)
        return vals.reshape((c,) + tuple(batch_shape)).astype(dtype)

    # ---------------- encode / check ----------------
    def encode(self, data: np.ndarray) -> np.ndarray:
        """data: (k, *batch) symbols -> codeword (n, *batch)."""
        data = np.asarray(data)
        if data.shape[0] != self.k:
            raise RdpError(f"expected {self.k} data symbols, got {data.shape[0]}")
        p, m = self.p, self.m
        batch = data.shape[1:]
        flat = data.reshape(self.k, -1).astype(np.int64)
        bits = (flat[:, None, :] >> self._shifts[None, :, None]) & 1      # (col, row, B)
        grid = np.zeros((self.n, m, flat.shape[1]), dtype=np.int64)
        grid[: self.k] = bits
        grid[p - 1] = np.bitwise_xor.reduce(bits, axis=0)
        for d in range(m):
            acc = np.zeros(flat.shape[1], dtype=np.int64)
            for j in range(p):
                i = (d - j) % p
                if i < m:
                    acc ^= grid[j, i]
            grid[p, d] = acc
        return self._from_bits(grid.reshape(self.n * m, -1), batch, data.dtype)

    def syndrome(self, word: np.ndarray) -> np.ndarray:
        word = np.asarray(word)
        return (self.H @ self._to_bits(word)) & 1

    def is_codeword(self, word: np.ndarray) -> bool:
        return not np.any(self.syndrome(word))

    # ---------------- erasure decoding ----------------
    def _left_inverse(self, erased: Tuple[int, ...]) -> np.ndarray:
        hit = self._inverses.get(erased)
        if hit is not None:
            return hit
        m = self.m
        idx = [j * m + i for j in erased for i in range(m)]
        sub = self.H[:, idx]
        c = sub.shape[1]
        aug = galois.GF2(np.hstack([sub, np.eye(sub.shape[0], dtype=np.int64)]))
        red = aug.row_reduce(ncols=c)
        if not np.array_equal(np.asarray(red[:c, :c]), np.eye(c, dtype=np.asarray(red).dtype)):
            raise DecodeError(f"RDP cannot resolve erasures {erased}")
        inv = np.asarray(red[:c, c:], dtype=np.int64)
        self._inverses[erased] = inv
        return inv

    def decode(self, word: np.ndarray, erased: Sequence[int], check: bool = False) -> np.ndarray:
        """Recover the symbols at ``erased`` (at most 2) from the rest of ``word``."""
        word = np.asarray(word)
        erased = tuple(int(e) for e in erased)
        if len(erased) > self.r:
            raise DecodeError(f"RDP corrects at most {self.r} erasures, got {len(erased)}")
        batch = word.shape[1:]
        if not erased:
            return np.zeros((0,) + batch, dtype=word.dtype)
        m = self.m
        known = [j for j in range(self.n) if j not in erased]
        kidx = [j * m + i for j in known for i in range(m)]
        rhs = (self.H[:, kidx] @ self._to_bits(word[known])) & 1
        inv = self._left_inverse(erased)
        sol = (inv @ rhs) & 1
        if check:
            idx = [j * m + i for j in erased for i in range(m)]
            if np.any(((self.H[:, idx] @ sol) & 1) != rhs):
                raise DecodeError("RDP erasure system is inconsistent")
        return self._from_bits(sol, batch, word.dtype)

    def describe(self) -> dict:
        return {"name": self.name, "p": self.p, "n": self.n, "k": self.k, "m": self.m}


def rdp_codec(p: int) -> VectorMdsCode:
    return VectorMdsCode(p)
