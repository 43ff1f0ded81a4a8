# src/mds_engine.py
"""Base scalar MDS code: the parity-check matrix Theta and its erasure solver.

Columns of Theta are indexed by storage node (x, y) through
``j = (y - 1) * section + x``.  The solver works on stacks of symbols, so one
call can decode every plane of a batch of stripes at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DecodeError, SingularSystemError, ThetaError
from .gf_field import FieldTable

THETA_KINDS = ("vandermonde", "cauchy_identity")

Node = Tuple[int, int]
ColumnRef = Union[int, Node]


def node_to_col(x: int, y: int, section: int) -> int:
    return (y - 1) * section + x


def col_to_node(j: int, section: int) -> Node:
    return j % section, j // section + 1


def evaluation_points(field: FieldTable, n: int) -> List[int]:
    """n distinct elements: 1, a, a^2, ... and 0 only when every element is needed."""
    if n > field.size:
        raise ThetaError(f"n={n} exceeds the field size {field.size}")
    pts = field.elements_in_exp_order()
    if n == field.size:
        pts = pts + [0]
    return pts[:n]


@dataclass(frozen=True, eq=False)
class Theta:
    matrix: np.ndarray          # (rows, n) field elements
    field: FieldTable
    kind: str
    section: int                # nodes per y-section, used for (x, y) <-> column
    points: Tuple[int, ...] = ()
    _inverses: Dict[tuple, np.ndarray] = dc_field(default_factory=dict, repr=False)

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def n(self) -> int:
        return int(self.matrix.shape[1])

    def col(self, ref: ColumnRef) -> int:
        if isinstance(ref, tuple):
            return node_to_col(ref[0], ref[1], self.section)
        return int(ref)

    def node(self, j: int) -> Node:
        return col_to_node(j, self.section)

    def entry(self, ell: int, ref: ColumnRef) -> int:
        return int(self.matrix[ell, self.col(ref)])

    @classmethod
    def from_matrix(cls, matrix, field: FieldTable, section: Optional[int] = None, kind: str = "explicit") -> "Theta":
        mat = np.asarray(matrix, dtype=np.int64)
        if mat.ndim != 2:
            raise ThetaError("Theta must be a 2-D matrix")
        return cls(matrix=mat, field=field, kind=kind, section=section or mat.shape[0])

    def describe(self) -> dict:
        return {"kind": self.kind, "rows": self.rows, "n": self.n,
                "points": ",".join(str(p) for p in self.points)}


def build_theta(q: int, n: int, field: FieldTable, kind: str = "vandermonde",
                section: Optional[int] = None) -> Theta:
    """Parity-check matrix with ``q`` rows and ``n`` columns over ``field``.

    ``section`` is the number of nodes per y-section when it differs from the
    row count (the d = n-2 codes carry one extra parity row).
    """
    if kind not in THETA_KINDS:
        raise ThetaError(f"unknown Theta kind {kind!r} (expected one of {THETA_KINDS})")
    if q < 1 or q > n:
        raise ThetaError(f"need 1 <= rows <= n, got rows={q}, n={n}")
    pts = evaluation_points(field, n)
    mat = np.zeros((q, n), dtype=np.int64)
    if kind == "vandermonde":
        for j, xj in enumerate(pts):
            for ell in range(q):
                mat[ell, j] = field.pow(xj, ell)
    else:
        # [P | I] with P_ij = 1 / (a_i + b_j)
        a, b = pts[:q], pts[q:]
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                mat[i, j] = field.inv(ai ^ bj)
        mat[:, n - q:] = np.eye(q, dtype=np.int64)
    return Theta(matrix=mat, field=field, kind=kind, section=section or q, points=tuple(pts))


def verify_mds(theta: Theta) -> bool:
    """True iff every choice of ``rows`` columns gives a nonsingular submatrix."""
    GF = theta.field.gf
    r = theta.rows
    for cols in combinations(range(theta.n), r):
        sub = GF(theta.matrix[:, list(cols)])
        if np.linalg.det(sub) == 0:
            return False
    return True


def left_inverse(theta: Theta, cols: Tuple[int, ...], scales: Tuple[int, ...]) -> np.ndarray:
    """L with L @ (Theta[:, cols] * diag(scales)) = I, cached per (cols, scales)."""
    key = (cols, scales)
    hit = theta._inverses.get(key)
    if hit is not None:
        return hit
    f = theta.field
    r, c = theta.rows, len(cols)
    sub = np.stack([f.scale(s, theta.matrix[:, j]) for j, s in zip(cols, scales)], axis=1)
    GF = f.gf
    aug = GF(np.hstack([sub.astype(np.int64), np.eye(r, dtype=np.int64)]))
    red = aug.row_reduce(ncols=c)
    if not np.array_equal(np.asarray(red[:c, :c]), np.eye(c, dtype=np.asarray(red).dtype)):
        raise SingularSystemError(f"columns {list(cols)} of Theta are linearly dependent")
    inv = np.asarray(red[:c, c:], dtype=np.int64)
    theta._inverses[key] = inv
    return inv


def _as_word(theta: Theta, known) -> np.ndarray:
    if isinstance(known, Mapping):
        items = {theta.col(k): np.asarray(v) for k, v in known.items()}
        if not items:
            raise DecodeError("no known symbols given")
        proto = next(iter(items.values()))
        word = np.zeros((theta.n,) + proto.shape, dtype=theta.field.dtype)
        for j, v in items.items():
            word[j] = v
        return word
    return np.asarray(known)


def smds_solve(theta: Theta, word: np.ndarray, unknowns: Sequence[ColumnRef],
               rhs_adjust: Optional[np.ndarray] = None,
               col_scale: Optional[Sequence[int]] = None,
               check: bool = False) -> np.ndarray:
    """Array form of ``smds_decode``.

    ``word`` has shape (n, *batch); entries at unknown columns are ignored.
    Solves  sum_{j in U} theta_{l,j} * scale_j * s_j = rhs_adjust_l + sum_{j not in U} theta_{l,j} * word_j
    for every l and every batch position.  Returns shape (|U|, *batch).
    """
    f = theta.field
    cols = tuple(theta.col(u) for u in unknowns)
    if len(set(cols)) != len(cols):
        raise DecodeError(f"duplicate unknown columns {cols}")
    if len(cols) > theta.rows:
        raise DecodeError(f"{len(cols)} unknowns exceed the {theta.rows} parity equations")
    scales = tuple(int(s) for s in col_scale) if col_scale is not None else (1,) * len(cols)
    if any(s == 0 for s in scales):
        raise DecodeError("column scales must be nonzero")

    word = np.asarray(word)
    unknown_set = set(cols)
    known_cols = [j for j in range(theta.n) if j not in unknown_set]
    rhs = f.matvec(theta.matrix[:, known_cols], word[known_cols])
    if rhs_adjust is not None:
        rhs ^= np.asarray(rhs_adjust, dtype=rhs.dtype)

    if not cols:
        if check and np.any(rhs):
            raise DecodeError("known symbols violate the parity equations")
        return np.zeros((0,) + word.shape[1:], dtype=word.dtype)

    inv = left_inverse(theta, cols, scales)
    sol = f.matvec(inv, rhs)
    if check and len(cols) < theta.rows:
        sub = np.stack([f.scale(s, theta.matrix[:, j]) for j, s in zip(cols, scales)], axis=1)
        if not np.array_equal(f.matvec(sub, sol), rhs):
            raise DecodeError("overdetermined system is inconsistent")
    return sol


def smds_decode(theta: Theta, known, unknowns: Iterable[ColumnRef],
                rhs_adjust: Optional[np.ndarray] = None,
                col_scale: Optional[Mapping[ColumnRef, int]] = None,
                check: bool = True) -> Dict[int, np.ndarray]:
    """Solve the q parity equations for the symbols at ``unknowns``.

    ``known`` maps columns (or (x, y) nodes) to symbols, or is an (n, *batch)
    array.  Returns a map column -> recovered symbol(s).
    """
    unknowns = [theta.col(u) for u in unknowns]
    scale_map = {theta.col(k): int(v) for k, v in (col_scale or {}).items()}
    scales = [scale_map.get(j, 1) for j in unknowns]
    word = _as_word(theta, known)
    sol = smds_solve(theta, word, unknowns, rhs_adjust=rhs_adjust, col_scale=scales, check=check)
    return {j: sol[i] for i, j in enumerate(unknowns)}


class ThetaCode:
    """The [n, n - rows] code with parity-check Theta, behind the base-code interface."""

    name = "theta"

    def __init__(self, theta: Theta):
        self.theta = theta
        self.n = theta.n
        self.r = theta.rows
        self.symbol_bits = theta.field.m

    def decode(self, word: np.ndarray, erased: Sequence[int], check: bool = False) -> np.ndarray:
        return smds_solve(self.theta, word, list(erased), check=check)

    def syndrome(self, word: np.ndarray) -> np.ndarray:
        return self.theta.field.matvec(self.theta.matrix, np.asarray(word))

    def is_codeword(self, word: np.ndarray) -> bool:
        return not np.any(self.syndrome(word))
