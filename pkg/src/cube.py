# src/cube.py
"""Index geometry of the data cube.

A cube holds symbols A(x, y; z) with x in Z_q, y in 1..t and plane z in Z_q^t.
Planes are enumerated as base-q numbers with z_1 the most significant digit.
Everything here is pure; ``CubeGeometry`` precomputes the vectorised tables
(digits, companion planes, fixed points) used by the codec.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParamError

PlaneIndex = Tuple[int, ...]
Node = Tuple[int, int]

FIXED_POINT = None


@dataclass(frozen=True)
class CubeCoord:
    x: int
    y: int
    z: PlaneIndex


@dataclass(frozen=True)
class PlanePartition:
    e0: FrozenSet[Node]
    e1: FrozenSet[Node]
    e2: FrozenSet[Node]


class ErasurePattern:
    """A set of erased nodes (x, y) of a q x t cube."""

    def __init__(self, nodes: Iterable[Node], q: int, t: int):
        nodes = [(int(x), int(y)) for x, y in nodes]
        for x, y in nodes:
            if not (0 <= x < q and 1 <= y <= t):
                raise ParamError(f"node ({x},{y}) outside the {q}x{t} grid")
        if len(set(nodes)) != len(nodes):
            raise ParamError(f"duplicate nodes in erasure pattern {nodes}")
        self.q, self.t = q, t
        self.nodes: FrozenSet[Node] = frozenset(nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node) -> bool:
        return tuple(node) in self.nodes

    def __iter__(self):
        return iter(sorted(self.nodes, key=lambda n: (n[1], n[0])))

    def sections(self) -> List[int]:
        return sorted({y for _, y in self.nodes})

    def matrix(self) -> np.ndarray:
        """The q x t erasure matrix E(E)."""
        mat = np.zeros((self.q, self.t), dtype=np.int64)
        for x, y in self.nodes:
            mat[x, y - 1] = 1
        return mat

    def __repr__(self) -> str:
        return f"ErasurePattern({sorted(self.nodes, key=lambda n: (n[1], n[0]))})"


def _nodes(E) -> FrozenSet[Node]:
    if isinstance(E, ErasurePattern):
        return E.nodes
    return frozenset((int(x), int(y)) for x, y in E)


# ---------------- plane enumeration ----------------

def plane_to_index(z: Sequence[int], q: int) -> int:
    idx = 0
    for v in z:
        idx = idx * q + int(v)
    return idx


def index_to_plane(idx: int, q: int, t: int) -> PlaneIndex:
    out = []
    for _ in range(t):
        out.append(idx % q)
        idx //= q
    return tuple(reversed(out))


def all_planes(q: int, t: int) -> List[PlaneIndex]:
    return [index_to_plane(i, q, t) for i in range(q ** t)]


# ---------------- operations on single planes ----------------

def plane_incidence(z: Sequence[int], q: int) -> np.ndarray:
    """P(z): entry (x, y) is 1 iff z_y = x."""
    t = len(z)
    mat = np.zeros((q, t), dtype=np.int64)
    for yi, v in enumerate(z):
        mat[int(v), yi] = 1
    return mat


def intersection_score(E, z: Sequence[int]) -> int:
    nodes = _nodes(E)
    return sum(1 for yi, v in enumerate(z) if (int(v), yi + 1) in nodes)


def partition(E, z: Sequence[int]) -> PlanePartition:
    nodes = _nodes(E)
    e0, e1, e2 = set(), set(), set()
    for x, y in nodes:
        zy = int(z[y - 1])
        if x == zy:
            e0.add((x, y))
        elif (zy, y) in nodes:
            e2.add((x, y))
        else:
            e1.add((x, y))
    return PlanePartition(frozenset(e0), frozenset(e1), frozenset(e2))


def companion(c: CubeCoord) -> Optional[CubeCoord]:
    """Swap x with z_y; None (FIXED_POINT) when x = z_y."""
    zy = c.z[c.y - 1]
    if c.x == zy:
        return FIXED_POINT
    z2 = list(c.z)
    z2[c.y - 1] = c.x
    return CubeCoord(zy, c.y, tuple(z2))


def repair_planes(x0: int, y0: int, q: int, t: int) -> List[PlaneIndex]:
    """Z_0 = {z : z_{y0} = x0}, in enumeration order."""
    return [z for z in all_planes(q, t) if z[y0 - 1] == x0]


def pict(E, z: Sequence[int], q: int) -> str:
    """ASCII rendering: P(z) entries, '(..)' on erased nodes, '*' on intersections."""
    nodes = _nodes(E)
    P = plane_incidence(z, q)
    t = len(z)
    lines = []
    for x in range(q):
        cells = []
        for yi in range(t):
            v = str(P[x, yi])
            erased = (x, yi + 1) in nodes
            cell = f"({v})" if erased else f" {v} "
            cell += "*" if erased and P[x, yi] else " "
            cells.append(cell)
        lines.append("".join(cells).rstrip())
    return "\n".join(lines)


# ---------------- vectorised tables ----------------

class CubeGeometry:
    """Lookup tables over all q^t planes for one (q, t)."""

    def __init__(self, q: int, t: int):
        if q < 2 or t < 2:
            raise ParamError(f"need q >= 2 and t >= 2, got q={q}, t={t}")
        self.q, self.t = q, t
        self.alpha = q ** t
        self.n = q * t

    @cached_property
    def weights(self) -> np.ndarray:
        # weights[yi] = q^(t-1-yi): place value of z_y in the plane index
        return np.array([self.q ** (self.t - 1 - yi) for yi in range(self.t)], dtype=np.int64)

    @cached_property
    def digits(self) -> np.ndarray:
        """(alpha, t): digits[z, y-1] = z_y."""
        idx = np.arange(self.alpha, dtype=np.int64)
        return (idx[:, None] // self.weights[None, :]) % self.q

    @cached_property
    def companion_plane(self) -> np.ndarray:
        """(q, t, alpha): plane of the companion of (x, y; z)."""
        x = np.arange(self.q, dtype=np.int64)[:, None, None]
        d = self.digits.T[None, :, :]                        # (1, t, alpha)
        z = np.arange(self.alpha, dtype=np.int64)[None, None, :]
        return z + (x - d) * self.weights[None, :, None]

    @cached_property
    def fixed(self) -> np.ndarray:
        """(q, t, alpha) bool: x = z_y."""
        x = np.arange(self.q, dtype=np.int64)[:, None, None]
        return self.digits.T[None, :, :] == x

    def col(self, x: int, y: int) -> int:
        return (y - 1) * self.q + x

    def node(self, j: int) -> Node:
        return j % self.q, j // self.q + 1

    def scores(self, E) -> np.ndarray:
        """Intersection score of every plane, shape (alpha,)."""
        s = np.zeros(self.alpha, dtype=np.int64)
        for x, y in _nodes(E):
            s += self.digits[:, y - 1] == x
        return s

    def max_score(self, E) -> int:
        return int(self.scores(E).max()) if _nodes(E) else 0

    def repair_plane_indices(self, x0: int, y0: int) -> np.ndarray:
        return np.nonzero(self.digits[:, y0 - 1] == x0)[0]

    def plane(self, idx: int) -> PlaneIndex:
        return tuple(int(v) for v in self.digits[idx])

    def plane_groups(self, planes: np.ndarray, sections: Sequence[int]):
        """Split ``planes`` by their digits on ``sections``; planes in one group share a partition."""
        if not len(planes):
            return []
        if not sections:
            return [((), planes)]
        keys = self.digits[np.ix_(planes, [y - 1 for y in sections])]
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        return [(tuple(int(v) for v in uniq[g]), planes[inverse == g]) for g in range(len(uniq))]
