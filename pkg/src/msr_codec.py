# src/msr_codec.py
"""Coupled-layer MSR code: parameters, encoding, parity checks, repair, collection.

Symbols live in numpy arrays of shape (q, t, alpha, S): node x, section y-1,
plane index, stripe.  Two instances share the machinery:

  * field instance: base code = ThetaCode over GF(2^m), scalar coupler u
  * generic instance: any base code with an erasure decoder (RDP here) and a
    vector coupler, using only decode + recover_any2
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .coupling import PairCoupler, ScalarCoupler, build_vector_coupler
from .cube import CubeGeometry, ErasurePattern, Node, partition
from .errors import DecodeError, MsrError, ParamError, RepairError
from .gf_field import build_field, degree_for, pick_u
from .mds_engine import ThetaCode, build_theta, smds_solve
from .rdp import VectorMdsCode, rdp_codec
from .scalar_view import scalar_parity_check

D_MODES = ("n-1", "n-2")
BASES = ("gf", "rdp")

_UNRESOLVED = np.iinfo(np.int64).max


@dataclass(frozen=True)
class AlphabetSpec:
    kind: str                 # "gf" | "rdp"
    m: int                    # bits per symbol
    modulus: int = 0          # gf: primitive polynomial
    u: int = 0                # gf: coupling constant
    p: int = 0                # rdp: prime

    @property
    def byte_width(self) -> int:
        return (self.m + 7) // 8


@dataclass(frozen=True)
class MsrParams:
    q: int
    t: int
    d_mode: str
    n: int                    # real nodes (after shortening)
    k: int
    d: int
    alpha: int
    beta: int
    r: int                    # parities of the per-plane base code
    shorten_by: int = 0
    alphabet: Optional[AlphabetSpec] = None
    theta_kind: str = "vandermonde"

    @property
    def parent_n(self) -> int:
        return self.q * self.t

    @property
    def parent_k(self) -> int:
        return self.parent_n - self.r

    @property
    def message_symbols(self) -> int:
        # B = k * alpha
        return self.k * self.alpha

    @property
    def repair_symbols(self) -> int:
        return self.d * self.beta

    @property
    def baseline_symbols(self) -> int:
        return self.k * self.alpha

    @property
    def ratio(self) -> float:
        return self.repair_symbols / self.baseline_symbols

    def describe(self) -> dict:
        out = {"q": self.q, "t": self.t, "d_mode": self.d_mode, "n": self.n, "k": self.k,
               "d": self.d, "alpha": self.alpha, "beta": self.beta, "r": self.r,
               "shorten_by": self.shorten_by, "theta_kind": self.theta_kind}
        if self.alphabet is not None:
            out.update({"base": self.alphabet.kind, "m": self.alphabet.m,
                        "modulus": self.alphabet.modulus, "u": self.alphabet.u, "p": self.alphabet.p})
        return out


def _d_mode(q: int, t: int, d_choice) -> str:
    if isinstance(d_choice, str):
        mode = d_choice.replace(" ", "").replace("−", "-")
        if mode not in D_MODES:
            raise ParamError(f"d must be one of {D_MODES}, got {d_choice!r}")
        return mode
    n = q * t
    if int(d_choice) == n - 1:
        return "n-1"
    if int(d_choice) == n - 2:
        return "n-2"
    raise ParamError(f"d={d_choice} is neither n-1={n - 1} nor n-2={n - 2}")


def derive_params(q: int, t: int, d_choice="n-1", theta_kind: Optional[str] = None,
                  base: str = "gf") -> MsrParams:
    """(q, t, d) -> (n, k, d, alpha, beta) plus the field descriptor."""
    if q < 2 or t < 2:
        raise ParamError(f"need q >= 2 and t >= 2, got q={q}, t={t}")
    mode = _d_mode(q, t, d_choice)
    n = q * t
    r = q if mode == "n-1" else q + 1
    k = n - r
    d = n - 1 if mode == "n-1" else n - 2
    if k < 1 or d < k:
        raise ParamError(f"(q={q}, t={t}, d={mode}) leaves k={k}, d={d}")
    if theta_kind is None:
        theta_kind = "vandermonde" if mode == "n-1" else "cauchy_identity"
    if base == "gf":
        m = degree_for(n)
        fld = build_field(m)
        alphabet = AlphabetSpec("gf", m, modulus=fld.modulus, u=pick_u(fld).u)
    elif base == "rdp":
        if mode != "n-1" or q != 2:
            raise ParamError("RDP instances have q=2 and d=n-1")
        p = n - 1
        alphabet = AlphabetSpec("rdp", p - 1, p=p)
        theta_kind = "rdp"
    else:
        raise ParamError(f"unknown base code {base!r}")
    return MsrParams(q=q, t=t, d_mode=mode, n=n, k=k, d=d, alpha=q ** t,
                     beta=q ** (t - 1), r=r, alphabet=alphabet, theta_kind=theta_kind)


def derive_params_from_nk(n: int, k: int, theta_kind: str = "vandermonde") -> MsrParams:
    """Shortened code: q = n-k, n = q t - delta, first delta nodes pinned to zero."""
    if k <= 0:
        raise ParamError(f"k must be positive, got k={k}")
    q = n - k
    if q < 2 or q >= n:
        raise ParamError(f"need 2 <= n-k < n, got n={n}, k={k}")
    t = math.ceil(n / q)
    delta = q * t - n
    parent = derive_params(q, t, "n-1", theta_kind=theta_kind)
    return MsrParams(q=q, t=t, d_mode="n-1", n=n, k=k, d=n - 1, alpha=parent.alpha,
                     beta=parent.beta, r=q, shorten_by=delta, alphabet=parent.alphabet,
                     theta_kind=theta_kind)


@dataclass
class DataCube:
    symbols: np.ndarray       # (q, t, alpha, S)

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols)
        if self.symbols.ndim == 3:
            self.symbols = self.symbols[..., None]
        if self.symbols.ndim != 4:
            raise ParamError(f"cube symbols must be (q, t, alpha[, S]), got {self.symbols.shape}")

    @property
    def q(self) -> int:
        return self.symbols.shape[0]

    @property
    def t(self) -> int:
        return self.symbols.shape[1]

    @property
    def alpha(self) -> int:
        return self.symbols.shape[2]

    @property
    def stripes(self) -> int:
        return self.symbols.shape[3]

    def node(self, x: int, y: int) -> np.ndarray:
        return self.symbols[x, y - 1]

    def copy(self) -> "DataCube":
        return DataCube(self.symbols.copy())

    def flat(self) -> np.ndarray:
        """(n * alpha, S), node-major in column order j = (y-1) q + x."""
        return self.symbols.transpose(1, 0, 2, 3).reshape(-1, self.stripes)

    def equals(self, other: "DataCube") -> bool:
        return np.array_equal(self.symbols, other.symbols)

    def __xor__(self, other: "DataCube") -> "DataCube":
        return DataCube(self.symbols ^ other.symbols)


@dataclass
class RepairTranscript:
    failed: Node
    helpers: Tuple[Node, ...]
    aloof: Optional[Node]
    planes: Tuple[int, ...]               # plane indices read from every helper
    downloads: Dict[Node, int]            # symbols per stripe, per helper
    recovered: np.ndarray = dc_field(repr=False)   # (alpha, S)
    stripes: int = 1

    @property
    def total_download(self) -> int:
        return sum(self.downloads.values())

    @property
    def total_symbols(self) -> int:
        return self.total_download * self.stripes

    def per_helper(self) -> List[int]:
        return [self.downloads[h] for h in self.helpers]


Fetch = Callable[[int, int, np.ndarray], np.ndarray]


class MsrCodec:
    def __init__(self, params: MsrParams, base, coupler: PairCoupler):
        if base.n != params.parent_n or base.r != params.r:
            raise ParamError(f"base code ({base.n}, r={base.r}) does not match "
                             f"(n={params.parent_n}, r={params.r})")
        self.params = params
        self.base = base
        self.coupler = coupler
        self.geom = CubeGeometry(params.q, params.t)
        self.theta = base.theta if isinstance(base, ThetaCode) else None
        self.field = self.theta.field if self.theta is not None else None
        bits = base.symbol_bits
        self.dtype = np.uint8 if bits <= 8 else np.uint16
        self._scalar_view = None

    # ---------------- node roles ----------------
    @property
    def is_field(self) -> bool:
        return self.theta is not None and isinstance(self.coupler, ScalarCoupler)

    def node(self, j: int) -> Node:
        return self.geom.node(j)

    @property
    def shortened_nodes(self) -> List[Node]:
        return [self.node(j) for j in range(self.params.shorten_by)]

    @property
    def real_nodes(self) -> List[Node]:
        return [self.node(j) for j in range(self.params.shorten_by, self.params.parent_n)]

    @property
    def systematic_nodes(self) -> List[Node]:
        return [self.node(j) for j in range(self.params.shorten_by, self.params.parent_k)]

    @property
    def parity_nodes(self) -> List[Node]:
        return [self.node(j) for j in range(self.params.parent_k, self.params.parent_n)]

    def _pattern(self, E) -> ErasurePattern:
        pat = E if isinstance(E, ErasurePattern) else ErasurePattern(E, self.params.q, self.params.t)
        short = set(self.shortened_nodes)
        bad = [nd for nd in pat.nodes if nd in short]
        if bad:
            raise ParamError(f"shortened nodes {sorted(bad)} are never stored")
        return pat

    def empty_cube(self, stripes: int = 1) -> DataCube:
        p = self.params
        return DataCube(np.zeros((p.q, p.t, p.alpha, stripes), dtype=self.dtype))

    # ---------------- coupling of whole cubes ----------------
    def _pairs(self, arr: np.ndarray, x: int, yi: int):
        g = self.geom
        nf = ~g.fixed[x, yi]
        planes = np.nonzero(nf)[0]
        partner = g.digits[planes, yi]
        comp = g.companion_plane[x, yi, planes]
        return planes, arr[x, yi, planes], arr[partner, yi, comp]

    def decouple(self, cube: DataCube) -> DataCube:
        """A -> B: every plane of the result is a base-code codeword."""
        A = cube.symbols
        B = A.copy()
        for yi in range(self.params.t):
            for x in range(self.params.q):
                planes, a_self, a_comp = self._pairs(A, x, yi)
                B[x, yi, planes] = self.coupler.couple(a_self, a_comp)[0]
        return DataCube(B)

    def couple_cube(self, bcube: DataCube) -> DataCube:
        """B -> A, the inverse of ``decouple``."""
        B = bcube.symbols
        A = B.copy()
        for yi in range(self.params.t):
            for x in range(self.params.q):
                planes, b_self, b_comp = self._pairs(B, x, yi)
                A[x, yi, planes] = self.coupler.decouple(b_self, b_comp)[0]
        return DataCube(A)

    # ---------------- parity ----------------
    def _plane_words(self, symbols: np.ndarray) -> np.ndarray:
        # (q, t, alpha, S) -> (n, alpha, S) in column order
        p = self.params
        return symbols.transpose(1, 0, 2, 3).reshape(p.parent_n, p.alpha, -1)

    def parity_decoupled(self, cube: DataCube) -> bool:
        B = self.decouple(cube).symbols
        return not np.any(self.base.syndrome(self._plane_words(B)))

    @property
    def scalar_view(self):
        if self._scalar_view is None:
            if not self.is_field:
                raise MsrError("the scalar view needs a field instance")
            self._scalar_view = scalar_parity_check(self)
        return self._scalar_view

    def parity_direct(self, cube: DataCube) -> bool:
        """Evaluate every check h(z, l) on A directly, without decoupling."""
        return not np.any(self.scalar_view.syndrome(cube.flat()))

    def verify_parity(self, cube: DataCube, path: str = "decoupled") -> bool:
        """``path``: "decoupled", "direct" (field only) or "both" (must agree)."""
        for x, y in self.shortened_nodes:
            if np.any(cube.node(x, y)):
                return False
        if path == "decoupled":
            return self.parity_decoupled(cube)
        if path == "direct":
            return self.parity_direct(cube)
        if path == "both":
            a, b = self.parity_decoupled(cube), self.parity_direct(cube)
            if a != b:
                raise MsrError("direct and decoupled parity checks disagree")
            return a
        raise ParamError(f"unknown parity path {path!r}")

    # ---------------- encoding ----------------
    def message_to_cube(self, message) -> DataCube:
        p = self.params
        msg = np.asarray(message)
        if msg.ndim == 1:
            msg = msg[:, None]
        if msg.shape[0] != p.message_symbols:
            raise ParamError(f"message must hold k*alpha={p.message_symbols} symbols, got {msg.shape[0]}")
        cube = self.empty_cube(msg.shape[1])
        blocks = msg.reshape(p.k, p.alpha, -1).astype(self.dtype)
        for i, (x, y) in enumerate(self.systematic_nodes):
            cube.symbols[x, y - 1] = blocks[i]
        return cube

    def cube_to_message(self, cube: DataCube) -> np.ndarray:
        """(k * alpha, S) message read back from the systematic nodes."""
        return np.concatenate([cube.node(x, y) for x, y in self.systematic_nodes], axis=0)

    def encode_systematic(self, message) -> DataCube:
        cube = self.message_to_cube(message)
        return self.collect_data(cube, self.parity_nodes)

    # ---------------- data collection ----------------
    def _check_ready(self, rnd: np.ndarray, xs, yi: int, planes, s: int):
        if np.any(rnd[xs, yi, planes] >= s):
            raise DecodeError(f"round {s} consumed a symbol that was not yet decoded")

    def _known_b(self, A: np.ndarray, rnd: np.ndarray, x: int, yi: int, planes: np.ndarray, s: int) -> np.ndarray:
        g = self.geom
        self._check_ready(rnd, x, yi, planes, s)
        b = A[x, yi, planes].copy()
        nf = ~g.fixed[x, yi, planes]
        if np.any(nf):
            pl = planes[nf]
            partner = g.digits[pl, yi]
            comp = g.companion_plane[x, yi, pl]
            self._check_ready(rnd, partner, yi, comp, s)
            b[nf] = self.coupler.couple(A[x, yi, pl], A[partner, yi, comp])[0]
        return b

    def collect_data(self, cube: DataCube, E, method: Optional[str] = None) -> DataCube:
        """Recover erased nodes ``E`` plane by plane in rounds of intersection score.

        ``method``: "mixture" (field instance: A on e0/e1, B on e2) or "generic"
        (B on all of E, completed through recover_any2).
        """
        p, g = self.params, self.geom
        pat = self._pattern(E)
        if len(pat) > p.r:
            raise DecodeError(f"{len(pat)} erasures exceed the {p.r} the code can collect from")
        method = method or ("mixture" if self.is_field else "generic")
        if method == "mixture" and not self.is_field:
            raise ParamError("the mixture decoder needs a field instance")
        if method not in ("mixture", "generic"):
            raise ParamError(f"unknown collection method {method!r}")

        A = cube.symbols.copy()
        if not len(pat):
            return DataCube(A)
        S = A.shape[3]
        rnd = np.full((p.q, p.t, p.alpha), -1, dtype=np.int64)
        for x, y in pat.nodes:
            A[x, y - 1] = 0
            rnd[x, y - 1] = _UNRESOLVED
        erased_cols = {g.col(x, y) for x, y in pat.nodes}
        scores = g.scores(pat)
        sections = pat.sections()

        for s in range(int(scores.max()) + 1):
            planes_s = np.nonzero(scores == s)[0]
            Btmp = np.zeros_like(A)
            Bhave = np.zeros(rnd.shape, dtype=bool)
            e2_items = []
            for _key, planes in g.plane_groups(planes_s, sections):
                part = partition(pat, g.plane(planes[0]))
                word = np.zeros((p.parent_n, len(planes), S), dtype=A.dtype)
                for j in range(p.parent_n):
                    if j not in erased_cols:
                        x, y = g.node(j)
                        word[j] = self._known_b(A, rnd, x, y - 1, planes, s)
                if method == "mixture":
                    self._solve_mixture(A, rnd, Btmp, word, part, planes, s)
                else:
                    self._solve_generic(A, rnd, Btmp, word, part, planes, s)
                for x, y in part.e2:
                    e2_items.append((x, y - 1, planes))
                    Bhave[x, y - 1, planes] = True
            # e2 companions were decoded in this same round
            for x, yi, planes in e2_items:
                partner = g.digits[planes, yi]
                comp = g.companion_plane[x, yi, planes]
                if not np.all(Bhave[partner, yi, comp]):
                    raise DecodeError("companion of an e2 symbol was not decoded in its round")
                A[x, yi, planes] = self.coupler.decouple(Btmp[x, yi, planes], Btmp[partner, yi, comp])[0]
            for x, yi, planes in e2_items:
                rnd[x, yi, planes] = s
        if np.any(rnd == _UNRESOLVED):
            raise DecodeError("some erased symbols were never decoded")
        return DataCube(A)

    def _e1_companions(self, A, rnd, x, yi, planes, s):
        g = self.geom
        partner = g.digits[planes, yi]
        comp = g.companion_plane[x, yi, planes]
        self._check_ready(rnd, partner, yi, comp, s)
        return A[partner, yi, comp]

    def _solve_mixture(self, A, rnd, Btmp, word, part, planes, s):
        g, f = self.geom, self.field
        e01 = sorted(part.e0 | part.e1, key=lambda nd: g.col(*nd))
        e2 = sorted(part.e2, key=lambda nd: g.col(*nd))
        unknowns = [g.col(*nd) for nd in e01 + e2]
        rhs = None
        e1 = sorted(part.e1, key=lambda nd: g.col(*nd))
        if e1:
            ua = np.stack([self.coupler.mul_t(self._e1_companions(A, rnd, x, y - 1, planes, s))
                           for x, y in e1])
            rhs = f.matvec(self.theta.matrix[:, [g.col(*nd) for nd in e1]], ua)
        sol = smds_solve(self.theta, word, unknowns, rhs_adjust=rhs)
        for i, (x, y) in enumerate(e01):
            A[x, y - 1, planes] = sol[i]
            rnd[x, y - 1, planes] = s
        for i, (x, y) in enumerate(e2, start=len(e01)):
            Btmp[x, y - 1, planes] = sol[i]

    def _solve_generic(self, A, rnd, Btmp, word, part, planes, s):
        g = self.geom
        nodes = sorted(part.e0 | part.e1 | part.e2, key=lambda nd: g.col(*nd))
        sol = self.base.decode(word, [g.col(*nd) for nd in nodes])
        for i, (x, y) in enumerate(nodes):
            if (x, y) in part.e0:
                A[x, y - 1, planes] = sol[i]
                rnd[x, y - 1, planes] = s
            elif (x, y) in part.e1:
                a_comp = self._e1_companions(A, rnd, x, y - 1, planes, s)
                A[x, y - 1, planes] = self.coupler.recover_any2({"B1": sol[i], "A2": a_comp})["A1"]
                rnd[x, y - 1, planes] = s
            else:
                Btmp[x, y - 1, planes] = sol[i]

    # ---------------- repair ----------------
    def plan_helpers(self, x0: int, y0: int, helpers: Optional[Iterable[Node]] = None,
                     aloof: Optional[Node] = None) -> Tuple[List[Node], Optional[Node]]:
        p = self.params
        failed = (int(x0), int(y0))
        real = self.real_nodes
        if failed not in real:
            raise RepairError(f"node {failed} is not a stored node of this code")
        others = [nd for nd in real if nd != failed]
        if helpers is not None:
            helpers = [tuple(int(v) for v in h) for h in helpers]
            extra = set(helpers) - set(others)
            if extra:
                raise RepairError(f"helpers {sorted(extra)} are not live nodes")
            if len(set(helpers)) != p.d:
                raise RepairError(f"repair needs exactly d={p.d} helpers, got {len(set(helpers))}")
        if p.d_mode == "n-1":
            if aloof is not None:
                raise RepairError("d=n-1 repair downloads from every other node")
            if helpers is not None and set(helpers) != set(others):
                raise RepairError("d=n-1 repair needs every other node as a helper")
            return others, None
        if helpers is not None:
            missing = [nd for nd in others if nd not in set(helpers)]
            derived = missing[0]
            if aloof is not None and tuple(aloof) != derived:
                raise RepairError(f"aloof node {tuple(aloof)} is listed as a helper")
            aloof = derived
        if aloof is None:
            aloof = next(nd for nd in others if nd[1] != y0)
        aloof = (int(aloof[0]), int(aloof[1]))
        if aloof not in others:
            raise RepairError(f"aloof node {aloof} is not a live node")
        if aloof[1] == y0:
            raise RepairError(f"helpers must include every node of section y={y0}; "
                              f"aloof node {aloof} lies in it")
        return [nd for nd in others if nd != aloof], aloof

    def repair_node(self, cube: DataCube, x0: int, y0: int, helpers: Optional[Iterable[Node]] = None,
                    aloof: Optional[Node] = None, method: Optional[str] = None) -> RepairTranscript:
        """Regenerate node (x0, y0) from beta symbols per helper out of ``cube``."""
        syms = cube.symbols

        def fetch(x, y, planes):
            return syms[x, y - 1][planes]

        return self.repair_with(fetch, x0, y0, stripes=cube.stripes, helpers=helpers,
                                aloof=aloof, method=method)

    def repair_with(self, fetch: Fetch, x0: int, y0: int, stripes: int,
                    helpers: Optional[Iterable[Node]] = None, aloof: Optional[Node] = None,
                    method: Optional[str] = None) -> RepairTranscript:
        """Repair where ``fetch(x, y, planes)`` returns (len(planes), S) helper symbols."""
        p, g = self.params, self.geom
        helper_list, aloof = self.plan_helpers(x0, y0, helpers, aloof)
        Z0 = g.repair_plane_indices(x0, y0)
        part = np.zeros((p.q, p.t, p.alpha, stripes), dtype=self.dtype)
        have = np.zeros((p.q, p.t, p.alpha), dtype=bool)
        for x, y in self.shortened_nodes:
            have[x, y - 1] = True
        downloads: Dict[Node, int] = {}
        for x, y in helper_list:
            vals = np.asarray(fetch(x, y, Z0))
            if vals.shape != (len(Z0), stripes):
                raise RepairError(f"helper ({x},{y}) returned shape {vals.shape}")
            part[x, y - 1, Z0] = vals
            have[x, y - 1, Z0] = True
            downloads[(x, y)] = len(Z0)

        if aloof is not None:
            recovered = self._repair_aloof(part, have, x0, y0, aloof, Z0)
        else:
            method = method or ("scaled" if self.is_field else "generic")
            if method == "scaled":
                if not self.is_field:
                    raise ParamError("scaled repair needs a field instance")
                recovered = self._repair_scaled(part, have, x0, y0, Z0)
            elif method == "generic":
                recovered = self._repair_generic(part, have, x0, y0, Z0)
            else:
                raise ParamError(f"unknown repair method {method!r}")
        return RepairTranscript(failed=(x0, y0), helpers=tuple(helper_list), aloof=aloof,
                                planes=tuple(int(z) for z in Z0), downloads=downloads,
                                recovered=recovered, stripes=stripes)

    def _take(self, part, have, xs, yi, planes) -> np.ndarray:
        if not np.all(have[xs, yi, planes]):
            raise RepairError("repair touched a symbol that was not downloaded")
        return part[xs, yi, planes]

    def _helper_b(self, part, have, x, yi, planes) -> np.ndarray:
        g = self.geom
        b = self._take(part, have, x, yi, planes).copy()
        nf = ~g.fixed[x, yi, planes]
        if np.any(nf):
            pl = planes[nf]
            a_comp = self._take(part, have, g.digits[pl, yi], yi, g.companion_plane[x, yi, pl])
            b[nf] = self.coupler.couple(part[x, yi, pl], a_comp)[0]
        return b

    def _section_word(self, part, have, skip: Sequence[int], planes) -> np.ndarray:
        p, g = self.params, self.geom
        word = np.zeros((p.parent_n, len(planes), part.shape[3]), dtype=part.dtype)
        for j in range(p.parent_n):
            if j in skip:
                continue
            x, y = g.node(j)
            word[j] = self._helper_b(part, have, x, y - 1, planes)
        return word

    def _scatter_failed(self, out, sec_values, part, have, x0, y0, planes):
        """Fill the failed node from the decoded B values of its section."""
        g = self.geom
        yi = y0 - 1
        out[planes] = sec_values[x0]
        for x in range(self.params.q):
            if x == x0:
                continue
            a_self = self._take(part, have, x, yi, planes)
            rec = self.coupler.recover_any2({"B1": sec_values[x], "A1": a_self})
            out[planes + (x - x0) * g.weights[yi]] = rec["A2"]

    def _repair_scaled(self, part, have, x0, y0, Z0) -> np.ndarray:
        p, g, f = self.params, self.geom, self.field
        yi = y0 - 1
        sec = [g.col(x, y0) for x in range(p.q)]
        word = self._section_word(part, have, sec, Z0)
        others = [x for x in range(p.q) if x != x0]
        rhs = f.matvec(self.theta.matrix[:, [g.col(x, y0) for x in others]],
                       np.stack([self._take(part, have, x, yi, Z0) for x in others]))
        scales = [1 if x == x0 else self.coupler.u for x in range(p.q)]
        sol = smds_solve(self.theta, word, sec, rhs_adjust=rhs, col_scale=scales)
        out = np.zeros((p.alpha, part.shape[3]), dtype=part.dtype)
        out[Z0] = sol[x0]
        for x in others:
            out[Z0 + (x - x0) * g.weights[yi]] = sol[x]
        return out

    def _repair_generic(self, part, have, x0, y0, Z0) -> np.ndarray:
        p, g = self.params, self.geom
        sec = [g.col(x, y0) for x in range(p.q)]
        word = self._section_word(part, have, sec, Z0)
        bsec = self.base.decode(word, sec)
        out = np.zeros((p.alpha, part.shape[3]), dtype=part.dtype)
        self._scatter_failed(out, bsec, part, have, x0, y0, Z0)
        return out

    def _repair_aloof(self, part, have, x0, y0, aloof: Node, Z0) -> np.ndarray:
        p, g = self.params, self.geom
        xa, ya = aloof
        ai = ya - 1
        sec = [g.col(x, y0) for x in range(p.q)]
        unknowns = sec + [g.col(xa, ya)]
        on_aloof = g.digits[Z0, ai] == xa
        out = np.zeros((p.alpha, part.shape[3]), dtype=part.dtype)
        # score-1 planes first: their aloof symbols feed the score-2 planes
        for planes in (Z0[~on_aloof], Z0[on_aloof]):
            if not len(planes):
                continue
            word = self._section_word(part, have, unknowns, planes)
            sol = self.base.decode(word, unknowns)
            self._scatter_failed(out, sol[: p.q], part, have, x0, y0, planes)
            b_aloof = sol[p.q]
            nf = ~g.fixed[xa, ai, planes]
            a_aloof = b_aloof.copy()
            if np.any(nf):
                pl = planes[nf]
                a_comp = self._take(part, have, g.digits[pl, ai], ai, g.companion_plane[xa, ai, pl])
                a_aloof[nf] = self.coupler.recover_any2({"B1": b_aloof[nf], "A2": a_comp})["A1"]
            part[xa, ai, planes] = a_aloof
            have[xa, ai, planes] = True
        return out


# ---------------- factories ----------------

def build_codec(params: MsrParams) -> MsrCodec:
    alpha = params.alphabet
    if alpha is None or alpha.kind == "gf":
        m = alpha.m if alpha is not None else degree_for(params.parent_n)
        fld = build_field(m)
        theta = build_theta(params.r, params.parent_n, fld, kind=params.theta_kind, section=params.q)
        u = alpha.u if alpha is not None and alpha.u else pick_u(fld).u
        return MsrCodec(params, ThetaCode(theta), ScalarCoupler(fld, u))
    if alpha.kind == "rdp":
        _, codec = generic_instance(rdp_codec(alpha.p), build_vector_coupler(alpha.m))
        return codec
    raise ParamError(f"unknown alphabet {alpha.kind!r}")


def generic_instance(base: VectorMdsCode, coupler: PairCoupler) -> Tuple[MsrParams, MsrCodec]:
    """MSR code over the base code's alphabet, e.g. RDP p=5 -> (6, 4, 5, 8, 4)."""
    q = base.n - base.k
    if q < 2 or base.n % q:
        raise ParamError(f"base code (n={base.n}, k={base.k}) does not factor as n = q t with n-k = q")
    t = base.n // q
    if t < 2:
        raise ParamError(f"base code (n={base.n}, k={base.k}) gives t={t} < 2")
    if getattr(coupler, "m", base.symbol_bits) != base.symbol_bits:
        raise ParamError(f"coupler width {coupler.m} does not match the {base.symbol_bits}-bit alphabet")
    p = getattr(base, "p", 0)
    alphabet = AlphabetSpec("rdp", base.symbol_bits, p=p)
    params = MsrParams(q=q, t=t, d_mode="n-1", n=base.n, k=base.n - q, d=base.n - 1,
                       alpha=q ** t, beta=q ** (t - 1), r=q, alphabet=alphabet, theta_kind="rdp")
    return params, MsrCodec(params, base, coupler)


def codec_for(q: int, t: int, d_choice="n-1", base: str = "gf", theta_kind: Optional[str] = None) -> MsrCodec:
    return build_codec(derive_params(q, t, d_choice, theta_kind=theta_kind, base=base))
