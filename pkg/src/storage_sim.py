# src/storage_sim.py
"""Simulated storage cluster with byte-level repair accounting.

Each live node holds alpha symbols per stripe in a NodeStore.  Every store
access is logged; repair reports are derived from the log so the bandwidth
numbers are what the repair actually read, not what the formula says.
"""
from __future__ import annotations
import argparse, os, sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Tuple
import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import ClusterError
from .msr_codec import DataCube, MsrCodec, codec_for
from .node_store import AccessLog, MemoryNodeStore, NodeStore
from .shard_format import bytes_to_symbols, shard_relpath, symbols_needed, symbols_to_bytes

Node = Tuple[int, int]

BATCH_STRIPES = 128


@dataclass
class BandwidthReport:
    node: Node
    mode: str                   # msr | collect | baseline | noop
    stripes: int
    helpers: int                # fan-in
    planes_per_helper: int
    symbols_read: int
    symbols_transferred: int
    bytes_read: int
    bytes_transferred: int
    baseline_symbols: int
    baseline_bytes: int
    aloof: Optional[Node] = None

    @property
    def ratio(self) -> float:
        return self.bytes_transferred / self.baseline_bytes if self.baseline_bytes else 0.0

    def as_dict(self) -> dict:
        out = asdict(self)
        out["node"] = f"{self.node[0]},{self.node[1]}"
        out["aloof"] = "" if self.aloof is None else f"{self.aloof[0]},{self.aloof[1]}"
        out["ratio"] = round(self.ratio, 6)
        return out


@dataclass
class StripeSet:
    stripes: int
    original_length: int
    checksums: Dict[str, int]


class Cluster:
    def __init__(self, codec: MsrCodec, stores: Optional[Dict[Node, NodeStore]] = None,
                 seed: int = 0, workers: int = 4, quiet: bool = True, log: Optional[AccessLog] = None):
        self.codec = codec
        self.params = codec.params
        self.m = self.params.alphabet.m
        self.symbol_bytes = self.params.alphabet.byte_width
        self.log = log or AccessLog()
        if stores is None:
            stores = {nd: MemoryNodeStore(nd, self.params.alpha, self.m, self.log) for nd in codec.real_nodes}
        missing = [nd for nd in codec.real_nodes if nd not in stores]
        if missing:
            raise ClusterError(f"no store for nodes {missing}")
        self.stores = stores
        self.failed: set = set()
        self.stripes = 0
        self.original_length = 0
        self.rng = np.random.default_rng(seed)
        self.workers = workers
        self.quiet = quiet
        self.events: List[dict] = []

    # ---------------- helpers ----------------
    def _event(self, action: str, **kw):
        rec = {"seq": len(self.events), "action": action}
        rec.update(kw)
        self.events.append(rec)

    def event_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.events)

    @property
    def live_nodes(self) -> List[Node]:
        return [nd for nd in self.codec.real_nodes if nd not in self.failed]

    def _batches(self, desc: str):
        starts = range(0, self.stripes, BATCH_STRIPES)
        return tqdm(starts, desc=desc, disable=self.quiet or self.stripes <= BATCH_STRIPES, file=sys.stderr)

    def _write_node_batch(self, cube: DataCube, first: int, nodes: Iterable[Node]) -> Dict[str, int]:
        sums: Dict[str, int] = {}

        def _one(nd: Node):
            x, y = nd
            out = {}
            for s in range(cube.stripes):
                out[shard_relpath(x, y, first + s)] = self.stores[nd].write(first + s, cube.symbols[x, y - 1, :, s])
            return out

        nodes = list(nodes)
        if self.workers > 1 and len(nodes) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as ex:
                for part in ex.map(_one, nodes):
                    sums.update(part)
        else:
            for nd in nodes:
                sums.update(_one(nd))
        return sums

    def _read_nodes(self, nodes: Iterable[Node], first: int, count: int) -> DataCube:
        cube = self.codec.empty_cube(count)
        for x, y in nodes:
            store = self.stores[(x, y)]
            for s in range(count):
                cube.symbols[x, y - 1, :, s] = store.read(first + s)
        return cube

    def _collection_erasures(self, must: Iterable[Node]) -> List[Node]:
        """``must`` plus random live nodes so that exactly k nodes are read."""
        must = list(dict.fromkeys(tuple(nd) for nd in must))
        if len(must) > self.params.r:
            raise ClusterError(f"{len(must)} nodes down; at most {self.params.r} can be rebuilt")
        pool = [nd for nd in self.live_nodes if nd not in must]
        extra = self.params.r - len(must)
        if extra:
            pick = self.rng.choice(len(pool), size=extra, replace=False)
            must += [pool[i] for i in sorted(pick)]
        return must

    def _report(self, node: Node, mode: str, mark: int, stripes: int, aloof=None) -> BandwidthReport:
        reads = self.log.since(mark, "read")
        per_node: Dict[Node, int] = {}
        for r in reads:
            per_node[r.node] = max(per_node.get(r.node, 0), r.planes)
        symbols = sum(r.symbols for r in reads)
        base = self.params.baseline_symbols * stripes
        return BandwidthReport(node=node, mode=mode, stripes=stripes, helpers=len(per_node),
                               planes_per_helper=max(per_node.values()) if per_node else 0,
                               symbols_read=symbols, symbols_transferred=symbols,
                               bytes_read=symbols * self.symbol_bytes,
                               bytes_transferred=symbols * self.symbol_bytes,
                               baseline_symbols=base, baseline_bytes=base * self.symbol_bytes,
                               aloof=aloof)

    # ---------------- operations ----------------
    def ingest(self, payload: bytes) -> StripeSet:
        p = self.params
        syms = bytes_to_symbols(payload, self.m) if payload else np.zeros(0, dtype=np.uint8)
        per = p.message_symbols
        stripes = -(-syms.size // per) if syms.size else 0
        msg = np.zeros(stripes * per, dtype=self.codec.dtype)
        msg[: syms.size] = syms
        msg = msg.reshape(stripes, per).T if stripes else msg.reshape(per, 0)
        self.stripes = stripes
        self.original_length = len(payload)
        sums: Dict[str, int] = {}
        for first in self._batches("[encode] stripes"):
            cube = self.codec.encode_systematic(msg[:, first: first + BATCH_STRIPES])
            sums.update(self._write_node_batch(cube, first, self.codec.real_nodes))
        self._event("ingest", bytes=len(payload), stripes=stripes)
        return StripeSet(stripes=stripes, original_length=len(payload), checksums=sums)

    def fail_nodes(self, nodes: Iterable[Node]):
        nodes = [(int(x), int(y)) for x, y in nodes]
        for nd in nodes:
            if nd not in self.stores:
                raise ClusterError(f"unknown node {nd}")
        if len(self.failed | set(nodes)) > self.params.r:
            raise ClusterError(f"more than {self.params.r} concurrent failures cannot be recovered")
        for nd in nodes:
            self.stores[nd].wipe()
            self.failed.add(nd)
            self._event("fail", node=f"{nd[0]},{nd[1]}")

    def read_payload(self) -> bytes:
        """Collect the file from k live nodes."""
        E = self._collection_erasures(sorted(self.failed))
        readers = [nd for nd in self.codec.real_nodes if nd not in E]
        parts = []
        for first in self._batches("[decode] stripes"):
            count = min(BATCH_STRIPES, self.stripes - first)
            cube = self.codec.collect_data(self._read_nodes(readers, first, count), E)
            parts.append(self.codec.cube_to_message(cube))
        if not parts:
            return b""
        msg = np.concatenate(parts, axis=1).T.reshape(-1)
        return symbols_to_bytes(msg[: symbols_needed(self.original_length, self.m)], self.m,
                                self.original_length)

    def repair(self, node: Node, aloof: Optional[Node] = None, compare_baseline: bool = False) -> BandwidthReport:
        node = (int(node[0]), int(node[1]))
        if node not in self.stores:
            raise ClusterError(f"unknown node {node}")
        if node not in self.failed:
            rep = self._report(node, "noop", self.log.mark(), 0)
            self._event("repair", **rep.as_dict())
            return rep
        if len(self.failed) > 1:
            rep = self._repair_by_collection(node, "collect")
        else:
            rep = self._repair_msr(node, aloof)
            if compare_baseline:
                self._check_against_baseline(node)
        self.failed.discard(node)
        self._event("repair", **rep.as_dict())
        return rep

    def _pick_aloof(self, node: Node) -> Node:
        cands = [nd for nd in self.live_nodes if nd[1] != node[1]]
        return cands[int(self.rng.integers(len(cands)))]

    def _repair_msr(self, node: Node, aloof: Optional[Node]) -> BandwidthReport:
        x0, y0 = node
        if self.params.d_mode == "n-2" and aloof is None:
            aloof = self._pick_aloof(node)
        mark = self.log.mark()
        last = None
        for first in self._batches("[repair] stripes"):
            count = min(BATCH_STRIPES, self.stripes - first)

            def fetch(x, y, planes, first=first, count=count):
                st = self.stores[(x, y)]
                return np.stack([st.read(first + s, planes) for s in range(count)], axis=1)

            last = self.codec.repair_with(fetch, x0, y0, stripes=count, aloof=aloof)
            for s in range(count):
                self.stores[node].write(first + s, last.recovered[:, s])
        rep = self._report(node, "msr", mark, self.stripes, aloof=last.aloof if last else aloof)
        return rep

    def _repair_by_collection(self, node: Node, mode: str) -> BandwidthReport:
        E = self._collection_erasures([node] + sorted(self.failed - {node}))
        readers = [nd for nd in self.codec.real_nodes if nd not in E]
        mark = self.log.mark()
        x, y = node
        for first in self._batches(f"[{mode}] stripes"):
            count = min(BATCH_STRIPES, self.stripes - first)
            cube = self.codec.collect_data(self._read_nodes(readers, first, count), E)
            for s in range(count):
                self.stores[node].write(first + s, cube.symbols[x, y - 1, :, s])
        return self._report(node, mode, mark, self.stripes)

    def baseline_repair(self, node: Node) -> Tuple[BandwidthReport, np.ndarray]:
        """Regenerate ``node`` the plain-MDS way (k full nodes) without writing it back."""
        node = (int(node[0]), int(node[1]))
        E = self._collection_erasures([node] + sorted(self.failed - {node}))
        readers = [nd for nd in self.codec.real_nodes if nd not in E]
        mark = self.log.mark()
        out = []
        for first in range(0, self.stripes, BATCH_STRIPES):
            count = min(BATCH_STRIPES, self.stripes - first)
            cube = self.codec.collect_data(self._read_nodes(readers, first, count), E)
            out.append(cube.node(*node))
        rep = self._report(node, "baseline", mark, self.stripes)
        self._event("baseline", **rep.as_dict())
        content = np.concatenate(out, axis=1) if out else np.zeros((self.params.alpha, 0), dtype=self.codec.dtype)
        return rep, content

    def _check_against_baseline(self, node: Node):
        _, content = self.baseline_repair(node)
        mine = np.stack([self.stores[node].read(s) for s in range(self.stripes)], axis=1) if self.stripes else content
        if not np.array_equal(mine, content):
            raise ClusterError(f"MSR repair of {node} disagrees with the baseline regeneration")

    def snapshot(self) -> Dict[Node, np.ndarray]:
        return {nd: np.stack([st._read(s, None) for s in range(self.stripes)], axis=1)
                for nd, st in self.stores.items() if nd not in self.failed and self.stripes}


def main():
    ap = argparse.ArgumentParser(description="Run one failure/repair cycle on an in-memory cluster")
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--t", type=int, default=3)
    ap.add_argument("--d", default="n-1", choices=["n-1", "n-2"])
    ap.add_argument("--stripes", type=int, default=4)
    ap.add_argument("--fail", type=int, default=1, help="number of nodes to fail (default 1)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    codec = codec_for(args.q, args.t, args.d)
    cl = Cluster(codec, seed=args.seed, quiet=False)
    rng = np.random.default_rng(args.seed)
    payload = rng.integers(0, 256, size=args.stripes * codec.params.message_symbols * codec.params.alphabet.m // 8,
                           dtype=np.uint8).tobytes()
    cl.ingest(payload)
    nodes = cl.live_nodes
    picks = [nodes[i] for i in sorted(rng.choice(len(nodes), size=args.fail, replace=False))]
    cl.fail_nodes(picks)
    for nd in picks:
        cl.repair(nd)
    ok = cl.read_payload() == payload
    print(cl.event_frame().to_string(index=False))
    print(f"roundtrip_ok={int(ok)}")
    sys.exit(0 if ok else 2)


if __name__ == "__main__":
    main()
