# src/node_store.py
from __future__ import annotations
import os, shutil
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple
import numpy as np
from tenacity import retry, retry_if_exception, stop_after_attempt, wait_exponential

from .errors import ShardFormatError
from .shard_format import HEADER_SIZE, ShardHeader, crc32, shard_relpath, symbol_dtype

Node = Tuple[int, int]


@dataclass(frozen=True)
class AccessRecord:
    op: str          # "read" | "write"
    node: Node
    stripe: int
    planes: int      # planes touched
    symbols: int


class AccessLog:
    """Every store read/write lands here; repair reports are built from it."""

    def __init__(self):
        self.records: List[AccessRecord] = []

    def add(self, rec: AccessRecord):
        self.records.append(rec)

    def mark(self) -> int:
        return len(self.records)

    def since(self, mark: int, op: str = "read") -> List[AccessRecord]:
        return [r for r in self.records[mark:] if r.op == op]

    def clear(self):
        self.records.clear()


_PERMANENT = (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError)


def _transient(exc: BaseException) -> bool:
    return isinstance(exc, OSError) and not isinstance(exc, _PERMANENT)


_io_retry = retry(
    reraise=True,
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=1, max=4),
    retry=retry_if_exception(_transient),
)


class NodeStore:
    """alpha symbols per stripe for one storage node."""

    def __init__(self, node: Node, alpha: int, m: int, log: Optional[AccessLog] = None):
        self.node = (int(node[0]), int(node[1]))
        self.alpha = alpha
        self.m = m
        self.dtype = symbol_dtype(m)
        self.log = log if log is not None else AccessLog()

    def _log(self, op: str, stripe: int, planes: int):
        self.log.add(AccessRecord(op, self.node, stripe, planes, planes))

    def read(self, stripe: int, planes: Optional[np.ndarray] = None) -> np.ndarray:
        vals = self._read(stripe, planes)
        self._log("read", stripe, self.alpha if planes is None else len(planes))
        return vals

    def write(self, stripe: int, symbols: np.ndarray) -> int:
        """Store one stripe; returns the crc32 of the payload bytes."""
        sym = np.asarray(symbols).astype(self.dtype).reshape(self.alpha)
        crc = self._write(stripe, sym)
        self._log("write", stripe, self.alpha)
        return crc

    # subclasses
    def _read(self, stripe, planes):
        raise NotImplementedError

    def _write(self, stripe, sym) -> int:
        raise NotImplementedError

    def has(self, stripe: int) -> bool:
        raise NotImplementedError

    def wipe(self):
        raise NotImplementedError


class MemoryNodeStore(NodeStore):
    def __init__(self, node: Node, alpha: int, m: int, log: Optional[AccessLog] = None):
        super().__init__(node, alpha, m, log)
        self._data: Dict[int, np.ndarray] = {}

    def _read(self, stripe, planes):
        if stripe not in self._data:
            raise KeyError(f"node {self.node} holds no stripe {stripe}")
        arr = self._data[stripe]
        return arr.copy() if planes is None else arr[planes]

    def _write(self, stripe, sym):
        self._data[stripe] = sym.copy()
        return crc32(sym.tobytes())

    def has(self, stripe: int) -> bool:
        return stripe in self._data

    def wipe(self):
        self._data.clear()


class DirectoryNodeStore(NodeStore):
    """node_<x>_<y>/stripe_<i>.shard files under ``root``; reads go through memmap."""

    def __init__(self, root: str, node: Node, alpha: int, m: int,
                 header_for: Callable[[int, int, int], ShardHeader],
                 log: Optional[AccessLog] = None, verify_headers: bool = True):
        super().__init__(node, alpha, m, log)
        self.root = root
        self.header_for = header_for
        self.verify_headers = verify_headers

    def path(self, stripe: int) -> str:
        return os.path.join(self.root, shard_relpath(self.node[0], self.node[1], stripe))

    @property
    def node_dir(self) -> str:
        return os.path.dirname(self.path(0))

    def exists(self) -> bool:
        return os.path.isdir(self.node_dir)

    def header(self, stripe: int) -> ShardHeader:
        with open(self.path(stripe), "rb") as f:
            return ShardHeader.unpack(f.read(HEADER_SIZE))

    @_io_retry
    def _read(self, stripe, planes):
        path = self.path(stripe)
        if self.verify_headers:
            want = self.header_for(self.node[0], self.node[1], stripe)
            if self.header(stripe) != want:
                raise ShardFormatError(f"{path}: header does not match the code parameters")
        mm = np.memmap(path, dtype=self.dtype, mode="r", offset=HEADER_SIZE, shape=(self.alpha,))
        try:
            return np.array(mm) if planes is None else np.array(mm[planes])
        finally:
            del mm

    @_io_retry
    def _write(self, stripe, sym):
        path = self.path(stripe)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        payload = sym.tobytes()
        with open(path, "wb") as f:
            f.write(self.header_for(self.node[0], self.node[1], stripe).pack())
            f.write(payload)
        return crc32(payload)

    @_io_retry
    def payload_crc(self, stripe: int) -> int:
        with open(self.path(stripe), "rb") as f:
            f.seek(HEADER_SIZE)
            return crc32(f.read())

    def has(self, stripe: int) -> bool:
        return os.path.exists(self.path(stripe))

    def wipe(self):
        if os.path.isdir(self.node_dir):
            shutil.rmtree(self.node_dir)
