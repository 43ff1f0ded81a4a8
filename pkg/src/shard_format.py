# src/shard_format.py
"""On-disk formats: shard header, manifest, and byte <-> symbol packing.

Shard file = 30-byte little-endian header + payload (alpha symbols, each
ceil(m/8) bytes).  The manifest is UTF-8 ``key=value`` lines followed by a
``[shards]`` section of ``<relative path>=<crc32 hex>`` entries.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ManifestError, ShardFormatError

MAGIC = b"CLMS"
VERSION = 1
HEADER_FMT = "<4sBBBBBBIHBBIQ"
HEADER_SIZE = struct.calcsize(HEADER_FMT)

D_MODE_CODES = {"n-1": 0, "n-2": 1}
BASE_CODES = {"gf": 0, "rdp": 1}


@dataclass(frozen=True)
class ShardHeader:
    q: int
    t: int
    d_mode: str
    base: str
    m: int
    modulus: int      # gf only; 0 for rdp
    u: int            # gf: coupling constant; rdp: the prime p
    x: int
    y: int
    stripe: int
    length: int       # payload bytes
    version: int = VERSION

    def pack(self) -> bytes:
        try:
            return struct.pack(HEADER_FMT, MAGIC, self.version, self.q, self.t,
                               D_MODE_CODES[self.d_mode], BASE_CODES[self.base], self.m,
                               self.modulus, self.u, self.x, self.y, self.stripe, self.length)
        except (KeyError, struct.error) as e:
            raise ShardFormatError(f"cannot pack header {self}: {e}") from e

    @classmethod
    def unpack(cls, raw: bytes) -> "ShardHeader":
        if len(raw) < HEADER_SIZE:
            raise ShardFormatError(f"header truncated: {len(raw)} < {HEADER_SIZE} bytes")
        (magic, version, q, t, dmode, base, m, modulus, u, x, y, stripe,
         length) = struct.unpack(HEADER_FMT, raw[:HEADER_SIZE])
        if magic != MAGIC:
            raise ShardFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ShardFormatError(f"unsupported shard version {version}")
        modes = {v: k for k, v in D_MODE_CODES.items()}
        bases = {v: k for k, v in BASE_CODES.items()}
        if dmode not in modes or base not in bases:
            raise ShardFormatError(f"bad mode/base codes {dmode}/{base}")
        return cls(q=q, t=t, d_mode=modes[dmode], base=bases[base], m=m, modulus=modulus,
                   u=u, x=x, y=y, stripe=stripe, length=length, version=version)


# ---------------- symbol packing ----------------

def symbol_dtype(m: int):
    return np.dtype(np.uint8) if m <= 8 else np.dtype("<u2")


def bytes_to_symbols(data: bytes, m: int) -> np.ndarray:
    """Split a byte stream into m-bit symbols (little-endian bit order, last one zero-padded)."""
    if not (2 <= m <= 16):
        raise ShardFormatError(f"symbol width m={m} out of range")
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if m == 8:
        return raw.copy()
    bits = np.unpackbits(raw, bitorder="little")
    pad = (-bits.size) % m
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    weights = (1 << np.arange(m, dtype=np.int64))
    syms = bits.reshape(-1, m).astype(np.int64) @ weights
    return syms.astype(np.uint8 if m <= 8 else np.uint16)


def symbols_to_bytes(symbols: np.ndarray, m: int, nbytes: int) -> bytes:
    """Inverse of ``bytes_to_symbols``; ``nbytes`` is the original length."""
    syms = np.asarray(symbols).reshape(-1)
    if m == 8:
        out = syms.astype(np.uint8).tobytes()
    else:
        shifts = np.arange(m, dtype=np.int64)
        bits = ((syms.astype(np.int64)[:, None] >> shifts[None, :]) & 1).astype(np.uint8).reshape(-1)
        out = np.packbits(bits, bitorder="little").tobytes()
    if len(out) < nbytes:
        raise ShardFormatError(f"{syms.size} symbols hold fewer than {nbytes} bytes")
    return out[:nbytes]


def symbols_needed(nbytes: int, m: int) -> int:
    return (nbytes * 8 + m - 1) // m


def crc32(payload: bytes) -> int:
    return zlib.crc32(payload) & 0xFFFFFFFF


def shard_relpath(x: int, y: int, stripe: int) -> str:
    return f"node_{x}_{y}/stripe_{stripe}.shard"


# ---------------- manifest ----------------

_INT_KEYS = ("version", "q", "t", "n", "k", "d", "alpha", "beta", "r", "shorten_by", "m",
             "modulus", "u", "p", "stripes", "original_length", "symbol_bytes")


@dataclass
class Manifest:
    q: int
    t: int
    d_mode: str
    base: str
    n: int
    k: int
    d: int
    alpha: int
    beta: int
    r: int
    shorten_by: int
    m: int
    modulus: int
    u: int
    p: int
    theta_kind: str
    theta_points: str
    coupler: str
    stripes: int
    original_length: int
    symbol_bytes: int
    column_order: str = "(y-1)*q+x"
    version: int = VERSION
    shards: Dict[str, int] = field(default_factory=dict)

    def to_text(self) -> str:
        lines: List[str] = ["# clmsr manifest", "format=clmsr"]
        for key in ("version", "q", "t", "d_mode", "base", "n", "k", "d", "alpha", "beta", "r",
                    "shorten_by", "m", "modulus", "u", "p", "theta_kind", "theta_points",
                    "coupler", "column_order", "stripes", "original_length", "symbol_bytes"):
            lines.append(f"{key}={getattr(self, key)}")
        lines.append("[shards]")
        for rel in sorted(self.shards):
            lines.append(f"{rel}={self.shards[rel]:08x}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Manifest":
        kv: Dict[str, str] = {}
        shards: Dict[str, int] = {}
        in_shards = False
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line == "[shards]":
                in_shards = True
                continue
            if "=" not in line:
                raise ManifestError(f"line {lineno}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            if in_shards:
                try:
                    shards[key.strip()] = int(val.strip(), 16)
                except ValueError as e:
                    raise ManifestError(f"line {lineno}: bad checksum {val!r}") from e
            else:
                kv[key.strip()] = val.strip()
        if kv.get("format") != "clmsr":
            raise ManifestError("not a clmsr manifest")
        kv.pop("format")
        try:
            args = {k: (int(v) if k in _INT_KEYS else v) for k, v in kv.items()}
            return cls(shards=shards, **args)
        except (TypeError, ValueError) as e:
            raise ManifestError(f"malformed manifest: {e}") from e

    def header_for(self, x: int, y: int, stripe: int) -> ShardHeader:
        return ShardHeader(q=self.q, t=self.t, d_mode=self.d_mode, base=self.base, m=self.m,
                           modulus=self.modulus, u=self.u if self.base == "gf" else self.p,
                           x=x, y=y, stripe=stripe, length=self.alpha * self.symbol_bytes)

    def check_header(self, h: ShardHeader, x: int, y: int, stripe: int) -> None:
        want = self.header_for(x, y, stripe)
        if h != want:
            raise ShardFormatError(f"header of {shard_relpath(x, y, stripe)} does not match the manifest")

    def nodes(self) -> List[Tuple[int, int]]:
        seen = []
        for rel in self.shards:
            node = rel.split("/", 1)[0]
            _, x, y = node.split("_")
            nd = (int(x), int(y))
            if nd not in seen:
                seen.append(nd)
        return sorted(seen, key=lambda nd: ((nd[1] - 1) * self.q + nd[0]))


def read_manifest(path: str) -> Manifest:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return Manifest.from_text(f.read())
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e


def write_manifest(path: str, manifest: Manifest) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(manifest.to_text())
