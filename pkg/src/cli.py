# src/cli.py
from __future__ import annotations
import argparse, os, sys
from typing import Dict, List, Optional, Tuple
import numpy as np
import pandas as pd

from . import config
from .cube import ErasurePattern, intersection_score, partition, pict, plane_incidence
from .errors import (ClusterError, DecodeError, ManifestError, MsrError, ParamError, RepairError,
                     ShardFormatError)
from .msr_codec import DataCube, MsrCodec, MsrParams, build_codec, derive_params, derive_params_from_nk
from .node_store import AccessLog, DirectoryNodeStore
from .rdp import is_odd_prime
from .shard_format import Manifest, read_manifest, shard_relpath, write_manifest
from .storage_sim import Cluster

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2
EXIT_TOO_FEW = 3
EXIT_RESTRICTION = 4

MANIFEST_NAME = "manifest.txt"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"[ERR] {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class _Exit(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


# ------------------------- output -------------------------

def _emit(**kv):
    for k, v in kv.items():
        print(f"{k}={v}")

def _info(tag: str, msg: str):
    if not config.quiet():
        print(f"[{tag}] {msg}", file=sys.stderr)

def _node(text: str) -> Tuple[int, int]:
    try:
        x, y = text.split(",")
        return int(x), int(y)
    except ValueError:
        raise _Exit(EXIT_USAGE, f"node must look like x,y (got {text!r})")

# ------------------------- manifest <-> codec -------------------------

def params_from_manifest(man: Manifest) -> MsrParams:
    if man.shorten_by:
        params = derive_params_from_nk(man.n, man.k, theta_kind=man.theta_kind)
    elif man.base == "rdp":
        params = derive_params(man.q, man.t, "n-1", base="rdp")
    else:
        params = derive_params(man.q, man.t, man.d_mode, theta_kind=man.theta_kind)
    a = params.alphabet
    want = (man.n, man.k, man.d, man.alpha, man.beta, man.m)
    got = (params.n, params.k, params.d, params.alpha, params.beta, a.m)
    if want != got or (man.base == "gf" and (a.modulus, a.u) != (man.modulus, man.u)) \
            or (man.base == "rdp" and a.p != man.p):
        raise ManifestError("manifest parameters do not describe a code this tool can build")
    return params

def manifest_for(codec: MsrCodec, stripes: int = 0, original_length: int = 0) -> Manifest:
    p = codec.params
    a = p.alphabet
    if codec.is_field:
        points = ",".join(str(v) for v in codec.theta.points)
        coupler = f"scalar:u={codec.coupler.u}"
    else:
        points = ""
        coupler = f"vector:m={codec.coupler.m},poly={codec.coupler.poly:#x}"
    return Manifest(q=p.q, t=p.t, d_mode=p.d_mode, base=a.kind, n=p.n, k=p.k, d=p.d,
                    alpha=p.alpha, beta=p.beta, r=p.r, shorten_by=p.shorten_by, m=a.m,
                    modulus=a.modulus, u=a.u, p=a.p, theta_kind=p.theta_kind,
                    theta_points=points, coupler=coupler, stripes=stripes,
                    original_length=original_length, symbol_bytes=a.byte_width)

def check_manifest_codec(man: Manifest, codec: MsrCodec) -> None:
    """The rebuilt codec must use the manifest's evaluation points, coupler and column order."""
    built = manifest_for(codec)
    for key in ("theta_points", "coupler", "column_order"):
        if getattr(man, key) != getattr(built, key):
            raise ManifestError(f"manifest {key}={getattr(man, key)!r} but this tool builds "
                                f"{getattr(built, key)!r}")

def _dir_stores(codec: MsrCodec, man: Manifest, root: str, log: AccessLog) -> Dict[Tuple[int, int], DirectoryNodeStore]:
    return {nd: DirectoryNodeStore(root, nd, man.alpha, man.m, man.header_for, log=log)
            for nd in codec.real_nodes}

def _open(manifest_path: str, shards: Optional[str]):
    man = read_manifest(manifest_path)
    codec = build_codec(params_from_manifest(man))
    check_manifest_codec(man, codec)
    root = shards or os.path.dirname(os.path.abspath(manifest_path))
    return man, codec, root

def _scan(codec: MsrCodec, man: Manifest, stores) -> List[Tuple[int, int]]:
    """Missing nodes; raises on a present shard whose checksum or header is wrong."""
    missing = []
    for nd in codec.real_nodes:
        st = stores[nd]
        # an empty file writes no shards, so node directories never appear
        if (man.stripes and not st.exists()) or not all(st.has(s) for s in range(man.stripes)):
            missing.append(nd)
            continue
        for s in range(man.stripes):
            rel = shard_relpath(nd[0], nd[1], s)
            man.check_header(st.header(s), nd[0], nd[1], s)
            if man.shards.get(rel) != st.payload_crc(s):
                raise _Exit(EXIT_INTEGRITY, f"checksum mismatch on {rel}")
    return missing

def _cluster(codec, man, stores, log, missing, quiet) -> Cluster:
    cl = Cluster(codec, stores=stores, log=log, quiet=quiet)
    cl.stripes = man.stripes
    cl.original_length = man.original_length
    if len(missing) > codec.params.r:
        raise _Exit(EXIT_TOO_FEW, f"only {len(codec.real_nodes) - len(missing)} nodes survive; "
                                  f"need k={codec.params.k}")
    cl.failed = set(missing)
    return cl

# ------------------------- commands -------------------------

def cmd_encode(args) -> int:
    cfg = config.codec_defaults()
    base = args.base or cfg["base"]
    if args.n is not None or args.k is not None:
        if args.n is None or args.k is None:
            raise _Exit(EXIT_USAGE, "--n and --k go together")
        params = derive_params_from_nk(args.n, args.k)
    elif base == "rdp":
        p = args.p or cfg["rdp_prime"]
        if not is_odd_prime(p):
            raise _Exit(EXIT_USAGE, f"RDP needs an odd prime p (got {p})")
        params = derive_params(2, (p + 1) // 2, "n-1", base="rdp")
    else:
        params = derive_params(args.q or cfg["q"], args.t or cfg["t"], args.d or cfg["d"],
                               theta_kind=args.theta or cfg["theta_kind"])
    codec = build_codec(params)
    with open(args.input, "rb") as f:
        payload = f.read()
    out = args.out or os.path.join(os.getcwd(), cfg["out_dir"])
    os.makedirs(out, exist_ok=True)
    man = manifest_for(codec)
    log = AccessLog()
    cl = Cluster(codec, stores=_dir_stores(codec, man, out, log), log=log,
                 workers=args.workers or cfg["workers"], quiet=args.quiet or config.quiet())
    _info("encode", f"(n,k,d)=({params.n},{params.k},{params.d}) alpha={params.alpha} -> {out}")
    res = cl.ingest(payload)
    man.stripes = res.stripes
    man.original_length = res.original_length
    man.shards = res.checksums
    mpath = os.path.join(out, MANIFEST_NAME)
    write_manifest(mpath, man)
    _emit(n=params.n, k=params.k, d=params.d, alpha=params.alpha, beta=params.beta,
          stripes=res.stripes, bytes=res.original_length, shards=len(res.checksums), manifest=mpath)
    return EXIT_OK

def cmd_decode(args) -> int:
    man, codec, root = _open(args.manifest, args.shards)
    log = AccessLog()
    stores = _dir_stores(codec, man, root, log)
    missing = _scan(codec, man, stores)
    if missing:
        _info("decode", f"erased nodes: {' '.join(f'{x},{y}' for x, y in missing)}")
    cl = _cluster(codec, man, stores, log, missing, args.quiet or config.quiet())
    data = cl.read_payload()
    with open(args.out, "wb") as f:
        f.write(data)
    _emit(bytes=len(data), stripes=man.stripes, erased=len(missing), out=args.out)
    return EXIT_OK

def cmd_repair(args) -> int:
    man, codec, root = _open(args.manifest, args.shards)
    node = _node(args.node)
    aloof = _node(args.aloof) if args.aloof else None
    log = AccessLog()
    stores = _dir_stores(codec, man, root, log)
    if node not in stores:
        raise _Exit(EXIT_USAGE, f"node {node} is not stored by this code")
    missing = _scan(codec, man, stores)
    cl = _cluster(codec, man, stores, log, missing, args.quiet or config.quiet())
    rep = cl.repair(node, aloof=aloof)
    if rep.mode != "noop":
        for s in range(man.stripes):
            rel = shard_relpath(node[0], node[1], s)
            if stores[node].payload_crc(s) != man.shards.get(rel):
                raise _Exit(EXIT_INTEGRITY, f"regenerated {rel} does not match its checksum")
    reads = [r for r in log.records if r.op == "read"]
    only_z0 = rep.mode == "msr" and all(r.planes == codec.params.beta for r in reads)
    _emit(node=f"{node[0]},{node[1]}", mode=rep.mode, helpers=rep.helpers,
          aloof=rep.as_dict()["aloof"] or "-", planes_per_helper=rep.planes_per_helper,
          symbols_transferred=rep.symbols_transferred, bytes_transferred=rep.bytes_transferred,
          baseline_bytes=rep.baseline_bytes, ratio=f"{rep.ratio:.4f}",
          reads_only_repair_planes=int(only_z0))
    return EXIT_OK

def cmd_verify(args) -> int:
    man, codec, root = _open(args.manifest, args.shards)
    log = AccessLog()
    stores = _dir_stores(codec, man, root, log)
    missing = _scan(codec, man, stores)
    if missing:
        _emit(checksums_ok=1, missing=len(missing), parity_ok=0)
        raise _Exit(EXIT_TOO_FEW, f"{len(missing)} nodes missing; parity needs every node")
    cl = _cluster(codec, man, stores, log, missing, True)
    bad = 0
    for first in range(0, man.stripes, 64):
        count = min(64, man.stripes - first)
        cube = cl._read_nodes(codec.real_nodes, first, count)
        for s in range(count):
            sub = DataCube(cube.symbols[..., s:s + 1])
            if not codec.verify_parity(sub):
                bad += 1
    _emit(checksums_ok=1, missing=0, stripes=man.stripes, parity_failures=bad, parity_ok=int(bad == 0))
    return EXIT_OK if bad == 0 else EXIT_INTEGRITY

def cmd_inspect(args) -> int:
    if args.manifest:
        man = read_manifest(args.manifest)
        params = params_from_manifest(man)
        _emit(**{k: v for k, v in params.describe().items()}, stripes=man.stripes,
              original_length=man.original_length, shards=len(man.shards),
              ratio=f"{params.ratio:.4f}")
        q, t = man.q, man.t
    else:
        q, t = args.q, args.t
        if q is None or t is None:
            raise _Exit(EXIT_USAGE, "inspect needs a manifest or --q/--t")
    if args.plane:
        z = tuple(int(v) for v in args.plane.split(","))
        if len(z) != t or any(not 0 <= v < q for v in z):
            raise _Exit(EXIT_USAGE, f"plane must have {t} digits in 0..{q - 1}")
        nodes = [_node(s) for s in args.erase.split(";")] if args.erase else []
        E = ErasurePattern(nodes, q, t)
        P = plane_incidence(z, q)
        part = partition(E, z)
        fmt = lambda s: " ".join(f"{x},{y}" for x, y in sorted(s, key=lambda n: (n[1], n[0]))) or "-"
        _emit(plane=",".join(map(str, z)), score=intersection_score(E, z),
              incidence=";".join("".join(str(v) for v in row) for row in P),
              e0=fmt(part.e0), e1=fmt(part.e1), e2=fmt(part.e2))
        print(pict(E, z, q), file=sys.stderr)
    return EXIT_OK

def _bench_row(q: int, t: int, d: str, stripes: int, seed: int, quiet: bool) -> dict:
    codec = build_codec(derive_params(q, t, d))
    p = codec.params
    rng = np.random.default_rng(seed)
    payload = rng.integers(0, 256, size=stripes * p.message_symbols * p.alphabet.m // 8,
                           dtype=np.uint8).tobytes()
    cl = Cluster(codec, seed=seed, quiet=quiet)
    cl.ingest(payload)
    nodes = cl.live_nodes
    victim = nodes[int(rng.integers(len(nodes)))]
    cl.fail_nodes([victim])
    rep = cl.repair(victim)
    return {"q": q, "t": t, "n": p.n, "k": p.k, "d": p.d, "alpha": p.alpha, "beta": p.beta,
            "stripes": cl.stripes, "node": f"{victim[0]},{victim[1]}",
            "repair_symbols": rep.symbols_transferred // max(cl.stripes, 1),
            "baseline_symbols": p.baseline_symbols,
            "repair_bytes": rep.bytes_transferred, "baseline_bytes": rep.baseline_bytes,
            "ratio": rep.ratio, "formula_ratio": p.ratio}

def cmd_bench(args) -> int:
    cfg = config.codec_defaults()
    stripes = args.stripes or cfg["bench_stripes"]
    seed = cfg["bench_seed"] if args.seed is None else args.seed
    quiet = args.quiet or config.quiet()
    grid = config.bench_grid() if args.sweep else [(args.q or cfg["q"], args.t or cfg["t"])]
    rows = []
    for q, t in grid:
        _info("bench", f"q={q} t={t} stripes={stripes}")
        row = _bench_row(q, t, args.d or cfg["d"], stripes, seed, quiet)
        rows.append(row)
        _emit(q=q, t=t, repair_bytes=row["repair_bytes"], baseline_bytes=row["baseline_bytes"],
              ratio=f"{row['ratio']:.4f}", ratio_exact=f"{row['ratio']:.6f}")
    df = pd.DataFrame(rows)
    if args.csv:
        os.makedirs(os.path.dirname(os.path.abspath(args.csv)), exist_ok=True)
        df.to_csv(args.csv, index=False)
        print(f"Saved: {args.csv} (rows={len(df)})", file=sys.stderr)
    if args.plot:
        from .visualize import plot_bench
        plot_bench(df, args.plot)
    if any(abs(r["ratio"] - r["formula_ratio"]) > 1e-12 for r in rows):
        raise _Exit(EXIT_INTEGRITY, "counted repair traffic differs from d*beta")
    return EXIT_OK

# ------------------------- parser -------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clmsr", description="Coupled-layer MSR erasure coding: encode, decode, repair, bench")
    p.add_argument("--quiet", action="store_true", help="no progress bars or status lines")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("encode", help="Encode a file into n shard directories plus a manifest")
    sp.add_argument("input")
    sp.add_argument("--q", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--d", choices=["n-1", "n-2"])
    sp.add_argument("--base", choices=["gf", "rdp"])
    sp.add_argument("--p", type=int, help="RDP prime (base rdp)")
    sp.add_argument("--n", type=int, help="shortened code length (with --k)")
    sp.add_argument("--k", type=int)
    sp.add_argument("--theta", choices=["vandermonde", "cauchy_identity"])
    sp.add_argument("--out")
    sp.add_argument("--workers", type=int)

    sp2 = sub.add_parser("decode", help="Rebuild the original file from >= k node directories")
    sp2.add_argument("manifest")
    sp2.add_argument("--shards", help="shard root (default: manifest directory)")
    sp2.add_argument("--out", required=True)

    sp3 = sub.add_parser("repair", help="Regenerate one lost node from beta symbols per helper")
    sp3.add_argument("manifest")
    sp3.add_argument("--node", required=True, help="x,y")
    sp3.add_argument("--aloof", help="x,y of the node left out (d=n-2 codes)")
    sp3.add_argument("--shards")

    sp4 = sub.add_parser("verify", help="Check shard checksums and every parity equation")
    sp4.add_argument("manifest")
    sp4.add_argument("--shards")

    sp5 = sub.add_parser("inspect", help="Show code parameters and plane/erasure diagnostics")
    sp5.add_argument("manifest", nargs="?")
    sp5.add_argument("--q", type=int)
    sp5.add_argument("--t", type=int)
    sp5.add_argument("--erase", help="erased nodes, e.g. '1,2;2,2;2,3'")
    sp5.add_argument("--plane", help="plane digits z_1..z_t, e.g. '1,2,3,1,0'")

    sp6 = sub.add_parser("bench", help="Repair traffic vs. plain-MDS baseline")
    sp6.add_argument("--q", type=int)
    sp6.add_argument("--t", type=int)
    sp6.add_argument("--d", choices=["n-1", "n-2"])
    sp6.add_argument("--stripes", type=int)
    sp6.add_argument("--seed", type=int)
    sp6.add_argument("--sweep", action="store_true", help="run every (q,t) in configs/bench.yaml")
    sp6.add_argument("--csv", help="write the table to this CSV")
    sp6.add_argument("--plot", help="write a bar chart PNG")
    return p

COMMANDS = {"encode": cmd_encode, "decode": cmd_decode, "repair": cmd_repair,
            "verify": cmd_verify, "inspect": cmd_inspect, "bench": cmd_bench}

def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except _Exit as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return e.code
    except RepairError as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return EXIT_RESTRICTION
    except ClusterError as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return EXIT_TOO_FEW
    except (ShardFormatError, ManifestError, DecodeError) as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (ParamError, MsrError, OSError) as e:
        print(f"[ERR] {e}", file=sys.stderr)
        return EXIT_USAGE

def main():
    sys.exit(run())

if __name__ == "__main__":
    main()
