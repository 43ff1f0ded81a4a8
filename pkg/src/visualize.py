# src/visualize.py
from __future__ import annotations
import os, sys, argparse
import pandas as pd
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .config import data_dir

# ------------------------- utils -------------------------

def _warn(msg: str):
    print(f"[viz] {msg}", file=sys.stderr)

def _savefig(path: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    plt.tight_layout()
    plt.savefig(path, dpi=150)
    plt.close()
    print(f"[viz] saved -> {path}", file=sys.stderr)

# ------------------------- bench plot -------------------------

def plot_bench(df: pd.DataFrame, out_path: str) -> str:
    """Grouped bars: MSR repair bytes vs. plain-MDS baseline bytes per (q,t)."""
    need = ["q", "t", "repair_bytes", "baseline_bytes", "ratio"]
    miss = [c for c in need if c not in df.columns]
    if miss:
        raise ValueError(f"bench table is missing columns: {miss}")
    if df.empty:
        _warn("empty bench table, nothing to plot")
        return ""
    labels = [f"({int(q)},{int(t)})" for q, t in zip(df["q"], df["t"])]
    xs = np.arange(len(df))
    w = 0.38
    fig, ax = plt.subplots(figsize=(max(5.0, 1.1 * len(df) + 2), 4))
    ax.bar(xs - w / 2, df["repair_bytes"], width=w, label="MSR repair (d*beta)")
    ax.bar(xs + w / 2, df["baseline_bytes"], width=w, label="MDS baseline (k*alpha)")
    for i, r in enumerate(df["ratio"]):
        ax.text(xs[i], max(df["repair_bytes"].iloc[i], df["baseline_bytes"].iloc[i]),
                f"{float(r):.4f}", ha="center", va="bottom", fontsize=8)
    ax.set_xticks(xs)
    ax.set_xticklabels(labels)
    ax.set_xlabel("(q, t)")
    ax.set_ylabel("bytes per repair")
    ax.set_yscale("log")
    ax.set_title("Single-node repair traffic")
    ax.legend()
    _savefig(out_path)
    return out_path

def main():
    ap = argparse.ArgumentParser(description="Plot a bench CSV written by `clmsr bench --csv`")
    ap.add_argument("csv", help="bench CSV path")
    ap.add_argument("--out", default=None, help="PNG path (default: <data>/plots/bench.png)")
    args = ap.parse_args()
    df = pd.read_csv(args.csv)
    out = args.out or os.path.join(data_dir(), "plots", "bench.png")
    plot_bench(df, out)

if __name__ == "__main__":
    main()
