# src/config.py
from __future__ import annotations
import os
from typing import Any, Dict, List, Tuple
import yaml
from dotenv import load_dotenv

# Load .env (CLMS_DATA_DIR / CLMS_QUIET take effect)
load_dotenv()

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)
CONFIG_DIR = os.path.join(ROOT, "configs")

# Built-in defaults; configs/codec.yaml overrides them, CLI flags override both.
DEFAULTS: Dict[str, Any] = {
    "q": 4,
    "t": 4,
    "d": "n-1",
    "base": "gf",
    "theta_kind": None,
    "rdp_prime": 5,
    "bench_stripes": 2,
    "bench_seed": 7,
    "out_dir": "shards",
    "workers": 4,
}

def load_yaml(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)

def _load_optional(name: str) -> Dict[str, Any]:
    path = os.path.join(CONFIG_DIR, name)
    if not os.path.exists(path):
        return {}
    return load_yaml(path) or {}

def codec_defaults() -> Dict[str, Any]:
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in _load_optional("codec.yaml").items() if v is not None or k == "theta_kind"})
    return cfg

def bench_grid() -> List[Tuple[int, int]]:
    raw = _load_optional("bench.yaml").get("grid") or [[2, 2], [2, 3], [4, 5]]
    return [(int(q), int(t)) for q, t in raw]

def data_dir() -> str:
    path = os.getenv("CLMS_DATA_DIR") or os.path.join(ROOT, "data")
    return path.strip()

def quiet() -> bool:
    return os.getenv("CLMS_QUIET", "").strip().lower() in ("1", "true", "yes")
