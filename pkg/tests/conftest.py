from __future__ import annotations
from functools import lru_cache
import numpy as np
import pytest

from src.msr_codec import MsrCodec, build_codec, derive_params, derive_params_from_nk, generic_instance
from src.coupling import build_vector_coupler
from src.rdp import rdp_codec


@lru_cache(maxsize=None)
def field_codec(q: int, t: int, d: str = "n-1") -> MsrCodec:
    return build_codec(derive_params(q, t, d))


@lru_cache(maxsize=None)
def shortened_codec(n: int, k: int) -> MsrCodec:
    return build_codec(derive_params_from_nk(n, k))


@lru_cache(maxsize=None)
def rdp_msr_codec(p: int) -> MsrCodec:
    _, codec = generic_instance(rdp_codec(p), build_vector_coupler(p - 1))
    return codec


def random_message(codec: MsrCodec, rng: np.random.Generator, stripes: int = 1) -> np.ndarray:
    top = 1 << codec.base.symbol_bits
    return rng.integers(0, top, size=(codec.params.message_symbols, stripes)).astype(codec.dtype)


def random_codeword(codec: MsrCodec, rng: np.random.Generator, stripes: int = 1):
    return codec.encode_systematic(random_message(codec, rng, stripes))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
