"""Polar code construction, frozen-set extension and encoding."""
import hashlib
import logging
from typing import Iterable

import numpy as np

from entities.code import (
    EXPLICIT,
    EXTENDED,
    Construction,
    PolarCodeSpec,
    ReliabilityProfile,
)
from entities.errors import ParameterError

logger = logging.getLogger(__name__)


def code_digest(N: int, k: int, info_set: Iterable[int]) -> str:
    """64-bit content hash of (N, k, sorted information set), as 16 hex digits."""
    words = np.asarray([N, k, *sorted(int(i) for i in info_set)], dtype="<u8")
    return hashlib.blake2b(words.tobytes(), digest_size=8).hexdigest()


def spec_digest(spec: PolarCodeSpec) -> str:
    """16 hex characters identifying N, k and the information set."""
    return code_digest(spec.N, spec.k, spec.info_set)


def bhattacharyya_log_profile(n: int, design_esn0_db: float) -> np.ndarray:
    """Natural log of Z for every synthesized channel.

    Index bits are consumed most-significant first, matching x = u·F^{⊗n} without
    bit reversal. Works in the log domain so deep channels keep their ordering.
    """
    esn0 = 10.0 ** (design_esn0_db / 10.0)
    log_z = np.array([-esn0])
    for _ in range(n):
        nxt = np.empty(2 * log_z.size)
        nxt[0::2] = log_z + np.log1p(-np.expm1(log_z))  # Z- = 2Z - Z^2
        nxt[1::2] = 2.0 * log_z  # Z+ = Z^2
        log_z = nxt
    return log_z


def reliability_order(log_z: np.ndarray) -> np.ndarray:
    """Indices from most to least reliable; equal Z favours the higher index."""
    idx = np.arange(log_z.size)
    return np.lexsort((-idx, log_z))


def construct_bhattacharyya(n: int, k: int, design_esn0_db: float = 0.0) -> PolarCodeSpec:
    """Pick the k channels with the smallest Bhattacharyya parameter."""
    if not 1 <= n <= 20:
        raise ParameterError(f"n must be in [1, 20], got {n}")
    if not 1 <= k <= (1 << n):
        raise ParameterError(f"k must be in [1, {1 << n}], got {k}")
    log_z = bhattacharyya_log_profile(n, design_esn0_db)
    info = reliability_order(log_z)[:k]
    profile = ReliabilityProfile(z=tuple(float(v) for v in np.clip(np.exp(log_z), 0.0, 1.0)))
    logger.debug("constructed N=%d k=%d at %.2f dB", 1 << n, k, design_esn0_db)
    return PolarCodeSpec(
        n=n,
        k=k,
        info_set=tuple(int(i) for i in info),
        design_esn0_db=design_esn0_db,
        profile=profile,
    )


def explicit_code(n: int, info_set: Iterable[int], design_esn0_db: float = 0.0) -> PolarCodeSpec:
    """Code spec from a given information set."""
    info = tuple(int(i) for i in info_set)
    return PolarCodeSpec(
        n=n,
        k=len(info),
        info_set=info,
        design_esn0_db=design_esn0_db,
        construction=Construction(kind=EXPLICIT),
    )


def extend_frozen(spec: PolarCodeSpec, m: int, seed: int) -> PolarCodeSpec:
    """Freeze m extra, randomly chosen information positions."""
    if not 0 <= m <= spec.k:
        raise ParameterError(f"m must be in [0, {spec.k}], got {m}")
    if m == 0:
        return spec
    if m == spec.k:
        raise ParameterError("Cannot freeze every information bit")
    parent = spec_digest(spec)
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(parent, 16)]))
    drop = set(spec.info_indices[rng.choice(spec.k, size=m, replace=False)].tolist())
    info = tuple(i for i in spec.info_set if i not in drop)
    return PolarCodeSpec(
        n=spec.n,
        k=spec.k - m,
        info_set=info,
        design_esn0_db=spec.design_esn0_db,
        construction=Construction(kind=EXTENDED, parent_digest=parent, m=m, seed=seed),
        profile=spec.profile,
    )


def encode_full(v: np.ndarray) -> np.ndarray:
    """v·G_N over GF(2) with an in-place butterfly; accepts shape (N,) or (B, N)."""
    x = np.array(v, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if N & (N - 1) or N < 2:
        raise ParameterError(f"Length must be a power of two, got {N}")
    lead = x.shape[:-1]
    h = 1
    while h < N:
        view = x.reshape(*lead, N // (2 * h), 2, h)
        view[..., 0, :] ^= view[..., 1, :]
        h *= 2
    return x


def place_info_bits(spec: PolarCodeSpec, info_bits: np.ndarray) -> np.ndarray:
    """Scatter k information bits into a zero u of length N."""
    bits = np.asarray(info_bits, dtype=np.uint8)
    if bits.shape[-1] != spec.k:
        raise ParameterError(f"Expected {spec.k} information bits, got {bits.shape[-1]}")
    u = np.zeros(bits.shape[:-1] + (spec.N,), dtype=np.uint8)
    u[..., spec.info_indices] = bits
    return u


def encode(spec: PolarCodeSpec, info_bits: np.ndarray) -> np.ndarray:
    """Polar codeword for the given information bits (frozen positions are zero)."""
    return encode_full(place_info_bits(spec, info_bits))
