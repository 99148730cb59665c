"""BPSK modulation, AWGN transmission and channel LLRs."""
import math
from typing import Tuple

import numpy as np

from entities.channel import ChannelConfig, LlrFrame
from entities.code import PolarCodeSpec
from entities.errors import ParameterError
from interactors.polar_core import encode_full, place_info_bits


def ebn0_to_esn0(ebn0_db: float, rate: float) -> float:
    """Es/N0 in dB for a given Eb/N0 and code rate."""
    if rate <= 0:
        raise ParameterError(f"Rate must be positive, got {rate}")
    return ebn0_db + 10.0 * math.log10(rate)


def modulate(x: np.ndarray) -> np.ndarray:
    """Map bit 0 to +1 and bit 1 to -1."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def llr_from_output(y: np.ndarray, sigma2: float) -> np.ndarray:
    """Channel LLRs 2y/sigma2."""
    return 2.0 * y / sigma2


def transmit(s: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator) -> LlrFrame:
    """Send one symbol vector through the AWGN channel."""
    sigma2 = cfg.sigma2
    if cfg.noiseless:
        y = np.array(s, dtype=np.float64, copy=True)
    else:
        y = s + math.sqrt(sigma2) * rng.standard_normal(s.shape)
    return LlrFrame(values=llr_from_output(y, sigma2), y=y, sigma2=sigma2)


def frame_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent stream per (master seed, stream id, frame index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, index]))


def random_frame(
    spec: PolarCodeSpec, cfg: ChannelConfig, rng: np.random.Generator, all_zero: bool = False
) -> Tuple[np.ndarray, LlrFrame]:
    """Draw information bits, encode and transmit; returns (u, frame)."""
    if all_zero:
        info = np.zeros(spec.k, dtype=np.uint8)
    else:
        info = rng.integers(0, 2, size=spec.k, dtype=np.uint8)
    u = place_info_bits(spec, info)
    return u, transmit(modulate(encode_full(u)), cfg, rng)
