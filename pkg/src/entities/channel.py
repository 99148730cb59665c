"""BI-AWGN channel parameters and received frames."""
from dataclasses import dataclass

import numpy as np

from entities.errors import ParameterError


@dataclass(frozen=True)
class ChannelConfig:
    """BPSK over AWGN at a given Eb/N0 with unit symbol energy."""

    ebn0_db: float
    rate: float
    es: float = 1.0
    noiseless: bool = False  # transmit s unchanged but keep sigma2 for LLR scaling

    def __post_init__(self):
        """Validate channel parameters after initialization."""
        if not 0.0 < self.rate <= 1.0:
            raise ParameterError(f"Rate must be in (0, 1], got {self.rate}")
        if not np.isfinite(self.ebn0_db):
            raise ParameterError("Eb/N0 must be finite")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


@dataclass(frozen=True, eq=False)
class LlrFrame:
    """One received block: raw channel outputs y and LLRs 2y/sigma2."""

    values: np.ndarray
    y: np.ndarray
    sigma2: float

    def __post_init__(self):
        if self.values.shape != self.y.shape or self.values.ndim != 1:
            raise ParameterError("LLR and channel-output vectors must be 1-D and equally long")
        if self.sigma2 <= 0:
            raise ParameterError("Noise variance must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Channel LLRs must be finite")

    def __len__(self) -> int:
        return int(self.values.shape[0])
