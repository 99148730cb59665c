"""Polar code parameters and construction metadata."""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from entities.errors import ParameterError

BHATTACHARYYA = "bhattacharyya"
EXPLICIT = "explicit"
EXTENDED = "extended"


@dataclass(frozen=True)
class Construction:
    """How an information set was obtained."""

    kind: str = BHATTACHARYYA
    parent_digest: Optional[str] = None  # only for extended codes
    m: int = 0
    seed: int = 0

    def __post_init__(self):
        """Validate construction tag after initialization."""
        if self.kind not in (BHATTACHARYYA, EXPLICIT, EXTENDED):
            raise ParameterError(f"Unknown construction '{self.kind}'")
        if self.kind == EXTENDED and not self.parent_digest:
            raise ParameterError("Extended construction requires the parent digest")


@dataclass(frozen=True)
class ReliabilityProfile:
    """Bhattacharyya parameter of each synthesized bit channel."""

    z: Tuple[float, ...]

    def __post_init__(self):
        if any(not (0.0 <= zi <= 1.0) for zi in self.z):
            raise ParameterError("Bhattacharyya parameters must lie in [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.z, dtype=np.float64)


@dataclass(frozen=True)
class PolarCodeSpec:
    """Parameters of an (N, k) polar code with G_N = F^{⊗n}."""

    n: int
    k: int
    info_set: Tuple[int, ...]
    design_esn0_db: float = 0.0
    construction: Construction = field(default_factory=Construction)
    profile: Optional[ReliabilityProfile] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        """Validate code parameters after initialization."""
        if not 1 <= self.n <= 20:
            raise ParameterError(f"n must be in [1, 20], got {self.n}")
        if not 0 < self.k <= self.N:
            raise ParameterError(f"k must be in (0, {self.N}], got {self.k}")
        info = tuple(int(i) for i in self.info_set)
        if len(info) != self.k or len(set(info)) != self.k:
            raise ParameterError(f"Information set must hold exactly {self.k} distinct indices")
        if any(not 0 <= i < self.N for i in info):
            raise ParameterError(f"Information indices must lie in [0, {self.N})")
        object.__setattr__(self, "info_set", tuple(sorted(info)))

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.k / self.N

    @property
    def info_indices(self) -> np.ndarray:
        return np.asarray(self.info_set, dtype=np.int64)

    @property
    def frozen_mask(self) -> np.ndarray:
        """Boolean mask, True on frozen positions."""
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_indices] = False
        return mask

    @property
    def frozen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)
