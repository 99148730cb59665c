"""Error-rate and normalized-error reports."""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

from entities.errors import ParameterError


@dataclass(frozen=True)
class StopRule:
    """When to stop simulating one SNR point."""

    min_frames: int = 1000
    min_block_errors: int = 100
    max_frames: int = 1_000_000

    def __post_init__(self):
        if self.min_frames < 0 or self.min_block_errors < 0:
            raise ParameterError("Stop-rule minimums cannot be negative")
        if self.max_frames < 1:
            raise ParameterError("max_frames must be at least 1")

    def satisfied(self, frames: int, block_errors: int) -> bool:
        """True once both minimums are met or the frame budget is spent."""
        if frames >= self.max_frames:
            return True
        return frames >= self.min_frames and block_errors >= self.min_block_errors


@dataclass(frozen=True)
class SnrPoint:
    """Exact error counters at one Eb/N0."""

    ebn0_db: float
    k: int
    frames: int = 0
    bit_errors: int = 0
    block_errors: int = 0
    iterations: int = 0
    wall_time_s: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.k) if self.frames else 0.0

    @property
    def bler(self) -> float:
        return self.block_errors / self.frames if self.frames else 0.0

    @property
    def mean_iterations(self) -> float:
        return self.iterations / self.frames if self.frames else 0.0

    def merge(self, other: "SnrPoint") -> "SnrPoint":
        """Add counters of a disjoint set of frames at the same SNR."""
        if other.ebn0_db != self.ebn0_db or other.k != self.k:
            raise ParameterError("Only counters of the same SNR point can be merged")
        return replace(
            self,
            frames=self.frames + other.frames,
            bit_errors=self.bit_errors + other.bit_errors,
            block_errors=self.block_errors + other.block_errors,
            iterations=self.iterations + other.iterations,
            wall_time_s=self.wall_time_s + other.wall_time_s,
        )


@dataclass
class SimReport:
    """Per-SNR counters plus run metadata."""

    digest: str
    settings: Dict[str, str]
    seed: int
    points: List[SnrPoint] = field(default_factory=list)
    complete: bool = True  # False when a point stopped below min_block_errors

    @property
    def grid(self) -> Tuple[float, ...]:
        return tuple(p.ebn0_db for p in self.points)


@dataclass(frozen=True)
class NePoint:
    ebn0_db: float
    ber: float
    ber_ref: float

    @property
    def ratio(self) -> float:
        return self.ber / self.ber_ref


@dataclass
class NeReport:
    """Normalized error of a clipped curve against a reference curve."""

    llr_max: float
    llr_max_ref: float
    points: List[NePoint]

    def __post_init__(self):
        if not self.points:
            raise ParameterError("NE needs at least one SNR point")
        if any(p.ber_ref <= 0 for p in self.points):
            raise ParameterError("Every reference BER must be positive")

    @property
    def ne(self) -> float:
        return sum(p.ratio for p in self.points) / len(self.points)
