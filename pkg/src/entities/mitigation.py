"""Error-floor mitigation settings and success-rate reports."""
from dataclasses import dataclass, field
from typing import Dict, Optional

from entities.decoder import DecoderConfig
from entities.errors import ParameterError

STRATEGY_NONE = "none"
STRATEGY_GUESS = "guess"
STRATEGY_VIRTUAL_NOISE = "virtual_noise"
STRATEGY_SCALED_BOXPLUS = "scaled_boxplus"
STRATEGY_MULTI_TRELLIS = "multi_trellis"
STRATEGIES = (
    STRATEGY_NONE,
    STRATEGY_GUESS,
    STRATEGY_VIRTUAL_NOISE,
    STRATEGY_SCALED_BOXPLUS,
    STRATEGY_MULTI_TRELLIS,
)

GUESS_GENIE = "genie"
GUESS_EXHAUSTIVE = "exhaustive"

MAX_PERMUTATIONS_CAP = 720  # 6! orders, enough for every n used at desk scale


@dataclass(frozen=True)
class MitigationConfig:
    """Which retry strategy runs after a failed base decode, and its knobs."""

    strategy: str = STRATEGY_NONE
    base: DecoderConfig = field(default_factory=DecoderConfig)
    max_bits: int = 1
    guess_mode: str = GUESS_EXHAUSTIVE
    sigma_v2: float = 0.36
    attempts: int = 5
    alpha: float = 0.9375
    max_permutations: Optional[int] = None  # None: all nontrivial cyclic rotations

    def __post_init__(self):
        """Validate strategy parameters after initialization."""
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"Unknown strategy '{self.strategy}'")
        if self.strategy == STRATEGY_GUESS:
            if not 1 <= self.max_bits <= 3:
                raise ParameterError(f"Guess budget must be 1..3 bits, got {self.max_bits}")
            if self.guess_mode not in (GUESS_GENIE, GUESS_EXHAUSTIVE):
                raise ParameterError(f"Unknown guess mode '{self.guess_mode}'")
        if self.strategy == STRATEGY_VIRTUAL_NOISE:
            if not self.sigma_v2 > 0:
                raise ParameterError("Virtual noise variance must be positive")
            if self.attempts < 1:
                raise ParameterError("Virtual noise needs at least one attempt")
        if self.strategy == STRATEGY_SCALED_BOXPLUS and not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.max_permutations is not None and not 1 <= self.max_permutations <= MAX_PERMUTATIONS_CAP:
            raise ParameterError(f"Permutation budget must be in [1, {MAX_PERMUTATIONS_CAP}]")

    @property
    def label(self) -> str:
        if self.strategy == STRATEGY_GUESS:
            return f"guess{self.max_bits}-{self.guess_mode}"
        if self.strategy == STRATEGY_VIRTUAL_NOISE:
            return f"vnoise(sigma_v2={self.sigma_v2:g})"
        if self.strategy == STRATEGY_SCALED_BOXPLUS:
            return f"scaled(alpha={self.alpha:g})"
        return self.strategy


@dataclass
class SuccessReport:
    """Recovery statistics of one strategy over a captured test set."""

    strategy: str
    total: int = 0
    recovered: int = 0
    extra_iterations: int = 0
    per_stage: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.recovered <= self.total:
            raise ParameterError("Recovered count must lie in [0, total]")

    @property
    def tau(self) -> float:
        return self.recovered / self.total if self.total else 0.0

    @property
    def mean_extra_iterations(self) -> float:
        return self.extra_iterations / self.total if self.total else 0.0

    def merge(self, other: "SuccessReport") -> "SuccessReport":
        """Combine two disjoint partial reports by addition."""
        stages = dict(self.per_stage)
        for stage, count in other.per_stage.items():
            stages[stage] = stages.get(stage, 0) + count
        return SuccessReport(
            strategy=self.strategy,
            total=self.total + other.total,
            recovered=self.recovered + other.recovered,
            extra_iterations=self.extra_iterations + other.extra_iterations,
            per_stage=stages,
        )
