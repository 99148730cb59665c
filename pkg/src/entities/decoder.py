"""Decoder configuration, message state and decoding outcomes."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from entities.errors import ParameterError

BOXPLUS_EXACT = "exact"
BOXPLUS_MIN = "min_approx"
STOP_FIXED = "fixed_iters"
STOP_GMATRIX = "gmatrix_check"
PRECISIONS = {"f32": np.float32, "f64": np.float64}

STAGE_BASE = "base"


@dataclass(frozen=True)
class DecoderConfig:
    """Settings of the belief-propagation decoder."""

    llr_max: float = 20.0
    max_iters: int = 200
    boxplus_mode: str = BOXPLUS_MIN
    alpha: float = 1.0
    stopping: str = STOP_GMATRIX
    precision: str = "f32"
    flip_window: int = 10
    debug_checks: bool = False  # assert clipping closure after every pass

    def __post_init__(self):
        """Validate decoder settings after initialization."""
        if not self.llr_max > 0 or not np.isfinite(self.llr_max):
            raise ParameterError(f"llr_max must be positive and finite, got {self.llr_max}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be at least 1, got {self.max_iters}")
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.boxplus_mode not in (BOXPLUS_EXACT, BOXPLUS_MIN):
            raise ParameterError(f"Unknown boxplus mode '{self.boxplus_mode}'")
        if self.stopping not in (STOP_FIXED, STOP_GMATRIX):
            raise ParameterError(f"Unknown stopping rule '{self.stopping}'")
        if self.precision not in PRECISIONS:
            raise ParameterError(f"Precision must be one of {sorted(PRECISIONS)}")
        if self.flip_window < 1:
            raise ParameterError("Sign-flip window must be at least one iteration")

    @property
    def dtype(self):
        return PRECISIONS[self.precision]


@dataclass(eq=False)
class MessageGraph:
    """L/R messages of the polar factor graph for a batch of frames.

    Arrays have shape (n+1, B, N), stage-major so every stage is one contiguous
    block. Stage 0 is the u side, stage n the channel side
    (stages 1 and n+1 in one-based notation). ``layer_order[l]`` is the index bit the
    processing elements between stage l and l+1 operate on.
    """

    L: np.ndarray
    R: np.ndarray
    layer_order: Tuple[int, ...]
    llr_max: float

    @property
    def n(self) -> int:
        return self.L.shape[0] - 1

    @property
    def batch(self) -> int:
        return self.L.shape[1]

    def max_abs(self) -> float:
        return float(max(np.abs(self.L).max(), np.abs(self.R).max()))


@dataclass(eq=False)
class DecodeResult:
    """Outcome of decoding one frame."""

    u_hat: np.ndarray
    x_hat: np.ndarray
    iterations_used: int
    converged: bool
    sign_flip_counts: np.ndarray
    u_llr: np.ndarray  # terminal L+R at the u side
    stage: str = STAGE_BASE
    total_iterations: Optional[int] = None

    def __post_init__(self):
        if self.total_iterations is None:
            self.total_iterations = self.iterations_used


@dataclass(eq=False)
class BatchDecodeResult:
    """Outcome of decoding B frames together; rows are frames."""

    u_hat: np.ndarray
    x_hat: np.ndarray
    iterations_used: np.ndarray
    converged: np.ndarray
    sign_flip_counts: np.ndarray
    u_llr: np.ndarray

    def __len__(self) -> int:
        return int(self.u_hat.shape[0])

    def frame(self, index: int) -> DecodeResult:
        return DecodeResult(
            u_hat=self.u_hat[index],
            x_hat=self.x_hat[index],
            iterations_used=int(self.iterations_used[index]),
            converged=bool(self.converged[index]),
            sign_flip_counts=self.sign_flip_counts[index],
            u_llr=self.u_llr[index],
        )


PATH_METRIC_EXACT = "exact"
PATH_METRIC_APPROX = "hardware_approx"


@dataclass(frozen=True)
class SclConfig:
    """Successive-cancellation list decoder settings."""

    list_size: int = 32
    path_metric: str = PATH_METRIC_EXACT

    def __post_init__(self):
        if self.list_size < 1:
            raise ParameterError(f"List size must be a positive integer, got {self.list_size}")
        if self.path_metric not in (PATH_METRIC_EXACT, PATH_METRIC_APPROX):
            raise ParameterError(f"Unknown path metric '{self.path_metric}'")
