"""Captured frames on which clipped BP fails and unclipped BP succeeds."""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from entities.channel import LlrFrame
from entities.errors import ParameterError

MAGIC = b"PLRTSET1"
VERSION = 1


@dataclass(frozen=True)
class TestSetHeader:
    """Collection settings; the decoder fields define how records replay."""

    __test__ = False

    N: int
    k: int
    digest: str
    sigma2: float
    ebn0_db: float
    llr_max_pass: float
    llr_max_fail: float
    seed: int
    max_iters: int
    boxplus_mode: str
    precision: str
    candidates: int = 0  # frames examined during collection
    version: int = VERSION

    def __post_init__(self):
        if self.llr_max_pass <= self.llr_max_fail:
            raise ParameterError("llr_max_pass must exceed llr_max_fail")


@dataclass(eq=False)
class TestSetRecord:
    __test__ = False

    frame_id: int
    u: np.ndarray  # true u, length N
    y: np.ndarray  # float32
    llr: np.ndarray  # float32

    def frame(self, sigma2: float) -> LlrFrame:
        """Rebuild the channel frame for replay."""
        return LlrFrame(values=self.llr, y=self.y, sigma2=sigma2)


@dataclass(eq=False)
class TestSet:
    __test__ = False

    header: TestSetHeader
    records: List[TestSetRecord] = field(default_factory=list)
    complete: bool = True

    def __len__(self) -> int:
        return len(self.records)

    @property
    def acceptance(self) -> float:
        return len(self.records) / self.header.candidates if self.header.candidates else 0.0
