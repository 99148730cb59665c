"""Interfaces for code, test-set and report storage."""
from abc import ABC, abstractmethod
from typing import Dict, Optional

from entities.code import PolarCodeSpec
from entities.mitigation import SuccessReport
from entities.reports import NeReport, SimReport
from entities.testset import TestSet


class CodeRepository(ABC):
    """Interface for polar code spec storage."""

    @abstractmethod
    async def save_code(self, key: str, spec: PolarCodeSpec) -> None:
        """Store a code spec under ``key``."""
        pass

    @abstractmethod
    async def get_code(self, key: str) -> Optional[PolarCodeSpec]:
        """Retrieve a code spec, or None when nothing is stored under ``key``."""
        pass


class TestSetRepository(ABC):
    """Interface for captured test-set storage."""

    __test__ = False

    @abstractmethod
    async def save_test_set(self, key: str, test_set: TestSet) -> None:
        """Store a test set under ``key``."""
        pass

    @abstractmethod
    async def get_test_set(self, key: str) -> Optional[TestSet]:
        """Retrieve a test set; raises TestSetFormatError for unreadable data."""
        pass


class ReportWriter(ABC):
    """Interface for simulation output tables."""

    @abstractmethod
    async def write_sim_report(self, key: str, report: SimReport) -> None:
        """Persist a simulation report."""
        pass

    @abstractmethod
    async def read_sim_report(self, key: str) -> Optional[SimReport]:
        """Read back a report written by ``write_sim_report``."""
        pass

    @abstractmethod
    async def write_ne_report(self, key: str, report: NeReport) -> None:
        """Persist a normalized-error report."""
        pass

    @abstractmethod
    async def write_success_report(self, key: str, report: SuccessReport) -> None:
        """Persist a mitigation success report."""
        pass

    @abstractmethod
    async def write_frozen_sweep(self, key: str, reports: Dict[int, SimReport], rates: Dict[int, float]) -> None:
        """Combined table of one report per number of extra frozen bits."""
        pass
