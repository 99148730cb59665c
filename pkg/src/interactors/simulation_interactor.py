"""Simulation use cases: construction, error-rate runs, test sets and mitigation."""
import asyncio
import contextlib
import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Dict, Iterator, List, Optional, Sequence

from entities.code import PolarCodeSpec
from entities.decoder import DecoderConfig
from entities.errors import DataError, ParameterError
from entities.mitigation import MitigationConfig, SuccessReport
from entities.reports import NeReport, SimReport, StopRule
from entities.testset import TestSet
from interactors import metrics, mitigation, polar_core
from interactors.interfaces import CodeRepository, ReportWriter, TestSetRepository
from interactors.metrics import ChunkRunner, Decoder
from interactors.parallel import run_ordered

logger = logging.getLogger(__name__)


class SimulationInteractor:
    """Business logic behind every polarfloor command.

    CPU-bound work runs off the event loop; with more than one worker, chunks fan out
    to a process pool and are consumed in order, so results match a single worker.
    """

    def __init__(
        self,
        code_repository: CodeRepository,
        test_set_repository: TestSetRepository,
        report_writer: ReportWriter,
        workers: int = 1,
        progress: bool = False,
    ):
        if workers < 1:
            raise ParameterError(f"Worker count must be at least 1, got {workers}")
        self._code_repository = code_repository
        self._test_set_repository = test_set_repository
        self._report_writer = report_writer
        self._workers = workers
        self._progress = progress

    @contextlib.contextmanager
    def _chunk_runner(self) -> Iterator[Optional[ChunkRunner]]:
        if self._workers == 1:
            yield None
            return
        with ProcessPoolExecutor(max_workers=self._workers) as pool:
            yield functools.partial(run_ordered, executor=pool, window=2 * self._workers)

    async def _run(self, fn, *args, **kwargs):
        """Run a blocking computation in a thread, handing it the chunk runner."""
        loop = asyncio.get_running_loop()
        with self._chunk_runner() as runner:
            call = functools.partial(fn, *args, run_chunks=runner, **kwargs)
            return await loop.run_in_executor(None, call)

    async def load_code(self, code_key: str) -> PolarCodeSpec:
        """Fetch a code spec, raising DataError when it is missing."""
        spec = await self._code_repository.get_code(code_key)
        if spec is None:
            raise DataError(f"No code spec found at '{code_key}'")
        return spec

    async def load_test_set(self, test_set_key: str) -> TestSet:
        """Fetch a test set, raising DataError when it is missing."""
        test_set = await self._test_set_repository.get_test_set(test_set_key)
        if test_set is None:
            raise DataError(f"No test set found at '{test_set_key}'")
        return test_set

    async def construct(self, code_key: str, n: int, k: int, design_esn0_db: float = 0.0) -> PolarCodeSpec:
        """Build a Bhattacharyya code and store it."""
        spec = polar_core.construct_bhattacharyya(n, k, design_esn0_db)
        await self._code_repository.save_code(code_key, spec)
        logger.info("constructed N=%d k=%d digest %s", spec.N, spec.k, polar_core.spec_digest(spec))
        return spec

    async def simulate(
        self,
        code_key: str,
        decoder: Decoder,
        snr_points: Sequence[float],
        stop_rule: StopRule,
        seed: int,
        out_key: Optional[str] = None,
        all_zero: bool = False,
        chunk_frames: int = 256,
    ) -> SimReport:
        """Error rates over an Eb/N0 grid, written as a report when ``out_key`` is set."""
        spec = await self.load_code(code_key)
        return await self._simulate_spec(spec, decoder, snr_points, stop_rule, seed, out_key, all_zero, chunk_frames)

    async def _simulate_spec(self, spec, decoder, snr_points, stop_rule, seed, out_key, all_zero, chunk_frames):
        report = await self._run(
            metrics.estimate_error_rates,
            spec,
            decoder,
            list(snr_points),
            stop_rule,
            seed,
            all_zero=all_zero,
            chunk_frames=chunk_frames,
            progress=self._progress,
        )
        if out_key:
            await self._report_writer.write_sim_report(out_key, report)
        return report

    async def ne(self, curve_key: str, ref_key: str, out_key: Optional[str] = None) -> NeReport:
        """Normalized error of one stored curve against a stored reference."""
        curve = await self._report_writer.read_sim_report(curve_key)
        ref = await self._report_writer.read_sim_report(ref_key)
        if curve is None or ref is None:
            raise DataError(f"Missing report: '{curve_key if curve is None else ref_key}'")
        report = metrics.compute_ne(curve, ref)
        if out_key:
            await self._report_writer.write_ne_report(out_key, report)
        return report

    async def collect(
        self,
        code_key: str,
        out_key: str,
        ebn0_db: float,
        target_count: int,
        seed: int,
        llr_max_pass: float = 100.0,
        llr_max_fail: float = 20.0,
        max_frames: int = 10_000_000,
        base: Optional[DecoderConfig] = None,
        chunk_frames: int = 256,
    ) -> TestSet:
        """Capture frames that fail clipped and pass unclipped; partial sets are still stored."""
        spec = await self.load_code(code_key)
        test_set = await self._run(
            metrics.collect_test_set,
            spec,
            ebn0_db,
            llr_max_pass,
            llr_max_fail,
            target_count,
            seed,
            max_frames=max_frames,
            base=base,
            chunk_frames=chunk_frames,
            progress=self._progress,
        )
        await self._test_set_repository.save_test_set(out_key, test_set)
        return test_set

    async def mitigate(
        self,
        code_key: str,
        test_set_key: str,
        mcfg: MitigationConfig,
        seed: int,
        out_key: Optional[str] = None,
        llr_max: Optional[float] = None,
    ) -> SuccessReport:
        """Success rate of one strategy on a stored test set.

        The base decoder replays the test set's stored settings at its failing
        clipping value unless ``llr_max`` overrides it.
        """
        spec = await self.load_code(code_key)
        test_set = await self.load_test_set(test_set_key)
        mitigation.check_test_set_matches(spec, test_set)
        header = test_set.header
        mcfg = replace(mcfg, base=metrics.replay_config(header, header.llr_max_fail if llr_max is None else llr_max))
        report = await self._run(mitigation.measure_success_rate, spec, test_set, mcfg, seed)
        if out_key:
            await self._report_writer.write_success_report(out_key, report)
        return report

    async def frozen_sweep(
        self,
        code_key: str,
        ms: Sequence[int],
        decoder: Decoder,
        snr_points: Sequence[float],
        stop_rule: StopRule,
        seed: int,
        out_prefix: Optional[str] = None,
        chunk_frames: int = 256,
    ) -> Dict[int, SimReport]:
        """One simulation per number of extra frozen bits, plus a combined table."""
        parent = await self.load_code(code_key)
        reports: Dict[int, SimReport] = {}
        rates: Dict[int, float] = {}
        for m in ms:
            spec = polar_core.extend_frozen(parent, m, seed)
            out_key = f"{out_prefix}_m{m}.csv" if out_prefix else None
            reports[m] = await self._simulate_spec(
                spec, decoder, snr_points, stop_rule, seed, out_key, False, chunk_frames
            )
            rates[m] = spec.rate
        if out_prefix:
            await self._report_writer.write_frozen_sweep(f"{out_prefix}_combined.csv", reports, rates)
        return reports

    async def validate(self, code_key: str, test_set_key: str) -> List[int]:
        """Frame ids of stored records that no longer satisfy the capture predicate."""
        spec = await self.load_code(code_key)
        test_set = await self.load_test_set(test_set_key)
        return metrics.validate_test_set(spec, test_set)

    async def show(self, code_key: str) -> PolarCodeSpec:
        """Load a code spec for display."""
        return await self.load_code(code_key)
