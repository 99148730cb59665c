"""Error-rate estimation, normalized error, test-set capture and confidence intervals."""
import logging
import math
import time
from dataclasses import asdict
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from tqdm import tqdm

from entities.channel import ChannelConfig, LlrFrame
from entities.code import PolarCodeSpec
from entities.decoder import DecoderConfig, SclConfig
from entities.errors import GridMismatchError, InsufficientStatisticsError, ParameterError
from entities.reports import NePoint, NeReport, SimReport, SnrPoint, StopRule
from entities.testset import TestSet, TestSetHeader, TestSetRecord
from interactors import bp_decoder, sc_decoders
from interactors.channel import frame_rng, llr_from_output, random_frame
from interactors.mitigation import check_test_set_matches
from interactors.polar_core import spec_digest

logger = logging.getLogger(__name__)

Decoder = Union[DecoderConfig, SclConfig]
ChunkRunner = Callable[[Callable, Iterable[tuple]], Iterator]

TESTSET_STREAM = 0x7E57  # rng stream id for test-set candidates


def _inline(fn: Callable, jobs: Iterable[tuple]) -> Iterator:
    for job in jobs:
        yield fn(*job)


def confidence_interval(errors: int, trials: int) -> Tuple[float, float]:
    """95% interval for a binomial proportion.

    Normal approximation, with the exact (Clopper-Pearson) interval when fewer than
    ten errors or successes are observed. Zero errors gives the one-sided bound
    1 - 0.05^(1/n).
    """
    if trials < 1 or not 0 <= errors <= trials:
        raise ParameterError(f"Need 0 <= errors <= trials and trials >= 1, got {errors}/{trials}")
    if errors == 0:
        return 0.0, 1.0 - 0.05 ** (1.0 / trials)
    if errors == trials:
        return 0.05 ** (1.0 / trials), 1.0
    if errors < 10 or trials - errors < 10:
        low = stats.beta.ppf(0.025, errors, trials - errors + 1)
        high = stats.beta.ppf(0.975, errors + 1, trials - errors)
        return float(low), float(high)
    p = errors / trials
    half = stats.norm.ppf(0.975) * math.sqrt(p * (1.0 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)


def decoder_settings(decoder: Decoder, all_zero: bool = False) -> Dict[str, str]:
    """Flat string description stored with every report."""
    settings = {key: str(value) for key, value in asdict(decoder).items() if key != "debug_checks"}
    settings["decoder"] = "bp" if isinstance(decoder, DecoderConfig) else "scl"
    settings["all_zero"] = str(all_zero)
    return settings


def simulate_chunk(
    spec: PolarCodeSpec,
    decoder: Decoder,
    ebn0_db: float,
    snr_index: int,
    seed: int,
    start: int,
    count: int,
    all_zero: bool = False,
    noiseless: bool = False,
) -> SnrPoint:
    """Exact counters for frames [start, start + count) at one SNR point."""
    began = time.perf_counter()
    channel = ChannelConfig(ebn0_db=ebn0_db, rate=spec.rate, noiseless=noiseless)
    us, llrs = [], []
    for index in range(start, start + count):
        u, frame = random_frame(spec, channel, frame_rng(seed, snr_index, index), all_zero)
        us.append(u)
        llrs.append(frame.values)
    u_true = np.stack(us)[:, spec.info_indices]
    if isinstance(decoder, DecoderConfig):
        result = bp_decoder.decode_batch(spec, np.stack(llrs), decoder)
        u_hat = result.u_hat[:, spec.info_indices]
        iterations = int(result.iterations_used.sum())
    else:
        if decoder.list_size == 1:
            u_hat = np.stack([sc_decoders.sc_decode(spec, llr) for llr in llrs])
        else:
            u_hat = np.stack([sc_decoders.scl_decode(spec, llr, decoder) for llr in llrs])
        iterations = 0
    wrong = u_hat != u_true
    return SnrPoint(
        ebn0_db=ebn0_db,
        k=spec.k,
        frames=count,
        bit_errors=int(wrong.sum()),
        block_errors=int(wrong.any(axis=1).sum()),
        iterations=iterations,
        wall_time_s=time.perf_counter() - began,
    )


def _chunks(limit: int, size: int) -> Iterator[Tuple[int, int]]:
    for start in range(0, limit, size):
        yield start, min(size, limit - start)


def estimate_error_rates(
    spec: PolarCodeSpec,
    decoder: Decoder,
    snr_points: Sequence[float],
    stop_rule: StopRule,
    seed: int,
    all_zero: bool = False,
    noiseless: bool = False,
    chunk_frames: int = 256,
    run_chunks: Optional[ChunkRunner] = None,
    progress: bool = False,
) -> SimReport:
    """Monte Carlo BER/BLER over an Eb/N0 grid.

    Frames are simulated in fixed chunks and consumed in frame order; the stop rule is
    checked at chunk boundaries, so the counters never depend on parallelism.
    """
    if not snr_points:
        raise ParameterError("At least one SNR point is required")
    run_chunks = run_chunks or _inline
    report = SimReport(digest=spec_digest(spec), settings=decoder_settings(decoder, all_zero), seed=seed)
    for snr_index, ebn0_db in enumerate(snr_points):
        total = SnrPoint(ebn0_db=float(ebn0_db), k=spec.k)
        jobs = (
            (spec, decoder, float(ebn0_db), snr_index, seed, start, count, all_zero, noiseless)
            for start, count in _chunks(stop_rule.max_frames, chunk_frames)
        )
        with tqdm(total=stop_rule.max_frames, desc=f"{ebn0_db:.2f} dB", unit="fr", disable=not progress, leave=False) as bar:
            partials = run_chunks(simulate_chunk, jobs)
            for partial in partials:
                total = total.merge(partial)
                bar.update(partial.frames)
                if stop_rule.satisfied(total.frames, total.block_errors):
                    break
            if hasattr(partials, "close"):
                partials.close()
        if total.block_errors < stop_rule.min_block_errors:
            report.complete = False
            logger.warning(
                "%.2f dB: only %d block errors in %d frames", ebn0_db, total.block_errors, total.frames
            )
        logger.info("%.2f dB: BER %.3e BLER %.3e (%d frames)", ebn0_db, total.ber, total.bler, total.frames)
        report.points.append(total)
    return report


def _comparable(settings: Dict[str, str]) -> Dict[str, str]:
    return {key: value for key, value in settings.items() if key != "llr_max"}


def compute_ne(curve: SimReport, ref: SimReport) -> NeReport:
    """Mean per-point BER ratio of a clipped curve against its reference."""
    if curve.digest != ref.digest:
        raise GridMismatchError(f"Reports belong to different codes ({curve.digest} vs {ref.digest})")
    if curve.grid != ref.grid:
        raise GridMismatchError(f"SNR grids differ: {curve.grid} vs {ref.grid}")
    if _comparable(curve.settings) != _comparable(ref.settings):
        raise GridMismatchError("Reports were produced with different decoder settings")
    points = []
    for mine, theirs in zip(curve.points, ref.points):
        if theirs.bit_errors == 0:
            raise InsufficientStatisticsError(f"Reference has no bit errors at {theirs.ebn0_db:.2f} dB")
        points.append(NePoint(ebn0_db=mine.ebn0_db, ber=mine.ber, ber_ref=theirs.ber))
    return NeReport(
        llr_max=float(curve.settings.get("llr_max", "nan")),
        llr_max_ref=float(ref.settings.get("llr_max", "nan")),
        points=points,
    )


def replay_config(header: TestSetHeader, llr_max: float) -> DecoderConfig:
    """Decoder settings a test set was collected with, at the given clipping value."""
    return DecoderConfig(
        llr_max=llr_max,
        max_iters=header.max_iters,
        boxplus_mode=header.boxplus_mode,
        precision=header.precision,
    )


def quantized_frame(frame: LlrFrame, sigma2: float) -> LlrFrame:
    """Round a frame to the 32-bit values a test-set file stores."""
    y = frame.y.astype(np.float32)
    llr = llr_from_output(y.astype(np.float64), sigma2).astype(np.float32)
    return LlrFrame(values=llr, y=y, sigma2=sigma2)


def collect_chunk(
    spec: PolarCodeSpec,
    header: TestSetHeader,
    start: int,
    count: int,
) -> List[TestSetRecord]:
    """Candidates in [start, start + count) that fail clipped and pass unclipped."""
    channel = ChannelConfig(ebn0_db=header.ebn0_db, rate=spec.rate)
    us, frames = [], []
    for index in range(start, start + count):
        u, frame = random_frame(spec, channel, frame_rng(header.seed, TESTSET_STREAM, index))
        us.append(u)
        frames.append(quantized_frame(frame, header.sigma2))
    u_true = np.stack(us)
    llrs = np.stack([f.values for f in frames])
    failing = bp_decoder.decode_batch(spec, llrs, replay_config(header, header.llr_max_fail))
    missed = np.flatnonzero(np.any(failing.u_hat != u_true, axis=1))
    if missed.size == 0:
        return []
    passing = bp_decoder.decode_batch(spec, llrs[missed], replay_config(header, header.llr_max_pass))
    recovered = np.all(passing.u_hat == u_true[missed], axis=1)
    return [
        TestSetRecord(frame_id=start + int(i), u=u_true[i], y=frames[i].y, llr=frames[i].values)
        for i in missed[recovered]
    ]


def collect_test_set(
    spec: PolarCodeSpec,
    ebn0_db: float,
    llr_max_pass: float,
    llr_max_fail: float,
    target_count: int,
    seed: int,
    max_frames: int = 10_000_000,
    base: Optional[DecoderConfig] = None,
    chunk_frames: int = 256,
    run_chunks: Optional[ChunkRunner] = None,
    progress: bool = False,
) -> TestSet:
    """Stream random frames until ``target_count`` floor events are captured."""
    if target_count < 1:
        raise ParameterError("target_count must be at least 1")
    base = base or DecoderConfig()
    sigma2 = float(np.float32(ChannelConfig(ebn0_db=ebn0_db, rate=spec.rate).sigma2))
    header = TestSetHeader(
        N=spec.N,
        k=spec.k,
        digest=spec_digest(spec),
        sigma2=sigma2,
        ebn0_db=float(np.float32(ebn0_db)),
        llr_max_pass=float(np.float32(llr_max_pass)),
        llr_max_fail=float(np.float32(llr_max_fail)),
        seed=seed,
        max_iters=base.max_iters,
        boxplus_mode=base.boxplus_mode,
        precision=base.precision,
    )
    run_chunks = run_chunks or _inline
    records: List[TestSetRecord] = []
    examined = 0
    jobs = ((spec, header, start, count) for start, count in _chunks(max_frames, chunk_frames))
    with tqdm(total=target_count, desc="collect", unit="rec", disable=not progress, leave=False) as bar:
        partials = run_chunks(collect_chunk, jobs)
        for (start, count), found in zip(_chunks(max_frames, chunk_frames), partials):
            take = found[: target_count - len(records)]
            records.extend(take)
            bar.update(len(take))
            examined = start + count
            if len(records) >= target_count:
                examined = records[-1].frame_id + 1
                break
        if hasattr(partials, "close"):
            partials.close()
    complete = len(records) >= target_count
    if not complete:
        logger.warning("budget of %d frames exhausted with %d/%d records", max_frames, len(records), target_count)
    header = TestSetHeader(**{**asdict(header), "candidates": examined})
    return TestSet(header=header, records=records, complete=complete)


def validate_test_set(spec: PolarCodeSpec, test_set: TestSet) -> List[int]:
    """Frame ids of records that break the pass/fail predicate on replay."""
    check_test_set_matches(spec, test_set)
    header = test_set.header
    if not test_set.records:
        return []
    u_true = np.stack([r.u for r in test_set.records])
    llrs = np.stack([r.llr for r in test_set.records])
    failing = bp_decoder.decode_batch(spec, llrs, replay_config(header, header.llr_max_fail))
    passing = bp_decoder.decode_batch(spec, llrs, replay_config(header, header.llr_max_pass))
    still_fails = np.any(failing.u_hat != u_true, axis=1)
    now_passes = np.all(passing.u_hat == u_true, axis=1)
    bad = ~(still_fails & now_passes)
    return [test_set.records[i].frame_id for i in np.flatnonzero(bad)]
