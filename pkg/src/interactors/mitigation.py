"""Retry strategies that rescue frames on which clipped BP fails."""
import itertools
import logging
from dataclasses import replace
from typing import List, Optional

import numpy as np

from entities.channel import LlrFrame
from entities.code import PolarCodeSpec
from entities.decoder import DecodeResult, DecoderConfig
from entities.errors import DigestMismatchError, ParameterError
from entities.mitigation import (
    GUESS_GENIE,
    STRATEGY_GUESS,
    STRATEGY_MULTI_TRELLIS,
    STRATEGY_NONE,
    STRATEGY_SCALED_BOXPLUS,
    STRATEGY_VIRTUAL_NOISE,
    MitigationConfig,
    SuccessReport,
)
from entities.testset import TestSet, TestSetRecord
from interactors import bp_decoder
from interactors.channel import frame_rng, llr_from_output
from interactors.polar_core import spec_digest

logger = logging.getLogger(__name__)

RECORD_STREAM = 0x5EC0  # rng stream id for per-record virtual noise


def detect_oscillating_bits(result: DecodeResult, spec: PolarCodeSpec, top_m: int) -> List[int]:
    """Information indices ranked by sign flips, then by small terminal |L+R|, then index.

    With no flips recorded this is the smallest-|L+R| ranking.
    """
    info = spec.info_indices
    counts = np.asarray(result.sign_flip_counts)[info]
    reliability = np.abs(np.asarray(result.u_llr, dtype=np.float64))[info]
    order = np.lexsort((info, reliability, -counts))
    return [int(i) for i in info[order][:top_m]]


def _finish(result: DecodeResult, stage: str, total: int) -> DecodeResult:
    return replace(result, stage=stage, total_iterations=total)


def guess_decode(
    spec: PolarCodeSpec,
    frame: LlrFrame,
    cfg: DecoderConfig,
    max_bits: int,
    mode: str,
    base_result: Optional[DecodeResult] = None,
    true_u: Optional[np.ndarray] = None,
) -> DecodeResult:
    """Belief pushing: pin oscillating bits to +-llr_max and restart BP.

    The pinned set grows one bit at a time. Exhaustive mode tries every sign
    assignment of the current set (+llr_max first); genie mode pins the true values.
    """
    base = base_result or bp_decoder.decode(spec, frame, cfg)
    if base.converged:
        return base
    if not 1 <= max_bits <= 3:
        raise ParameterError(f"Guess budget must be 1..3 bits, got {max_bits}")
    if mode == GUESS_GENIE and true_u is None:
        raise ParameterError("Genie guessing needs the transmitted u")
    candidates = detect_oscillating_bits(base, spec, max_bits)
    total = base.iterations_used
    for depth in range(1, len(candidates) + 1):
        chosen = candidates[:depth]
        if mode == GUESS_GENIE:
            assignments = [tuple(1 - 2 * int(true_u[i]) for i in chosen)]
        else:
            assignments = itertools.product((1, -1), repeat=depth)
        for signs in assignments:
            priors = bp_decoder.default_priors(spec, cfg)
            priors[chosen] = np.asarray(signs, dtype=priors.dtype) * priors.dtype.type(cfg.llr_max)
            attempt = bp_decoder.decode(spec, frame, cfg, priors=priors)
            total += attempt.iterations_used
            if attempt.converged:
                return _finish(attempt, STRATEGY_GUESS, total)
    return _finish(base, STRATEGY_GUESS, total)


def virtual_noise_decode(
    spec: PolarCodeSpec,
    frame: LlrFrame,
    cfg: DecoderConfig,
    sigma_v2: float,
    attempts: int,
    rng: np.random.Generator,
    base_result: Optional[DecodeResult] = None,
) -> DecodeResult:
    """Re-decode y + n_v, n_v ~ N(0, sigma_v2), with LLRs scaled by the channel sigma2."""
    base = base_result or bp_decoder.decode(spec, frame, cfg)
    if base.converged:
        return base
    if attempts < 1 or sigma_v2 < 0:
        raise ParameterError("Virtual noise needs attempts >= 1 and sigma_v2 >= 0")
    y = np.asarray(frame.y, dtype=np.float64)
    total = base.iterations_used
    for _ in range(attempts):
        noisy = y + np.sqrt(sigma_v2) * rng.standard_normal(y.shape)
        attempt = bp_decoder.decode(spec, llr_from_output(noisy, frame.sigma2), cfg)
        total += attempt.iterations_used
        if attempt.converged:
            return _finish(attempt, STRATEGY_VIRTUAL_NOISE, total)
    return _finish(base, STRATEGY_VIRTUAL_NOISE, total)


def scaled_boxplus_decode(
    spec: PolarCodeSpec,
    frame: LlrFrame,
    cfg: DecoderConfig,
    alpha: float,
    base_result: Optional[DecodeResult] = None,
) -> DecodeResult:
    """Re-decode with every boxplus output scaled by alpha."""
    base = base_result or bp_decoder.decode(spec, frame, cfg)
    if base.converged:
        return base
    attempt = bp_decoder.decode(spec, frame, replace(cfg, alpha=alpha))
    total = base.iterations_used + attempt.iterations_used
    return _finish(attempt if attempt.converged else base, STRATEGY_SCALED_BOXPLUS, total)


def multi_trellis_decode(
    spec: PolarCodeSpec,
    frame: LlrFrame,
    cfg: DecoderConfig,
    max_permutations: Optional[int] = None,
    base_result: Optional[DecodeResult] = None,
) -> DecodeResult:
    """Try permuted-layer realisations of the factor graph until one converges.

    The identity order comes first; ``base_result`` stands in for it when given.
    ``None`` means identity plus all n-1 cyclic rotations.
    """
    budget = spec.n if max_permutations is None else max_permutations
    if budget < 1:
        raise ParameterError("At least one layer order is required")
    base = None
    total = 0
    for order in bp_decoder.layer_orders(spec.n, budget):
        if base is None:
            base = base_result or bp_decoder.decode(spec, frame, cfg, layer_order=order)
            attempt = base
            if base.converged:
                return base
        else:
            attempt = bp_decoder.decode(spec, frame, cfg, layer_order=order)
        total += attempt.iterations_used
        if attempt.converged:
            logger.debug("layer order %s converged", order)
            return _finish(attempt, STRATEGY_MULTI_TRELLIS, total)
    return _finish(base, STRATEGY_MULTI_TRELLIS, total)


def mitigated_decode(
    spec: PolarCodeSpec,
    frame: LlrFrame,
    mcfg: MitigationConfig,
    rng: Optional[np.random.Generator] = None,
    true_u: Optional[np.ndarray] = None,
    base_result: Optional[DecodeResult] = None,
) -> DecodeResult:
    """Base BP, then the configured strategy if the base decode did not converge."""
    base = base_result or bp_decoder.decode(spec, frame, mcfg.base)
    if base.converged or mcfg.strategy == STRATEGY_NONE:
        return base
    if mcfg.strategy == STRATEGY_GUESS:
        return guess_decode(spec, frame, mcfg.base, mcfg.max_bits, mcfg.guess_mode, base, true_u)
    if mcfg.strategy == STRATEGY_VIRTUAL_NOISE:
        rng = rng if rng is not None else np.random.default_rng(0)
        return virtual_noise_decode(spec, frame, mcfg.base, mcfg.sigma_v2, mcfg.attempts, rng, base)
    if mcfg.strategy == STRATEGY_SCALED_BOXPLUS:
        return scaled_boxplus_decode(spec, frame, mcfg.base, mcfg.alpha, base)
    return multi_trellis_decode(spec, frame, mcfg.base, mcfg.max_permutations, base)


def check_test_set_matches(spec: PolarCodeSpec, test_set: TestSet) -> None:
    """Raise DigestMismatchError when a test set was captured on another code."""
    header = test_set.header
    digest = spec_digest(spec)
    if header.digest != digest or header.N != spec.N or header.k != spec.k:
        raise DigestMismatchError(
            f"Test set belongs to code {header.digest} (N={header.N}, k={header.k}), "
            f"not {digest} (N={spec.N}, k={spec.k})"
        )


def success_for_records(
    spec: PolarCodeSpec,
    sigma2: float,
    records: List[TestSetRecord],
    first_index: int,
    mcfg: MitigationConfig,
    seed: int,
) -> SuccessReport:
    """Partial report for a contiguous slice of records (process-pool entry point)."""
    report = SuccessReport(strategy=mcfg.label)
    for offset, record in enumerate(records):
        frame = record.frame(sigma2)
        base = bp_decoder.decode(spec, frame, mcfg.base)
        rng = frame_rng(seed, RECORD_STREAM, first_index + offset)
        result = mitigated_decode(spec, frame, mcfg, rng=rng, true_u=record.u, base_result=base)
        recovered = bool(np.array_equal(result.u_hat, record.u))
        stages = {result.stage: 1} if recovered else {}
        report = report.merge(
            SuccessReport(
                strategy=mcfg.label,
                total=1,
                recovered=int(recovered),
                extra_iterations=int(result.total_iterations - base.iterations_used),
                per_stage=stages,
            )
        )
    return report


def measure_success_rate(
    spec: PolarCodeSpec,
    test_set: TestSet,
    mcfg: MitigationConfig,
    seed: int = 0,
    chunk_records: int = 16,
    run_chunks=None,
) -> SuccessReport:
    """Fraction of captured frames whose mitigated decode equals the true u.

    ``run_chunks(fn, jobs)`` may fan the record slices out in parallel; results
    merge by addition so the report does not depend on how slices are scheduled.
    """
    check_test_set_matches(spec, test_set)
    records = test_set.records
    jobs = [
        (spec, test_set.header.sigma2, records[start:start + chunk_records], start, mcfg, seed)
        for start in range(0, len(records), chunk_records)
    ]
    partials = run_chunks(success_for_records, jobs) if run_chunks else (success_for_records(*job) for job in jobs)
    report = SuccessReport(strategy=mcfg.label)
    for partial in partials:
        report = report.merge(partial)
    logger.info("%s recovered %d/%d frames", mcfg.label, report.recovered, report.total)
    return report
