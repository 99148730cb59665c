"""Tests for error-rate estimation, normalized error and test-set capture."""
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import partial

import numpy as np
import pytest
from scipy import stats

from entities.decoder import BOXPLUS_EXACT, DecoderConfig, SclConfig
from entities.errors import DigestMismatchError, GridMismatchError, InsufficientStatisticsError, ParameterError
from entities.reports import SimReport, SnrPoint, StopRule
from interactors.channel import modulate
from interactors.metrics import (
    collect_test_set,
    compute_ne,
    confidence_interval,
    decoder_settings,
    estimate_error_rates,
    validate_test_set,
)
from interactors.parallel import run_ordered
from interactors.polar_core import construct_bhattacharyya, encode_full

FAST_BP = DecoderConfig(max_iters=30)


def counters(report):
    return [(p.ebn0_db, p.frames, p.bit_errors, p.block_errors, p.iterations) for p in report.points]


def sim_report(bers, digest="abc", llr_max="20.0", k=10, frames=1000, **settings):
    points = [
        SnrPoint(ebn0_db=float(i), k=k, frames=frames, bit_errors=int(round(ber * k * frames)), block_errors=1)
        for i, ber in enumerate(bers)
    ]
    return SimReport(
        digest=digest,
        settings={"llr_max": llr_max, "boxplus_mode": "min_approx", "decoder": "bp", **settings},
        seed=0,
        points=points,
    )


class TestConfidenceInterval:
    """Test cases for confidence_interval."""

    def test_zero_errors(self):
        low, high = confidence_interval(0, 1000)

        assert low == 0.0
        assert high == pytest.approx(1.0 - 0.05 ** (1 / 1000))
        assert high == pytest.approx(0.002991, abs=1e-6)

    def test_all_errors(self):
        low, high = confidence_interval(50, 50)

        assert low == pytest.approx(0.05 ** (1 / 50))
        assert high == 1.0

    def test_few_errors_use_exact_interval(self):
        low, high = confidence_interval(5, 100)

        assert low == pytest.approx(stats.beta.ppf(0.025, 5, 96))
        assert high == pytest.approx(stats.beta.ppf(0.975, 6, 95))

    def test_normal_approximation_close_to_exact(self):
        low, high = confidence_interval(100, 1_000_000)

        assert low == pytest.approx(stats.beta.ppf(0.025, 100, 999_901), rel=0.03)
        assert high == pytest.approx(stats.beta.ppf(0.975, 101, 999_900), rel=0.03)
        assert low < 1e-4 < high

    @pytest.mark.parametrize("errors, trials", [(0, 0), (5, 4), (-1, 10)])
    def test_invalid_counts(self, errors, trials):
        with pytest.raises(ParameterError):
            confidence_interval(errors, trials)


class TestEstimateErrorRates:
    """Test cases for Monte Carlo estimation."""

    def test_settings_description(self):
        settings = decoder_settings(DecoderConfig(llr_max=8.0, debug_checks=True), all_zero=True)

        assert settings["llr_max"] == "8.0"
        assert settings["decoder"] == "bp"
        assert settings["all_zero"] == "True"
        assert "debug_checks" not in settings
        assert decoder_settings(SclConfig(list_size=4))["decoder"] == "scl"

    def test_noiseless_has_no_errors(self, code_64_32):
        report = estimate_error_rates(
            code_64_32, FAST_BP, [1.0], StopRule(min_frames=0, min_block_errors=0, max_frames=64), seed=1,
            noiseless=True, chunk_frames=32,
        )
        point = report.points[0]

        assert point.frames == 64
        assert point.bit_errors == 0
        assert point.mean_iterations < 30

    def test_warns_when_errors_are_short(self, code_64_32, caplog):
        rule = StopRule(min_frames=0, min_block_errors=1, max_frames=32)
        with caplog.at_level(logging.WARNING, logger="interactors.metrics"):
            report = estimate_error_rates(code_64_32, FAST_BP, [1.0], rule, seed=1, noiseless=True, chunk_frames=32)

        assert "only 0 block errors" in caplog.text
        assert not report.complete

    def test_complete_when_every_point_has_enough_errors(self, code_64_32):
        rule = StopRule(min_frames=0, min_block_errors=5, max_frames=100_000)
        report = estimate_error_rates(code_64_32, FAST_BP, [0.0, 0.5], rule, seed=2, chunk_frames=32)

        assert report.complete

    def test_parallel_run_matches_inline(self, code_64_32):
        rule = StopRule(min_frames=64, min_block_errors=10, max_frames=2048)
        inline = estimate_error_rates(code_64_32, FAST_BP, [0.0, 1.0], rule, seed=7, chunk_frames=32)
        with ThreadPoolExecutor(max_workers=3) as pool:
            runner = partial(run_ordered, executor=pool, window=6)
            threaded = estimate_error_rates(
                code_64_32, FAST_BP, [0.0, 1.0], rule, seed=7, chunk_frames=32, run_chunks=runner
            )

        assert counters(inline) == counters(threaded)

    def test_chunk_size_does_not_change_a_fixed_budget(self, code_64_32):
        rule = StopRule(min_frames=0, min_block_errors=10 ** 9, max_frames=192)
        a = estimate_error_rates(code_64_32, FAST_BP, [1.5], rule, seed=3, chunk_frames=16)
        b = estimate_error_rates(code_64_32, FAST_BP, [1.5], rule, seed=3, chunk_frames=64)

        assert counters(a) == counters(b)

    def test_stops_at_a_chunk_boundary(self, code_64_32):
        rule = StopRule(min_frames=64, min_block_errors=5, max_frames=100_000)
        point = estimate_error_rates(code_64_32, FAST_BP, [0.0], rule, seed=2, chunk_frames=32).points[0]

        assert point.frames % 32 == 0
        assert point.frames >= 64
        assert point.block_errors >= 5
        assert point.frames < 100_000

    def test_successive_cancellation_counts(self, code_64_32):
        rule = StopRule(min_frames=0, min_block_errors=0, max_frames=50)
        report = estimate_error_rates(code_64_32, SclConfig(list_size=1), [2.0], rule, seed=4, chunk_frames=25)
        point = report.points[0]

        assert point.frames == 50
        assert point.iterations == 0
        assert report.settings["list_size"] == "1"

    def test_empty_grid(self, code_64_32):
        with pytest.raises(ParameterError):
            estimate_error_rates(code_64_32, FAST_BP, [], StopRule(), seed=0)


class TestNormalizedError:
    """Test cases for compute_ne."""

    def test_against_itself(self):
        report = sim_report([1e-2, 1e-3])
        assert compute_ne(report, report).ne == pytest.approx(1.0)

    def test_mean_of_ratios(self):
        curve = sim_report([2e-2, 4e-3], llr_max="5.0")
        ref = sim_report([1e-2, 1e-3])
        result = compute_ne(curve, ref)

        assert result.ne == pytest.approx(3.0)
        assert result.llr_max == 5.0
        assert result.llr_max_ref == 20.0

    def test_different_codes(self):
        with pytest.raises(GridMismatchError, match="different codes"):
            compute_ne(sim_report([1e-2], digest="a"), sim_report([1e-2], digest="b"))

    def test_different_grids(self):
        with pytest.raises(GridMismatchError, match="grids"):
            compute_ne(sim_report([1e-2]), sim_report([1e-2, 1e-3]))

    def test_different_decoder_settings(self):
        curve = sim_report([1e-2], boxplus_mode=BOXPLUS_EXACT)
        with pytest.raises(GridMismatchError, match="settings"):
            compute_ne(curve, sim_report([1e-2]))

    def test_reference_without_errors(self):
        with pytest.raises(InsufficientStatisticsError):
            compute_ne(sim_report([1e-2]), sim_report([0.0]))


class TestCollection:
    """Test cases for collect_test_set and validate_test_set."""

    @pytest.fixture(scope="class")
    def spec(self):
        return construct_bhattacharyya(6, 32)

    @pytest.fixture(scope="class")
    def test_set(self, spec):
        return collect_test_set(
            spec, 1.0, llr_max_pass=100.0, llr_max_fail=2.0, target_count=5, seed=11,
            max_frames=4000, base=FAST_BP, chunk_frames=32,
        )

    def test_captures_target(self, test_set, spec):
        header = test_set.header

        assert test_set.complete
        assert len(test_set) == 5
        assert header.candidates == test_set.records[-1].frame_id + 1
        assert header.N == 64 and header.k == 32
        assert header.max_iters == 30
        assert header.sigma2 == float(np.float32(header.sigma2))

    def test_records_are_float32(self, test_set):
        record = test_set.records[0]

        assert record.y.dtype == np.float32
        assert record.llr.dtype == np.float32
        assert np.allclose(record.llr, 2.0 * record.y.astype(np.float64) / test_set.header.sigma2, rtol=1e-6)

    def test_records_replay(self, test_set, spec):
        assert validate_test_set(spec, test_set) == []

    def test_chunking_is_invisible(self, test_set, spec):
        other = collect_test_set(
            spec, 1.0, llr_max_pass=100.0, llr_max_fail=2.0, target_count=5, seed=11,
            max_frames=4000, base=FAST_BP, chunk_frames=7,
        )

        assert [r.frame_id for r in other.records] == [r.frame_id for r in test_set.records]
        assert other.header == test_set.header

    def test_broken_record_is_reported(self, test_set, spec):
        victim = test_set.records[2]
        clean = (20.0 * modulate(encode_full(victim.u))).astype(np.float32)
        records = list(test_set.records)
        records[2] = type(victim)(frame_id=victim.frame_id, u=victim.u, y=victim.y, llr=clean)
        broken = type(test_set)(header=test_set.header, records=records)

        assert validate_test_set(spec, broken) == [victim.frame_id]

    def test_wrong_code(self, test_set):
        with pytest.raises(DigestMismatchError):
            validate_test_set(construct_bhattacharyya(6, 31), test_set)

    def test_exhausted_budget(self, spec):
        partial_set = collect_test_set(
            spec, 1.0, llr_max_pass=100.0, llr_max_fail=2.0, target_count=10_000, seed=11,
            max_frames=64, base=FAST_BP, chunk_frames=32,
        )

        assert not partial_set.complete
        assert partial_set.header.candidates == 64
        assert len(partial_set) < 10_000
