"""Tests for belief-propagation decoding."""
import math

import numpy as np
import pytest

from entities.channel import ChannelConfig, LlrFrame
from entities.decoder import BOXPLUS_EXACT, STOP_FIXED, DecoderConfig, MessageGraph
from entities.errors import ParameterError
from interactors.bp_decoder import (
    boxplus_exact,
    boxplus_min,
    check_codeword,
    decode,
    decode_batch,
    hard_decision,
    init_messages,
    layer_orders,
    pe_update,
    run_iteration,
)
from interactors.channel import frame_rng, modulate, random_frame
from interactors.polar_core import construct_bhattacharyya, encode_full, place_info_bits


def saturated_frame(spec, u, llr_max=20.0):
    """Noiseless frame whose LLRs sit exactly at the clipping value."""
    s = modulate(encode_full(u))
    return LlrFrame(values=llr_max * s, y=s, sigma2=0.5)


def noisy_frames(spec, ebn0_db, count, seed=5):
    channel = ChannelConfig(ebn0_db=ebn0_db, rate=spec.rate)
    pairs = [random_frame(spec, channel, frame_rng(seed, 0, i)) for i in range(count)]
    return np.stack([u for u, _ in pairs]), [f for _, f in pairs]


class TestBoxplus:
    """Test cases for the boxplus variants."""

    def test_exact_value(self):
        expected = math.log((1 + math.exp(5)) / (math.exp(2) + math.exp(3)))
        assert boxplus_exact(2.0, 3.0) == pytest.approx(expected, abs=1e-12)
        assert boxplus_exact(2.0, 3.0) == pytest.approx(1.6935, abs=1e-4)

    def test_zero_absorbs(self):
        assert boxplus_exact(7.0, 0.0) == 0.0
        assert boxplus_min(-7.0, 0.0) == 0.0

    def test_saturation(self):
        assert abs(boxplus_exact(5.0, 100.0) - 5.0) < 1e-6
        assert abs(boxplus_exact(-3.0, 1e3) + 3.0) < 1e-6

    def test_min_approx(self):
        assert boxplus_min(2.0, 3.0) == 2.0
        assert boxplus_min(-2.0, 3.0) == -2.0

    def test_algebra_on_random_pairs(self):
        """Symmetry, sign product, magnitude bound and distance to min-sum."""
        rng = np.random.default_rng(42)
        a = rng.uniform(-50, 50, 1_000_000)
        b = rng.uniform(-50, 50, 1_000_000)
        exact = boxplus_exact(a, b)
        approx = boxplus_min(a, b)

        assert np.array_equal(exact, boxplus_exact(b, a))
        assert np.all(np.sign(exact) == np.sign(a) * np.sign(b))
        assert np.all(np.abs(exact) <= np.minimum(np.abs(a), np.abs(b)) + 1e-12)
        assert np.all(np.abs(exact - approx) < math.log(2.0))

    def test_no_overflow(self):
        with np.errstate(over="raise"):
            assert boxplus_exact(800.0, -900.0) == pytest.approx(-800.0)


class TestProcessingElement:
    """Test cases for pe_update."""

    def test_zero_right_messages(self):
        R1, R2, L1, L2 = pe_update(2.0, 3.0, 0.0, 0.0)

        assert L1 == pytest.approx(boxplus_min(2.0, 3.0))
        assert L2 == pytest.approx(3.0)

    def test_all_zero_fixed_point(self):
        assert all(v == 0.0 for v in pe_update(0.0, 0.0, 0.0, 0.0))

    def test_scaled_output(self):
        """Only the boxplus term is scaled."""
        _, _, L1, L2 = pe_update(2.0, 3.0, 0.0, 0.0, alpha=0.9375)

        assert L1 == pytest.approx(1.875)
        assert L2 == pytest.approx(3.0)

    def test_outputs_are_clipped(self):
        R1, R2, L1, L2 = pe_update(15.0, 15.0, 15.0, 15.0, llr_max=20.0)

        assert (R1, R2, L1, L2) == (15.0, 20.0, 15.0, 20.0)

    def test_internal_sum_is_not_clipped(self):
        """f sees L_in2 + R_in2 = 30 even when llr_max is 20."""
        _, _, L1, _ = pe_update(19.0, 15.0, 0.0, 15.0, f=boxplus_exact, llr_max=20.0)

        assert L1 == pytest.approx(boxplus_exact(19.0, 30.0))
        assert L1 != pytest.approx(boxplus_exact(19.0, 20.0))

    def test_right_outputs(self):
        R1, R2, _, _ = pe_update(4.0, -1.0, 2.0, 3.0)

        assert R1 == pytest.approx(boxplus_min(2.0, 2.0))
        assert R2 == pytest.approx(boxplus_min(2.0, 4.0) + 3.0)


class TestMessages:
    """Test cases for message initialisation and hard decisions."""

    def test_priors_and_channel(self, code_8_4):
        llr = np.array([35.0, -35.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        graph = init_messages(code_8_4, llr, DecoderConfig(llr_max=20.0))

        assert graph.L.shape == (4, 1, 8)
        assert graph.R[0, 0].tolist() == [20, 20, 20, 0, 20, 0, 0, 0]
        assert graph.L[3, 0, :2].tolist() == [20.0, -20.0]
        assert not graph.L[:3].any()
        assert not graph.R[1:].any()

    def test_wrong_length(self, code_8_4):
        with pytest.raises(ParameterError, match="does not match"):
            init_messages(code_8_4, np.zeros(4), DecoderConfig())

    def test_bad_layer_order(self, code_8_4):
        with pytest.raises(ParameterError, match="permutation"):
            init_messages(code_8_4, np.zeros(8), DecoderConfig(), layer_order=(0, 0, 1))

    def test_hard_decision_convention(self):
        L = np.zeros((2, 1, 4))
        R = np.zeros((2, 1, 4))
        L[0, 0] = [5.0, -3.0, 0.0, 1.0]
        R[0, 0] = [0.0, 0.0, 0.0, -2.0]
        graph = MessageGraph(L=L, R=R, layer_order=(0, 1), llr_max=20.0)

        u_hat, _ = hard_decision(graph)

        assert u_hat[0].tolist() == [0, 1, 0, 1]


class TestCodewordCheck:
    """Test cases for the G-matrix check."""

    def test_zero_pair(self, code_8_4):
        assert check_codeword(np.zeros(8), np.zeros(8), code_8_4)

    def test_every_single_flip_is_rejected(self, rng):
        spec = construct_bhattacharyya(4, 8)
        u = place_info_bits(spec, rng.integers(0, 2, size=8))
        x = encode_full(u)

        assert check_codeword(u, x, spec)
        for i in range(16):
            flipped = x.copy()
            flipped[i] ^= 1
            assert not check_codeword(u, flipped, spec)

    def test_frozen_violation(self, code_8_4):
        u = np.zeros(8, dtype=np.uint8)
        u[0] = 1
        assert not check_codeword(u, encode_full(u), code_8_4)

    def test_batch_result(self, code_8_4):
        u = np.zeros((2, 8), dtype=np.uint8)
        x = np.zeros((2, 8), dtype=np.uint8)
        x[1, 0] = 1
        assert check_codeword(u, x, code_8_4).tolist() == [True, False]


class TestIteration:
    """Test cases for run_iteration and decode."""

    def test_saturated_all_zero_frame(self, code_64_32):
        result = decode(code_64_32, saturated_frame(code_64_32, np.zeros(64, dtype=np.uint8)), DecoderConfig())

        assert result.converged
        assert result.iterations_used == 1
        assert not result.u_hat.any()

    def test_saturated_random_frame(self, code_64_32, rng):
        u = place_info_bits(code_64_32, rng.integers(0, 2, size=32))
        result = decode(code_64_32, saturated_frame(code_64_32, u), DecoderConfig())

        assert result.converged
        assert result.iterations_used <= 2
        assert np.array_equal(result.u_hat, u)

    def test_all_but_one_frozen_zero_channel(self):
        """Frozen priors decide their bits with no channel information."""
        spec = construct_bhattacharyya(3, 1)
        result = decode(spec, np.zeros(8), DecoderConfig(max_iters=3))
        assert not result.u_hat.any()

    def test_fixed_iterations(self, code_64_32):
        u_true, frames = noisy_frames(code_64_32, 1.0, 5)
        cfg = DecoderConfig(max_iters=1, stopping=STOP_FIXED)
        for frame in frames:
            assert decode(code_64_32, frame, cfg).iterations_used == 1

    def test_clipping_closure(self, code_64_32):
        """No message ever exceeds llr_max, checked after every pass."""
        _, frames = noisy_frames(code_64_32, 1.0, 10)
        cfg = DecoderConfig(llr_max=4.0, max_iters=30, boxplus_mode=BOXPLUS_EXACT, debug_checks=True)
        graph = init_messages(code_64_32, np.stack([f.values for f in frames]), cfg)
        for _ in range(30):
            run_iteration(graph, cfg)
            assert graph.max_abs() <= 4.0

    def test_sign_flip_counts_bounded(self, code_64_32):
        _, frames = noisy_frames(code_64_32, 0.0, 10)
        cfg = DecoderConfig(max_iters=40, flip_window=10)
        for frame in frames:
            counts = decode(code_64_32, frame, cfg).sign_flip_counts
            assert counts.min() >= 0
            assert counts.max() <= 10

    def test_complement_symmetry(self, rng):
        """With no frozen bits, negated LLRs give the complemented codeword."""
        spec = construct_bhattacharyya(4, 16)
        llr = rng.normal(0.0, 3.0, size=16)
        cfg = DecoderConfig(max_iters=5, stopping=STOP_FIXED, precision="f64")

        a = decode(spec, llr, cfg)
        b = decode(spec, -llr, cfg)

        assert np.array_equal(a.x_hat ^ 1, b.x_hat)

    def test_precision_selects_dtype(self, code_8_4):
        graph = init_messages(code_8_4, np.ones(8), DecoderConfig(precision="f64"))
        assert graph.L.dtype == np.float64


class TestBatchDecoding:
    """Test cases for decode_batch."""

    def test_rows_match_single_frame_decoding(self, code_64_32):
        _, frames = noisy_frames(code_64_32, 1.5, 24)
        cfg = DecoderConfig(max_iters=50)
        batch = decode_batch(code_64_32, np.stack([f.values for f in frames]), cfg)

        assert len(batch) == 24
        for i, frame in enumerate(frames):
            single = decode(code_64_32, frame, cfg)
            assert np.array_equal(batch.u_hat[i], single.u_hat)
            assert batch.iterations_used[i] == single.iterations_used
            assert batch.converged[i] == single.converged
            assert np.array_equal(batch.sign_flip_counts[i], single.sign_flip_counts)

    def test_converged_rows_are_codewords(self, code_64_32):
        _, frames = noisy_frames(code_64_32, 2.5, 16)
        result = decode_batch(code_64_32, np.stack([f.values for f in frames]), DecoderConfig())
        for i in np.flatnonzero(result.converged):
            assert check_codeword(result.u_hat[i], result.x_hat[i], code_64_32)


class TestLayerOrders:
    """Test cases for multi-trellis layer orders."""

    def test_enumeration_order(self):
        assert list(layer_orders(3)) == [
            (0, 1, 2),
            (1, 2, 0),
            (2, 0, 1),
            (0, 2, 1),
            (1, 0, 2),
            (2, 1, 0),
        ]

    def test_budget(self):
        assert list(layer_orders(4, 2)) == [(0, 1, 2, 3), (1, 2, 3, 0)]

    def test_every_order_realises_the_same_code(self, code_64_32, rng):
        u = place_info_bits(code_64_32, rng.integers(0, 2, size=32))
        frame = saturated_frame(code_64_32, u)
        for order in layer_orders(6, 12):
            result = decode(code_64_32, frame, DecoderConfig(), layer_order=order)
            assert result.converged
            assert np.array_equal(result.u_hat, u)

    def test_all_orders_agree_at_n3(self, code_8_4):
        """All 3! graphs decode every noiseless (8, 4) codeword to the same u."""
        orders = list(layer_orders(3))
        assert len(orders) == math.factorial(3)
        for word in range(16):
            u = place_info_bits(code_8_4, np.array([(word >> b) & 1 for b in range(4)], dtype=np.uint8))
            frame = saturated_frame(code_8_4, u)
            decoded = [decode(code_8_4, frame, DecoderConfig(), layer_order=order) for order in orders]

            assert all(result.converged for result in decoded)
            assert all(np.array_equal(result.u_hat, u) for result in decoded)
            assert all(np.array_equal(result.x_hat, decoded[0].x_hat) for result in decoded)
