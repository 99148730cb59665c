"""Tests for code construction, frozen-set extension and encoding."""
import itertools

import numpy as np
import pytest

from entities.code import EXPLICIT, EXTENDED
from entities.errors import ParameterError
from interactors.polar_core import (
    bhattacharyya_log_profile,
    code_digest,
    construct_bhattacharyya,
    encode,
    encode_full,
    explicit_code,
    extend_frozen,
    place_info_bits,
    spec_digest,
)


def codebook(spec):
    """Every codeword of a small code, as a set of tuples."""
    words = np.array(list(itertools.product((0, 1), repeat=spec.k)), dtype=np.uint8)
    return {tuple(x) for x in encode(spec, words)}


class TestConstruction:
    """Test cases for Bhattacharyya construction."""

    def test_single_kernel_profile(self):
        """Z0 = e^-1 splits into 2Z - Z^2 and Z^2."""
        z = np.exp(bhattacharyya_log_profile(1, 0.0))

        assert z[0] == pytest.approx(0.60042, abs=1e-5)
        assert z[1] == pytest.approx(0.13534, abs=1e-5)

    def test_single_kernel_picks_better_channel(self):
        assert construct_bhattacharyya(1, 1, 0.0).info_set == (1,)

    def test_length_eight_information_set(self, code_8_4):
        assert code_8_4.info_set == (3, 5, 6, 7)

    def test_full_rate(self):
        spec = construct_bhattacharyya(3, 8)
        assert spec.info_set == tuple(range(8))

    def test_nested_information_sets(self):
        """Growing k only ever adds indices."""
        previous = set()
        for k in range(1, 65):
            current = set(construct_bhattacharyya(6, k).info_set)
            assert previous < current
            previous = current

    def test_recursion_bounds(self):
        """Z+ <= Z <= Z- and Z+ + Z- <= 2Z at every split."""
        for n in range(1, 8):
            parent = np.exp(bhattacharyya_log_profile(n - 1, 1.0))
            child = np.exp(bhattacharyya_log_profile(n, 1.0))
            minus, plus = child[0::2], child[1::2]
            assert np.all(plus <= parent + 1e-15)
            assert np.all(parent <= minus + 1e-15)
            assert np.all(plus + minus <= 2 * parent + 1e-15)

    def test_profile_is_attached(self, code_64_32):
        z = code_64_32.profile.as_array()

        assert z.shape == (64,)
        assert z[code_64_32.info_indices].max() <= z[code_64_32.frozen_mask].min()

    @pytest.mark.parametrize("n, k", [(0, 1), (21, 1), (3, 0), (3, 9)])
    def test_invalid_parameters(self, n, k):
        with pytest.raises(ParameterError):
            construct_bhattacharyya(n, k)

    def test_explicit_code(self):
        spec = explicit_code(2, [3, 1])

        assert spec.info_set == (1, 3)
        assert spec.construction.kind == EXPLICIT


class TestDigest:
    """Test cases for the code digest."""

    def test_format_and_stability(self, code_8_4):
        digest = spec_digest(code_8_4)

        assert len(digest) == 16
        assert digest == code_digest(8, 4, [7, 6, 5, 3])

    def test_information_set_changes_digest(self):
        assert code_digest(8, 4, [3, 5, 6, 7]) != code_digest(8, 4, [2, 5, 6, 7])


class TestExtendFrozen:
    """Test cases for frozen-set extension."""

    def test_zero_extension_is_identity(self, code_64_32):
        assert extend_frozen(code_64_32, 0, seed=1) == code_64_32

    def test_removes_m_indices(self, code_64_32):
        extended = extend_frozen(code_64_32, 5, seed=3)

        assert extended.k == 27
        assert set(extended.info_set) < set(code_64_32.info_set)
        assert extended.rate == pytest.approx(code_64_32.rate - 5 / 64)
        assert extended.construction.kind == EXTENDED
        assert extended.construction.parent_digest == spec_digest(code_64_32)

    def test_deterministic_per_seed(self, code_64_32):
        assert extend_frozen(code_64_32, 8, seed=11) == extend_frozen(code_64_32, 8, seed=11)
        assert extend_frozen(code_64_32, 8, seed=11) != extend_frozen(code_64_32, 8, seed=12)

    def test_too_many_bits(self, code_8_4):
        with pytest.raises(ParameterError):
            extend_frozen(code_8_4, 5, seed=0)
        with pytest.raises(ParameterError):
            extend_frozen(code_8_4, 4, seed=0)

    def test_codebook_containment(self):
        """Every codeword of the extended code is a parent codeword."""
        parent = construct_bhattacharyya(4, 8)
        child = extend_frozen(parent, 3, seed=5)

        assert codebook(child) <= codebook(parent)
        assert len(codebook(child)) == 2 ** 5


class TestEncoding:
    """Test cases for the polar transform."""

    def test_length_two_kernel(self):
        assert encode_full(np.array([0, 0])).tolist() == [0, 0]
        assert encode_full(np.array([0, 1])).tolist() == [1, 1]
        assert encode_full(np.array([1, 0])).tolist() == [1, 0]

    def test_unit_rows(self):
        """Row 0 of G_N is e_0 and the last row is all ones."""
        first = np.zeros(8, dtype=np.uint8)
        first[0] = 1
        last = np.zeros(8, dtype=np.uint8)
        last[-1] = 1

        assert encode_full(first).tolist() == first.tolist()
        assert encode_full(last).tolist() == [1] * 8

    @pytest.mark.parametrize("n", range(1, 11))
    def test_involution(self, n, rng):
        v = rng.integers(0, 2, size=(100, 1 << n), dtype=np.uint8)
        assert np.array_equal(encode_full(encode_full(v)), v)

    def test_linearity(self, rng):
        a = rng.integers(0, 2, size=64, dtype=np.uint8)
        b = rng.integers(0, 2, size=64, dtype=np.uint8)
        assert np.array_equal(encode_full(a ^ b), encode_full(a) ^ encode_full(b))

    def test_batch_matches_single(self, rng):
        v = rng.integers(0, 2, size=(5, 32), dtype=np.uint8)
        batch = encode_full(v)
        for row, single in zip(batch, v):
            assert np.array_equal(row, encode_full(single))

    def test_input_is_not_modified(self):
        v = np.array([1, 1, 0, 1], dtype=np.uint8)
        encode_full(v)
        assert v.tolist() == [1, 1, 0, 1]

    def test_non_power_of_two(self):
        with pytest.raises(ParameterError, match="power of two"):
            encode_full(np.zeros(6, dtype=np.uint8))

    def test_info_bits_land_on_information_set(self, code_8_4):
        u = place_info_bits(code_8_4, np.array([1, 0, 1, 1]))
        assert u.tolist() == [0, 0, 0, 1, 0, 0, 1, 1]

    def test_wrong_info_length(self, code_8_4):
        with pytest.raises(ParameterError, match="Expected 4"):
            encode(code_8_4, np.zeros(3, dtype=np.uint8))
