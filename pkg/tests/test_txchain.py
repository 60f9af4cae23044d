"""Tests for encoding, interleaving, mapping and frame assembly."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core.txchain.coding import (
    CodeSpec,
    convolutional_encode,
    deinterleave,
    interleave,
    interleaver_permutation,
)
from core.txchain.frame import FrameSpec, assemble_frame
from core.txchain.modulation import constellation, map_bits, qam16_gray_map
from utils.exceptions import ConfigurationError, InvalidInputError

CODE = CodeSpec()


class TestConvolutionalEncoder:
    def test_all_zero(self):
        assert_array_equal(convolutional_encode(np.zeros(10, dtype=int), CODE), np.zeros(24))

    def test_impulse_response(self):
        out = convolutional_encode([1, 0, 0], CODE, terminate=False)
        assert_array_equal(out, [1, 1, 0, 1, 1, 1])

    def test_terminated_length(self):
        assert convolutional_encode(np.ones(7, dtype=int), CODE).shape == (18,)

    def test_tail_brings_encoder_to_rest(self):
        # impulse response of a K=3 code ends after three steps
        assert_array_equal(convolutional_encode([1], CODE), [1, 1, 0, 1, 1, 1])

    def test_linearity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.integers(0, 2, 40)
            b = rng.integers(0, 2, 40)
            assert_array_equal(
                convolutional_encode(a ^ b, CODE),
                convolutional_encode(a, CODE) ^ convolutional_encode(b, CODE),
            )

    def test_batched_matches_single(self):
        rng = np.random.default_rng(2)
        u = rng.integers(0, 2, (5, 12))
        batch = convolutional_encode(u, CODE)
        for row, frame in zip(u, batch):
            assert_array_equal(convolutional_encode(row, CODE), frame)

    def test_code_properties(self):
        assert CODE.rate == 0.5
        assert CODE.memory == 2
        assert_array_equal(CODE.taps, [[1, 0, 1], [1, 1, 1]])

    def test_bad_generator(self):
        with pytest.raises(ConfigurationError):
            CodeSpec(generators_octal=(0o5, 0))

    def test_non_binary_input(self):
        with pytest.raises(InvalidInputError):
            convolutional_encode([0, 2, 1], CODE)


class TestInterleaver:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for seed in (1, 7, 2**40):
            bits = rng.integers(0, 2, 400)
            assert_array_equal(deinterleave(interleave(bits, seed), seed), bits)

    def test_round_trip_on_soft_values(self):
        values = np.random.default_rng(4).standard_normal((3, 64))
        assert_array_equal(interleave(deinterleave(values, 5), 5), values)

    def test_fixed_seed_fixed_permutation(self):
        assert_array_equal(interleaver_permutation(100, 9), interleaver_permutation(100, 9))
        assert not np.array_equal(interleaver_permutation(100, 9), interleaver_permutation(100, 10))

    def test_bijective(self):
        perm = interleaver_permutation(400, 1)
        assert_array_equal(np.sort(perm), np.arange(400))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            interleave(np.zeros(10), 1, expected_length=12)
        with pytest.raises(InvalidInputError):
            deinterleave(np.zeros(10), 1, expected_length=12)


class TestMapping:
    def test_all_zero_label(self):
        assert qam16_gray_map([0, 0, 0, 0]) == pytest.approx((-3 - 3j) / math.sqrt(10))

    @pytest.mark.parametrize("bits,expected", [
        ([1, 0, 1, 0], 3 + 3j),
        ([0, 1, 1, 1], -1 + 1j),
        ([1, 1, 0, 1], 1 - 1j),
    ])
    def test_gray_levels(self, bits, expected):
        assert qam16_gray_map(bits) == pytest.approx(expected / math.sqrt(10))

    def test_unit_average_energy(self):
        assert np.mean(np.abs(constellation()) ** 2) == pytest.approx(1.0, rel=1e-12)

    def test_neighbours_differ_in_one_bit(self):
        pts = constellation()
        step = 2 / math.sqrt(10)
        pairs = 0
        for a in range(16):
            for b in range(a + 1, 16):
                if abs(abs(pts[a] - pts[b]) - step) < 1e-9:
                    pairs += 1
                    assert bin(a ^ b).count("1") == 1
        assert pairs == 24

    def test_map_bits_groups_last_axis(self):
        bits = np.array([[0, 0, 0, 0, 1, 0, 1, 0]])
        assert_allclose(map_bits(bits), [[(-3 - 3j) / math.sqrt(10), (3 + 3j) / math.sqrt(10)]])

    def test_wrong_bit_count(self):
        with pytest.raises(InvalidInputError):
            qam16_gray_map([0, 1, 0])


class TestFrameAssembly:
    def test_sizes(self):
        spec = FrameSpec(num_subcarriers=50, tx_antennas=2)
        assert spec.coded_bits == 400
        assert spec.info_bits(CODE) == 198

    def test_bit_index_bijective(self):
        spec = FrameSpec(num_subcarriers=5, tx_antennas=2)
        idx = [spec.bit_index(k, i, m) for k in range(5) for i in range(2) for m in range(4)]
        assert sorted(idx) == list(range(spec.coded_bits))

    def test_symbols_follow_bit_index(self):
        spec = FrameSpec(num_subcarriers=6, tx_antennas=2)
        u = np.random.default_rng(5).integers(0, 2, spec.info_bits(CODE))
        frame = assemble_frame(u, spec, CODE)
        assert frame.symbols.shape == (6, 2)
        for k in range(6):
            for i in range(2):
                bits = [frame.interleaved_bits[spec.bit_index(k, i, m)] for m in range(4)]
                assert frame.symbols[k, i] == pytest.approx(qam16_gray_map(bits))

    def test_stages_consistent(self):
        spec = FrameSpec(num_subcarriers=4, tx_antennas=2, interleaver_seed=3)
        u = np.random.default_rng(6).integers(0, 2, spec.info_bits(CODE))
        frame = assemble_frame(u, spec, CODE)
        assert_array_equal(frame.coded_bits, convolutional_encode(u, CODE))
        assert_array_equal(deinterleave(frame.interleaved_bits, 3), frame.coded_bits)

    def test_frame_energy(self):
        spec = FrameSpec(num_subcarriers=50, tx_antennas=2)
        u = np.random.default_rng(7).integers(0, 2, (2000, spec.info_bits(CODE)))
        frames = assemble_frame(u, spec, CODE)
        energy = np.sum(np.abs(frames.symbols) ** 2, axis=(-2, -1))
        assert np.mean(energy) == pytest.approx(100.0, rel=0.02)

    def test_wrong_info_length(self):
        spec = FrameSpec(num_subcarriers=4, tx_antennas=2)
        with pytest.raises(InvalidInputError):
            assemble_frame(np.zeros(5, dtype=int), spec, CODE)
