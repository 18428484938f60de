import itertools

import numpy as np
import pytest

from optiperc import oracles
from optiperc.signal import prbs8
from optiperc.tasks import (TaskSpec, statistical_ber_limit, target_delayed_xor,
                            target_pattern, target_phase_decode)


class TestTaskSpec:
    def test_all_zero_pattern_rejected(self):
        with pytest.raises(ValueError, match="unrecognizable"):
            TaskSpec("pattern", 16e9, pattern="00")

    def test_pattern_length_bounds(self):
        with pytest.raises(ValueError):
            TaskSpec("pattern", 16e9, pattern="1")
        with pytest.raises(ValueError):
            TaskSpec("pattern", 16e9, pattern="1010")

    def test_xor_delay_bounds(self):
        with pytest.raises(ValueError):
            TaskSpec("xor", 16e9, delay_bits=0)

    def test_labels(self):
        assert TaskSpec("pattern", 1e9, pattern="10").label == "pattern-10"
        assert TaskSpec("xor", 1e9, delay_bits=2).label == "xor-2"
        assert TaskSpec("phase-decode", 1e9).label == "phase-decode"


class TestTargetPattern:
    def test_basic_two_bit(self):
        targets, valid = target_pattern([1, 0, 1, 0], "10")
        assert targets.tolist() == [0, 1, 0, 1]
        assert valid.tolist() == [False, True, True, True]

    def test_all_ones_never_match_10(self):
        targets, valid = target_pattern(np.ones(6, dtype=np.uint8), "10")
        assert targets[valid].sum() == 0

    def test_prbs_three_bit_pattern_count(self):
        # every nonzero 3-bit subword occurs 32 times per m-sequence period
        bits = prbs8(255 + 2, 63)
        targets, valid = target_pattern(bits, "100")
        assert valid.sum() == 255
        assert targets[valid].sum() == 32

    def test_pattern_longer_than_input_rejected(self):
        with pytest.raises(ValueError):
            target_pattern([1, 0], "100")

    def test_against_window_scanner_all_length8_inputs(self):
        # exhaustive cross-check against the brute-force scanning oracle
        for pattern in ("10", "01", "11", "100", "011"):
            for value in range(256):
                bits = [(value >> k) & 1 for k in range(8)]
                expected = oracles.brute_force_pattern_targets(bits, pattern)
                targets, valid = target_pattern(bits, pattern)
                got = list(zip(valid.tolist(), targets.tolist()))
                assert [(v, t if v else 0) for v, t in expected] == got

    def test_complement_relabel_consistency(self):
        # relabeling 0<->1 in both the bits and the pattern preserves targets
        rng = np.random.default_rng(5)
        for _ in range(40):
            bits = rng.integers(0, 2, 12).astype(np.uint8)
            t1, v1 = target_pattern(bits, "10")
            t2, v2 = target_pattern(1 - bits, "01")
            assert np.array_equal(t1, t2) and np.array_equal(v1, v2)


class TestTargetDelayedXor:
    def test_basic(self):
        targets, valid = target_delayed_xor([0, 1, 1, 0], 1)
        assert targets.tolist() == [0, 1, 0, 1]
        assert valid.tolist() == [False, True, True, True]

    def test_constant_sequence_gives_zero_targets(self):
        targets, valid = target_delayed_xor(np.ones(9, dtype=np.uint8), 1)
        assert targets[valid].sum() == 0

    def test_prbs_shift_and_add_property(self):
        # XOR of an m-sequence with its own shift is another m-sequence,
        # hence balanced at 128 ones per cyclic period
        bits = prbs8(255, 17)
        cyclic = bits ^ np.roll(bits, 1)
        assert cyclic.sum() == 128
        targets, valid = target_delayed_xor(bits, 1)
        assert np.array_equal(targets[valid], cyclic[1:])

    def test_excessive_delay_rejected(self):
        with pytest.raises(ValueError):
            target_delayed_xor([0, 1], 2)

    def test_causality_and_mask_width(self):
        # targets depend only on bits up to their own index
        rng = np.random.default_rng(6)
        for n in (1, 2, 3):
            bits = rng.integers(0, 2, 20).astype(np.uint8)
            targets, valid = target_delayed_xor(bits, n)
            assert (~valid).sum() == n
            mutated = bits.copy()
            mutated[15:] = 1 - mutated[15:]
            t2, _ = target_delayed_xor(mutated, n)
            assert np.array_equal(targets[:15], t2[:15])


class TestTargetPhaseDecode:
    def test_identity(self):
        targets, valid = target_phase_decode([0, 1, 0])
        assert targets.tolist() == [0, 1, 0]
        assert valid.all()

    def test_prbs_identity(self):
        bits = prbs8(255, 200)
        targets, _ = target_phase_decode(bits)
        assert np.array_equal(targets, bits)


class TestStatisticalBerLimit:
    def test_paper_operating_points(self):
        # ten 2-microsecond captures at each line rate
        for rate_gbps, expected in ((5, 1e-5), (8, 6.25e-6), (10, 5e-6),
                                    (16, 3.125e-6)):
            bits = round(10 * 2e-6 * rate_gbps * 1e9)
            assert statistical_ber_limit(bits) == pytest.approx(expected)
        # one-significant-digit rounding matches the reported set
        assert f"{statistical_ber_limit(round(10 * 2e-6 * 8e9)):.0e}" == "6e-06"

    def test_single_bit(self):
        assert statistical_ber_limit(1) == 1.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            statistical_ber_limit(0)
