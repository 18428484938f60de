import math

import numpy as np
import pytest

from optiperc import evaluation
from optiperc.evaluation import (digitize_reference, level_histograms,
                                 linear_separability_floor, pearson, sweep_eval,
                                 threshold_grid)
from optiperc.signal import BitSequence, ChannelParams, detect, modulate_nrz, prbs8
from optiperc.tasks import TaskSpec


def render_nrz(bits, b_sa, high=1.0, low=0.0):
    return np.repeat(np.where(np.asarray(bits) == 1, high, low), b_sa)


class TestDigitizeReference:
    def test_clean_round_trip(self):
        trace = render_nrz([1, 0, 1], 4)
        assert digitize_reference(trace, 4).tolist() == [1, 0, 1]

    def test_constant_trace_digitizes_to_zeros(self):
        # strict inequality against the mean breaks the tie downward
        assert digitize_reference(np.ones(12), 4).tolist() == [0, 0, 0]

    def test_indivisible_length_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            digitize_reference(np.ones(10), 4)

    def test_noisy_round_trip_at_operating_point(self):
        # ER 7 dB / SNR 14 dB: instrumentation-grade decisions, no errors
        # expected over 1e4 bits (per-bit error probability ~3e-7)
        bits = prbs8(10_000, 23)
        ch = ChannelParams(80e9, 16e9, 7.0, 14.0, 0.0)
        clean = np.abs(modulate_nrz(BitSequence(bits, 16e9), ch).samples) ** 2
        noisy = detect(clean, 14.0, rng_seed=77)
        assert np.array_equal(digitize_reference(noisy, 5), bits)


class TestThresholdGrid:
    def test_spans_range_with_sentinel(self):
        grid = threshold_grid(0.0, 1.0, 4)
        assert grid[0] == -math.inf
        assert grid[-1] == 1.0
        assert np.allclose(grid[1:], [0.25, 0.5, 0.75, 1.0])

    def test_doubling_is_nested(self):
        lo, hi = -0.3, 2.1
        coarse = set(threshold_grid(lo, hi, 16).tolist())
        fine = set(threshold_grid(lo, hi, 32).tolist())
        assert coarse <= fine


class TestSweepEval:
    def test_perfect_predictor(self):
        bits = prbs8(64, 3)
        trace = render_nrz(bits, 8)
        targets = bits.copy()
        valid = np.ones(64, dtype=bool)
        res = sweep_eval(trace, targets, valid, 8)
        assert res.error_count == 0
        assert res.is_error_free
        assert res.ber == 0.0

    def test_constant_output_scores_minority_fraction(self):
        # the sweep can always fall back to the better constant classifier
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = int(rng.integers(10, 60))
            targets = rng.integers(0, 2, n).astype(np.uint8)
            valid = np.ones(n, dtype=bool)
            trace = np.full(n * 4, 0.7)
            res = sweep_eval(trace, targets, valid, 4)
            ones = targets.sum()
            assert res.error_count == min(ones, n - ones)

    def test_inverted_targets_mirror_the_error_count(self):
        # thresholding cannot flip polarity: a perfect predictor against
        # inverted targets errs on every bit the direct case got right
        bits = prbs8(100, 9)
        trace = render_nrz(bits, 4, high=1.0, low=0.1)
        valid = np.ones(100, dtype=bool)
        direct = sweep_eval(trace, bits, valid, 4)
        inverted = sweep_eval(trace, 1 - bits, valid, 4)
        assert direct.error_count == 0
        assert inverted.error_count == min(bits.sum(), 100 - bits.sum())
        assert inverted.ber < 1.0  # constant fallback still available

    def test_tie_break_smallest_offset_then_threshold(self):
        # two offsets achieve zero errors; the earlier one must be reported
        bits = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
        trace = render_nrz(bits, 3)
        res = sweep_eval(trace, bits, np.ones(5, dtype=bool), 3)
        assert res.best_sampling_index == 0

    def test_fixed_offset_restriction(self):
        bits = prbs8(32, 4)
        trace = render_nrz(bits, 4)
        trace[1::4] = 0.5  # corrupt offset 1
        res = sweep_eval(trace, bits, np.ones(32, dtype=bool), 4, sampling_index=1)
        assert res.best_sampling_index == 1
        assert res.error_count > 0

    def test_mask_excludes_bits(self):
        bits = np.array([1, 1, 0, 1], dtype=np.uint8)
        trace = render_nrz([0, 1, 0, 1], 2)  # first bit wrong
        valid = np.array([False, True, True, True])
        res = sweep_eval(trace, bits, valid, 2)
        assert res.total_bits == 3
        assert res.error_count == 0

    def test_grid_refinement_never_hurts(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = 40
            targets = rng.integers(0, 2, n).astype(np.uint8)
            trace = rng.normal(size=n * 2)
            valid = rng.random(n) > 0.1
            if not valid.any():
                continue
            coarse = sweep_eval(trace, targets, valid, 2, threshold_levels=8)
            fine = sweep_eval(trace, targets, valid, 2, threshold_levels=16)
            assert fine.error_count <= coarse.error_count

    def test_concatenating_clean_data_cannot_raise_ber(self):
        bits = prbs8(60, 13)
        trace = render_nrz(bits, 4, low=0.1)
        noisy = trace + np.random.default_rng(1).normal(0, 0.2, trace.size)
        valid = np.ones(60, dtype=bool)
        base = sweep_eval(noisy, bits, valid, 4)
        extra_bits = prbs8(60, 29)
        both = sweep_eval(np.concatenate([noisy, render_nrz(extra_bits, 4, low=0.1)]),
                          np.concatenate([bits, extra_bits]),
                          np.ones(120, dtype=bool), 4)
        assert both.ber <= base.ber + 1e-12

    def test_empty_threshold_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_eval(np.ones(8), np.ones(4, dtype=np.uint8),
                       np.ones(4, dtype=bool), 2, threshold_levels=0)


class TestPearson:
    def test_identity(self):
        x = np.arange(10.0)
        assert pearson(x, x) == pytest.approx(1.0)

    def test_negation(self):
        x = np.arange(10.0)
        assert pearson(x, -x) == pytest.approx(-1.0)

    def test_independent_sequences_nearly_uncorrelated(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=10_000)
        y = rng.normal(size=10_000)
        assert abs(pearson(x, y)) < 0.05

    def test_affine_invariance(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=200)
        y = rng.normal(size=200)
        r = pearson(x, y)
        assert pearson(3.5 * x + 1.0, y) == pytest.approx(r, abs=1e-12)
        assert pearson(x, 0.2 * y - 4.0) == pytest.approx(r, abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError, match="variance"):
            pearson(np.ones(5), np.arange(5.0))


class TestLinearSeparabilityFloor:
    def test_xor_floors_are_one_quarter(self):
        for delay in (1, 2, 3):
            task = TaskSpec("xor", 5e9, delay_bits=delay)
            assert linear_separability_floor(task, delay + 1) == 0.25

    def test_two_bit_patterns_are_separable(self):
        for pattern in ("01", "10", "11"):
            task = TaskSpec("pattern", 5e9, pattern=pattern)
            assert linear_separability_floor(task, 2) == 0.0

    def test_three_bit_patterns_are_separable(self):
        for pattern in ("100", "101", "111"):
            task = TaskSpec("pattern", 5e9, pattern=pattern)
            assert linear_separability_floor(task, 3) == 0.0

    def test_xor_floor_with_wider_window(self):
        task = TaskSpec("xor", 5e9, delay_bits=1)
        assert linear_separability_floor(task, 3) == 0.25

    def test_oversized_window_rejected(self):
        task = TaskSpec("xor", 5e9, delay_bits=1)
        with pytest.raises(ValueError, match="window <= 4"):
            linear_separability_floor(task, 5)

    def test_undersized_window_rejected(self):
        task = TaskSpec("xor", 5e9, delay_bits=3)
        with pytest.raises(ValueError, match="memory"):
            linear_separability_floor(task, 3)


class TestLevelHistograms:
    def test_groups_by_previous_and_current_bit(self):
        bits = np.array([1, 0, 0, 1, 1], dtype=np.uint8)
        trace = render_nrz(bits, 2, high=1.0, low=0.2)
        hists = level_histograms(trace, bits, 2, 0)
        assert hists["10"] == [pytest.approx(0.2)]
        assert hists["00"] == [pytest.approx(0.2)]
        assert hists["01"] == [pytest.approx(1.0)]
        assert hists["11"] == [pytest.approx(1.0)]

    def test_constant_output_gives_identical_lists(self):
        bits = prbs8(40, 7)
        hists = level_histograms(np.full(80, 0.3), bits, 2, 1)
        values = {v for levels in hists.values() for v in levels}
        assert values == {0.3}

    def test_recognizer_isolates_its_symbol(self):
        # a perfect "10" recognizer: its symbol's levels sit strictly above
        # the union of the others
        bits = prbs8(200, 41)
        targets = np.zeros(200, dtype=np.uint8)
        targets[1:] = (bits[:-1] == 1) & (bits[1:] == 0)
        trace = render_nrz(targets, 4, high=2.0, low=0.5)
        hists = level_histograms(trace, bits, 4, 2)
        rest = hists["00"] + hists["01"] + hists["11"]
        assert min(hists["10"]) > max(rest)

    def test_deterministic_under_fixed_seed(self):
        bits = prbs8(64, 3)
        trace = detect(render_nrz(bits, 4), 10.0, rng_seed=5)
        a = level_histograms(trace, bits, 4, 2)
        b = level_histograms(trace, bits, 4, 2)
        assert a == b
