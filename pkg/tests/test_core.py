import math

import numpy as np
import pytest

from optiperc import core, oracles
from optiperc.core import (ComplexWaveform, PerceptronConfig, ToyModelParams,
                           amplitudes_from_loss, config_from_loss, delay_taps,
                           perceptron_output, phase_sweep, tap_matrix,
                           toy_model_output)

RATE = 80e9
PAPER_TAP_POWERS = np.array([1.0, 0.58, 0.34, 0.2])


def nominal_config(**kw):
    return config_from_loss(6.0, **kw)


class TestWaveform:
    def test_power_definition(self):
        w = ComplexWaveform(np.array([1.0, 1j, -2.0]), RATE)
        assert w.power == pytest.approx((1 + 1 + 4) / 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ComplexWaveform(np.array([]), RATE)

    def test_bad_rate_rejected(self):
        with pytest.raises(ValueError):
            ComplexWaveform(np.ones(4), 0.0)


class TestPerceptronConfig:
    def test_reference_tap_must_be_unity(self):
        with pytest.raises(ValueError, match="reference"):
            PerceptronConfig(2, 50e-12, np.array([0.9, 0.5]), np.zeros(2))

    def test_amplitudes_must_decay(self):
        with pytest.raises(ValueError, match="non-increasing"):
            PerceptronConfig(3, 50e-12, np.array([1.0, 0.5, 0.7]), np.zeros(3))

    def test_geometric_loss_consistency(self):
        # configs built from a single per-spiral loss have a^2_k = (a^2_2)^(k-1)
        for loss in (2.5, 6.0, 9.0):
            cfg = config_from_loss(loss)
            p = cfg.amplitudes ** 2
            for k in range(cfg.n_taps):
                assert p[k] == pytest.approx(p[1] ** k, rel=0.03)


class TestDelayTaps:
    def test_impulse_copies_at_nominal_amplitudes(self):
        # unit impulse fans out to scaled impulses at multiples of the delay
        samples = np.zeros(16, dtype=complex)
        samples[0] = 1.0
        cfg = PerceptronConfig(4, 50e-12, np.sqrt(PAPER_TAP_POWERS), np.zeros(4))
        taps = delay_taps(ComplexWaveform(samples, RATE), cfg)
        for k, tap in enumerate(taps):
            expected = math.sqrt(PAPER_TAP_POWERS[k])
            assert len(tap) == 16 + 12
            nz = np.flatnonzero(tap.samples)
            assert nz.tolist() == [4 * k]
            assert tap.samples[4 * k] == pytest.approx(expected, rel=1e-12)

    def test_single_tap_is_identity(self):
        cfg = PerceptronConfig(1, 50e-12, np.array([1.0]), np.zeros(1))
        wave = ComplexWaveform(np.arange(1, 9, dtype=complex), RATE)
        (tap,) = delay_taps(wave, cfg)
        assert np.array_equal(tap.samples, wave.samples)

    def test_constant_input_settles_to_constant(self):
        cfg = PerceptronConfig(2, 50e-12, np.array([1.0, 1.0]), np.zeros(2))
        wave = ComplexWaveform(np.ones(32, dtype=complex), RATE)
        t1, t2 = delay_taps(wave, cfg)
        assert np.allclose(t1.samples[4:32], 1.0)
        assert np.allclose(t2.samples[4:32], 1.0)

    def test_non_integer_delay_reports_compliant_rate(self):
        wave = ComplexWaveform(np.ones(8, dtype=complex), 30e9)
        with pytest.raises(ValueError) as err:
            delay_taps(wave, nominal_config())
        assert "40000000000" in str(err.value)  # minimal rate 2/50ps = 40 GSa/s

    def test_matrix_matches_taps(self):
        rng = np.random.default_rng(1)
        wave = ComplexWaveform(rng.normal(size=50) + 1j * rng.normal(size=50), RATE)
        cfg = nominal_config()
        mat = tap_matrix(wave, cfg)
        for k, tap in enumerate(delay_taps(wave, cfg)):
            assert np.array_equal(mat[k], tap.samples)


class TestPerceptronOutput:
    def test_destructive_interference(self):
        taps = np.ones((2, 10), dtype=complex)
        y = perceptron_output(taps, [0.0, math.pi])
        assert np.allclose(y, 0.0, atol=1e-24)

    def test_partial_cancellation_level(self):
        # second tap at the nominal first-spiral amplitude, opposite phase
        a2 = math.sqrt(0.58)
        taps = np.vstack([np.ones(6, dtype=complex), a2 * np.ones(6, dtype=complex)])
        y = perceptron_output(taps, [0.0, math.pi])
        assert np.allclose(y, (1 - a2) ** 2)
        assert y[0] == pytest.approx(0.05684, abs=2e-5)

    def test_dark_input_stays_dark(self):
        y = perceptron_output(np.zeros((4, 20), dtype=complex),
                              [0.3, 1.0, 2.0, 3.0])
        assert np.array_equal(y, np.zeros(20))

    def test_noise_off_is_deterministic(self):
        rng = np.random.default_rng(7)
        taps = rng.normal(size=(4, 30)) + 1j * rng.normal(size=(4, 30))
        phases = rng.uniform(0, 2 * math.pi, 4)
        assert np.array_equal(perceptron_output(taps, phases),
                              perceptron_output(taps, phases))

    def test_phase_noise_reproducible_per_seed(self):
        taps = np.ones((4, 10), dtype=complex)
        phases = np.zeros(4)
        a = perceptron_output(taps, phases, 0.01, rng_seed=5)
        b = perceptron_output(taps, phases, 0.01, rng_seed=5)
        c = perceptron_output(taps, phases, 0.01, rng_seed=6)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_length_mismatch_rejected(self):
        w1 = ComplexWaveform(np.ones(5, dtype=complex), RATE)
        w2 = ComplexWaveform(np.ones(6, dtype=complex), RATE)
        with pytest.raises(ValueError, match="disagree"):
            perceptron_output([w1, w2], [0.0, 0.0])


class TestInvariantsAgainstOracles:
    def test_energy_positivity_and_oracle_equivalence(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            taps = rng.normal(size=(4, 64)) + 1j * rng.normal(size=(4, 64))
            phases = rng.uniform(0, 2 * math.pi, 4)
            y = perceptron_output(taps, phases)
            assert np.all(y >= 0.0)
            ref = np.array(oracles.naive_weighted_sum_power(taps, phases))
            assert np.max(np.abs(y - ref) / np.maximum(ref, 1e-300)) < 1e-12

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(3)
        taps = rng.normal(size=(4, 40)) + 1j * rng.normal(size=(4, 40))
        phases = rng.uniform(0, 2 * math.pi, 4)
        for delta in (0.1, 1.7, -2.9):
            shifted = perceptron_output(taps, phases + delta)
            assert np.allclose(shifted, perceptron_output(taps, phases),
                               rtol=1e-12, atol=1e-12)

    def test_two_pi_periodicity(self):
        rng = np.random.default_rng(4)
        taps = rng.normal(size=(3, 25)) + 1j * rng.normal(size=(3, 25))
        phases = rng.uniform(0, 2 * math.pi, 3)
        bumped = phases + 2 * math.pi * np.array([1, -2, 3])
        assert np.allclose(perceptron_output(taps, bumped),
                           perceptron_output(taps, phases), rtol=1e-9, atol=1e-9)

    def test_interference_bounds_against_grid(self):
        amps = np.sqrt(PAPER_TAP_POWERS)
        grid_min, grid_max = oracles.interference_extremes(amps, grid_points=40)
        assert grid_max == pytest.approx(np.sum(amps) ** 2, rel=1e-9)
        # amplitudes can cancel (largest < sum of the rest): true minimum is 0
        assert grid_min < 0.02
        lopsided_min, lopsided_max = oracles.interference_extremes([1.0, 0.2],
                                                                   grid_points=40)
        assert lopsided_min == pytest.approx((1 - 0.2) ** 2, rel=1e-9)
        assert lopsided_max == pytest.approx((1 + 0.2) ** 2, rel=1e-9)

    def test_fast_accumulation_matches_padded_matrix(self):
        rng = np.random.default_rng(11)
        wave = ComplexWaveform(rng.normal(size=200) + 1j * rng.normal(size=200), RATE)
        cfg = nominal_config()
        phases = rng.uniform(0, 2 * math.pi, 4)
        ref = perceptron_output(tap_matrix(wave, cfg), phases)[:200]
        fast = core.delayed_weighted_power(wave.samples, cfg.amplitudes, phases, 4)
        assert np.allclose(ref, fast, rtol=1e-12, atol=1e-12)


class TestToyModel:
    def test_null_input(self):
        p = ToyModelParams(0.7, 1.1, 0.5, 0.9)
        assert toy_model_output(0, 0, 0, p) == 0.0

    def test_reference_arm_only(self):
        p = ToyModelParams(2.2, 0.4, 0.8, 0.6)
        assert toy_model_output(1, 0, 0, p) == pytest.approx(1.0)

    def test_balanced_destructive_point(self):
        p = ToyModelParams(math.pi, 0.0, 1.0, 1.0)
        assert toy_model_output(1, 1, 1, p) == pytest.approx(1.0)

    def test_general_form_matches_naive(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            u = rng.uniform(0, 1, 3)
            p = ToyModelParams(rng.uniform(0, 2 * math.pi),
                               rng.uniform(0, 2 * math.pi),
                               rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.5))
            want = oracles.naive_three_signal(u[0], u[1], u[2], p.a2, p.gamma,
                                              p.phi_c, p.phi_r)
            assert toy_model_output(*u, p) == pytest.approx(want, rel=1e-12)

    def test_reduction_matches_closed_form(self):
        # with equal non-reference inputs the output collapses to
        # |u1 + a2*u2*e^{i phi_c}*(1 + gamma*e^{i phi_r})|^2
        rng = np.random.default_rng(10)
        for _ in range(50):
            u1, u2 = rng.uniform(0, 1, 2)
            p = ToyModelParams(rng.uniform(0, 2 * math.pi),
                               rng.uniform(0, 2 * math.pi),
                               rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.5))
            closed = abs(u1 + p.a2 * u2 * np.exp(1j * p.phi_c)
                         * (1 + p.gamma * np.exp(1j * p.phi_r))) ** 2
            got = toy_model_output(u1, u2, u2, p)
            assert abs(got - closed) <= 1e-12 * max(closed, 1.0)


class TestPhaseSweep:
    A2 = math.sqrt(0.58)
    GAMMA = math.sqrt(0.34 / 0.58)

    def test_degenerate_grid(self):
        t = phase_sweep([0.3], [0.1], [(1.0, 0.5, 0.25)], self.A2, self.GAMMA)
        assert t.outputs.shape == (1, 1, 1)
        p = ToyModelParams(0.3, 0.1, self.A2, self.GAMMA)
        assert t.outputs[0, 0, 0] == pytest.approx(toy_model_output(1, 0.5, 0.25, p))

    def test_table_matches_naive_oracle(self):
        grid = np.linspace(0, 2 * math.pi, 13)
        phi_r = [0.0, 1.0]
        inputs = [(1, 1, 1), (0, 1, 1)]
        t = phase_sweep(grid, phi_r, inputs, 1.0, 1.0)
        for i, pr in enumerate(phi_r):
            for j, pc in enumerate(grid):
                for m, u in enumerate(inputs):
                    want = oracles.naive_three_signal(*u, 1.0, 1.0, pc, pr)
                    assert t.outputs[i, j, m] == pytest.approx(want, rel=1e-12)

    def test_zero_relative_phase_separates_delayed_pair_only(self):
        # with aligned delayed arms their class sits at a2^2*(1+gamma)^2 ~ 1.8,
        # above the reference-only class at 1, so a common phase exists where
        # it alone clears a threshold; the reference-only class is sandwiched
        # and cannot be isolated until the relative phase shrinks the pair
        grid = np.radians(np.arange(0, 360.0, 1.0))
        t = phase_sweep(grid, [0.0], [(1, 1, 1), (1, 0, 0), (0, 1, 1)],
                        self.A2, self.GAMMA)
        pair_margin, _, _ = core.best_separation(t, [(0, 1, 1)],
                                                 [(1, 1, 1), (1, 0, 0)])
        assert pair_margin > 0.05
        ref_margin, _, _ = core.best_separation(t, [(1, 0, 0)],
                                                [(1, 1, 1), (0, 1, 1)])
        assert ref_margin < 0.0
        # freeing the relative phase rescues the reference-only class
        t2 = phase_sweep(grid, np.radians(np.arange(0, 181.0, 1.0)),
                         [(1, 1, 1), (1, 0, 0), (0, 1, 1)], self.A2, self.GAMMA)
        best, _, _ = core.best_separation(t2, [(1, 0, 0)],
                                          [(1, 1, 1), (0, 1, 1)])
        assert best > 0.05

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            phase_sweep([], [0.0], [(1, 1, 1)], 1.0, 1.0)


class TestAmplitudesFromLoss:
    def test_nominal_loss_reproduces_tap_powers(self):
        amps = amplitudes_from_loss(6.0, core.DEFAULT_SPIRAL_LENGTH_CM, 4)
        np.testing.assert_allclose(amps ** 2, PAPER_TAP_POWERS, rtol=0.03)
        assert amps[0] == 1.0

    def test_lossless(self):
        assert np.array_equal(amplitudes_from_loss(0.0, 0.4, 4), np.ones(4))

    def test_reduced_loss_variant(self):
        amps = amplitudes_from_loss(2.5, core.DEFAULT_SPIRAL_LENGTH_CM, 4)
        np.testing.assert_allclose(amps ** 2, [1.0, 0.797, 0.635, 0.506],
                                   atol=5e-4)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            amplitudes_from_loss(-1.0, 0.4, 4)
        with pytest.raises(ValueError):
            amplitudes_from_loss(6.0, 0.0, 4)
