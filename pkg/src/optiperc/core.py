"""Coherent delay-line perceptron model.

A single input field is split into N delayed, attenuated copies; each copy
picks up a trainable phase and the copies are summed coherently.  A square-law
detector turns the sum into the real-valued prediction

    y(t) = | sum_k a_k * e^{i phi_k} * u(t - (k-1)*dt) |^2

Amplitudes a_k are fixed by the delay-line propagation losses; only the
phases are trainable.  A reduced three-signal model (one reference arm plus
two arms sharing a common phase) is included for phase-response studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

#: Per-spiral length (cm) that makes a 6 dB/cm propagation loss reproduce the
#: nominal second-tap power of 0.58: L = 10*log10(1/0.58)/6.
DEFAULT_SPIRAL_LENGTH_CM = 10.0 * math.log10(1.0 / 0.58) / 6.0


@dataclass(frozen=True)
class ComplexWaveform:
    """Uniformly sampled complex field envelope.

    ``samples`` are dimensionless field amplitudes such that ``|samples|**2``
    is optical power in linear units.  ``sample_rate`` is in Sa/s.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("waveform must hold at least one sample")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise ValueError("waveform samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def power(self) -> float:
        """Mean optical power, mean(|samples|^2)."""
        return float(np.mean(np.abs(self.samples) ** 2))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class PerceptronConfig:
    """Static device description: tap count, delay, amplitudes, phases.

    The first tap is the lossless reference (``amplitudes[0] == 1``);
    amplitudes are non-increasing because longer spirals lose more power.
    ``phase_noise_frac`` is the per-acquisition weight-phase fluctuation,
    expressed as a fraction of a full turn (mode ``"fraction-of-2pi"``) or of
    the trained phase value itself (mode ``"fraction-of-value"``).
    """

    n_taps: int
    delta_t: float
    amplitudes: np.ndarray
    phases: np.ndarray
    phase_noise_frac: float = 0.0
    phase_noise_mode: str = "fraction-of-2pi"

    def __post_init__(self):
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        amps = np.asarray(self.amplitudes, dtype=np.float64)
        phases = np.asarray(self.phases, dtype=np.float64)
        if amps.shape != (self.n_taps,):
            raise ValueError(f"expected {self.n_taps} amplitudes, got shape {amps.shape}")
        if phases.shape != (self.n_taps,):
            raise ValueError(f"expected {self.n_taps} phases, got shape {phases.shape}")
        if np.any(amps < 0):
            raise ValueError("amplitudes must be nonnegative")
        if abs(amps[0] - 1.0) > 1e-12:
            raise ValueError(f"first tap is the reference and must have amplitude 1, got {amps[0]}")
        if np.any(np.diff(amps) > 1e-12):
            raise ValueError("amplitudes must be non-increasing in tap index")
        if self.phase_noise_frac < 0:
            raise ValueError("phase_noise_frac must be nonnegative")
        if self.phase_noise_mode not in ("fraction-of-2pi", "fraction-of-value"):
            raise ValueError(f"unknown phase_noise_mode {self.phase_noise_mode!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    def with_phases(self, phases) -> "PerceptronConfig":
        return PerceptronConfig(self.n_taps, self.delta_t, self.amplitudes,
                                np.asarray(phases, dtype=np.float64),
                                self.phase_noise_frac, self.phase_noise_mode)


@dataclass(frozen=True)
class ToyModelParams:
    """Parameters of the reduced three-signal model.

    One unit reference arm interferes with two arms of amplitude ``a2`` and
    ``a2*gamma`` carrying a common phase ``phi_c`` and a relative phase
    ``phi_r`` between them.
    """

    phi_c: float
    phi_r: float
    a2: float
    gamma: float

    def __post_init__(self):
        if not self.a2 > 0:
            raise ValueError(f"a2 must be positive, got {self.a2}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def required_sample_rate(sample_rate: float, delta_t: float) -> float:
    """Smallest rate >= sample_rate for which delta_t is a whole number of samples."""
    k = math.ceil(sample_rate * delta_t - 1e-9)
    return max(k, 1) / delta_t


def delay_samples(sample_rate: float, delta_t: float) -> int:
    """Per-tap delay in samples; errors if delta_t is not a whole number of samples."""
    exact = sample_rate * delta_t
    rounded = round(exact)
    if rounded < 1 or abs(exact - rounded) > 1e-6 * max(1.0, abs(exact)):
        raise ValueError(
            f"tap delay {delta_t} s is not an integer number of samples at "
            f"{sample_rate} Sa/s; minimal compliant sample rate is "
            f"{required_sample_rate(sample_rate, delta_t)} Sa/s"
        )
    return int(rounded)


def delay_taps(input_wave: ComplexWaveform, config: PerceptronConfig) -> list[ComplexWaveform]:
    """Split the input into N delayed, attenuated copies.

    Tap k (0-based) is the input scaled by ``amplitudes[k]`` and shifted right
    by ``k`` tap delays, zero-padded at the head (no signal before it
    arrives).  Every returned waveform has length ``len(input) + (N-1)*D``
    samples, D being the tap delay in samples.
    """
    if len(input_wave) == 0:
        raise ValueError("empty input waveform")
    n = config.n_taps
    d = delay_samples(input_wave.sample_rate, config.delta_t)
    total = len(input_wave) + (n - 1) * d
    taps = []
    for k in range(n):
        shifted = np.zeros(total, dtype=np.complex128)
        shifted[k * d:k * d + len(input_wave)] = config.amplitudes[k] * input_wave.samples
        taps.append(ComplexWaveform(shifted, input_wave.sample_rate))
    return taps


def tap_matrix(input_wave: ComplexWaveform, config: PerceptronConfig) -> np.ndarray:
    """Delayed copies stacked as an (N, L + (N-1)*D) complex matrix.

    Row k equals ``delay_taps(...)[k].samples``; the matrix form is the fast
    path for evaluating many phase vectors against one acquisition.
    """
    if len(input_wave) == 0:
        raise ValueError("empty input waveform")
    n = config.n_taps
    d = delay_samples(input_wave.sample_rate, config.delta_t)
    total = len(input_wave) + (n - 1) * d
    mat = np.zeros((n, total), dtype=np.complex128)
    for k in range(n):
        mat[k, k * d:k * d + len(input_wave)] = config.amplitudes[k] * input_wave.samples
    return mat


def delayed_weighted_power(field: np.ndarray, amplitudes, phases,
                           delay: int, out_len: int | None = None) -> np.ndarray:
    """Detector output of the delay-line sum without materializing the taps.

    Accumulates sum_k a_k e^{i phi_k} u(t - k*delay) in place and returns its
    squared magnitude over the first ``out_len`` samples (default: the input
    length).  Identical to ``perceptron_output(tap_matrix(...), ...)`` with
    noise off, restricted to the un-padded span; this is the hot path for
    training loops.
    """
    field = np.asarray(field, dtype=np.complex128)
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    if out_len is None:
        out_len = field.size
    if out_len > field.size:
        raise ValueError("out_len exceeds the input length")
    acc = np.zeros(out_len, dtype=np.complex128)
    weights = amplitudes * np.exp(1j * phases)
    for k, w in enumerate(weights):
        shift = k * delay
        if shift >= out_len:
            break
        acc[shift:] += w * field[:out_len - shift]
    return acc.real ** 2 + acc.imag ** 2


def draw_phase_noise(n_taps: int, phases: np.ndarray, frac: float, rng,
                     mode: str = "fraction-of-2pi") -> np.ndarray:
    """One per-acquisition draw of the weight-phase fluctuations.

    The fluctuation on each tap is Gaussian; its standard deviation is
    ``frac * 2*pi`` ("fraction-of-2pi", default) or ``frac * |phi_k|``
    ("fraction-of-value").  The draw models slow thermal drift, so it is
    taken once per acquired trace, not per sample.
    """
    if frac == 0.0:
        return np.zeros(n_taps)
    if mode == "fraction-of-2pi":
        sigma = frac * TWO_PI * np.ones(n_taps)
    elif mode == "fraction-of-value":
        sigma = frac * np.abs(np.asarray(phases, dtype=np.float64))
    else:
        raise ValueError(f"unknown phase_noise_mode {mode!r}")
    return rng.normal(0.0, 1.0, n_taps) * sigma


def weighted_sum_power(taps: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """|sum_k taps[k] * e^{i phases[k]}|^2 along the sample axis."""
    weights = np.exp(1j * np.asarray(phases, dtype=np.float64))
    field = weights @ taps
    return (field.real ** 2 + field.imag ** 2)


def perceptron_output(taps: Sequence[ComplexWaveform] | np.ndarray,
                      phases,
                      phase_noise_frac: float = 0.0,
                      rng_seed: int | None = None,
                      phase_noise_mode: str = "fraction-of-2pi") -> np.ndarray:
    """Coherent sum of the taps through the square-law detector.

    Returns the real-valued prediction y(t).  With ``phase_noise_frac > 0`` a
    single Gaussian phase fluctuation per tap is drawn from ``rng_seed`` and
    added to the programmed phases; with 0 the output is deterministic.
    """
    if isinstance(taps, np.ndarray):
        mat = np.asarray(taps, dtype=np.complex128)
        if mat.ndim != 2:
            raise ValueError("tap matrix must be 2-D (n_taps, n_samples)")
    else:
        taps = list(taps)
        if not taps:
            raise ValueError("need at least one tap")
        length = len(taps[0])
        rate = taps[0].sample_rate
        for t in taps[1:]:
            if len(t) != length or t.sample_rate != rate:
                raise ValueError(
                    f"taps disagree in length/rate: {len(t)} @ {t.sample_rate} vs {length} @ {rate}"
                )
        mat = np.stack([t.samples for t in taps])
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != (mat.shape[0],):
        raise ValueError(f"expected {mat.shape[0]} phases, got shape {phases.shape}")
    if phase_noise_frac > 0.0:
        rng = np.random.default_rng(rng_seed)
        phases = phases + draw_phase_noise(mat.shape[0], phases, phase_noise_frac,
                                           rng, phase_noise_mode)
    return weighted_sum_power(mat, phases)


def toy_model_output(u1: float, u2: float, u3: float, params: ToyModelParams) -> float:
    """Three-signal interference intensity.

    Evaluates |u1*w1 + u2*w2 + u3*w3|^2 with w1 = 1, w2 = a2*e^{i phi_c},
    w3 = a2*gamma*e^{i (phi_c + phi_r)}.
    """
    w2 = params.a2 * np.exp(1j * params.phi_c)
    w3 = params.a2 * params.gamma * np.exp(1j * (params.phi_c + params.phi_r))
    field = u1 + u2 * w2 + u3 * w3
    return float(abs(field) ** 2)


@dataclass(frozen=True)
class PhaseSweepTable:
    """Toy-model response over a (phi_r, phi_c, input-state) grid.

    ``outputs[i, j, m]`` is the intensity at ``phi_r_values[i]``,
    ``phi_c_grid[j]`` for input tuple ``inputs[m]``.
    """

    phi_c_grid: np.ndarray
    phi_r_values: np.ndarray
    inputs: tuple
    a2: float
    gamma: float
    outputs: np.ndarray

    def rows(self):
        """Flat (phi_r, phi_c, u1, u2, u3, output) records, deterministic order."""
        for i, pr in enumerate(self.phi_r_values):
            for j, pc in enumerate(self.phi_c_grid):
                for m, u in enumerate(self.inputs):
                    yield (float(pr), float(pc), u[0], u[1], u[2],
                           float(self.outputs[i, j, m]))


def phase_sweep(phi_c_grid, phi_r_values, inputs, a2: float, gamma: float) -> PhaseSweepTable:
    """Tabulate the toy-model output over a common-phase grid.

    Vectorized over the full cartesian product; the table is the plot data
    behind the phase-response figure and the basis for locating phases where
    a task's input classes separate.
    """
    phi_c_grid = np.atleast_1d(np.asarray(phi_c_grid, dtype=np.float64))
    phi_r_values = np.atleast_1d(np.asarray(phi_r_values, dtype=np.float64))
    if phi_c_grid.size == 0 or phi_r_values.size == 0:
        raise ValueError("phase grids must be non-empty")
    inputs = tuple(tuple(float(v) for v in u) for u in inputs)
    if not inputs:
        raise ValueError("need at least one input tuple")
    u = np.array(inputs)  # (M, 3)
    pr = phi_r_values[:, None, None]
    pc = phi_c_grid[None, :, None]
    w2 = a2 * np.exp(1j * pc)
    w3 = a2 * gamma * np.exp(1j * (pc + pr))
    field = u[None, None, :, 0] + u[None, None, :, 1] * w2 + u[None, None, :, 2] * w3
    return PhaseSweepTable(phi_c_grid, phi_r_values, inputs, a2, gamma,
                           np.abs(field) ** 2)


def separation_margin(table: PhaseSweepTable, high_inputs, low_inputs) -> np.ndarray:
    """Per-(phi_r, phi_c) margin between the class groups.

    Margin = min(outputs of ``high_inputs``) - max(outputs of ``low_inputs``
    and 0).  The implicit 0 is the all-zero input state, whose output is
    identically null.  Positive margin means a single threshold separates the
    classes at that phase point.
    """
    high = [table.inputs.index(tuple(float(v) for v in u)) for u in high_inputs]
    low = [table.inputs.index(tuple(float(v) for v in u)) for u in low_inputs]
    hi = table.outputs[:, :, high].min(axis=2)
    if low:
        lo = np.maximum(table.outputs[:, :, low].max(axis=2), 0.0)
    else:
        lo = np.zeros_like(hi)
    return hi - lo


def best_separation(table: PhaseSweepTable, high_inputs, low_inputs):
    """(best margin, phi_r, phi_c) maximizing the class separation."""
    margins = separation_margin(table, high_inputs, low_inputs)
    i, j = np.unravel_index(np.argmax(margins), margins.shape)
    return float(margins[i, j]), float(table.phi_r_values[i]), float(table.phi_c_grid[j])


def amplitudes_from_loss(loss_db_per_cm: float, spiral_length_cm: float,
                         n_taps: int) -> np.ndarray:
    """Tap field amplitudes implied by the delay-line propagation loss.

    Tap k (1-based) propagates through k-1 spirals, so its power is
    ``10^(-loss_db_per_cm * (k-1) * spiral_length_cm / 10)`` and the field
    amplitude is the square root.  The first tap is lossless (a_1 = 1).
    """
    if loss_db_per_cm < 0:
        raise ValueError(f"loss must be nonnegative, got {loss_db_per_cm}")
    if not spiral_length_cm > 0:
        raise ValueError(f"spiral length must be positive, got {spiral_length_cm}")
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    k = np.arange(n_taps)
    power = 10.0 ** (-loss_db_per_cm * k * spiral_length_cm / 10.0)
    return np.sqrt(power)


def config_from_loss(loss_db_per_cm: float,
                     n_taps: int = 4,
                     delta_t: float = 50e-12,
                     spiral_length_cm: float = DEFAULT_SPIRAL_LENGTH_CM,
                     phases=None,
                     phase_noise_frac: float = 0.0,
                     phase_noise_mode: str = "fraction-of-2pi") -> PerceptronConfig:
    """Build a device description with amplitudes derived from the loss figure."""
    amps = amplitudes_from_loss(loss_db_per_cm, spiral_length_cm, n_taps)
    if phases is None:
        phases = np.zeros(n_taps)
    return PerceptronConfig(n_taps, delta_t, amps, np.asarray(phases, dtype=np.float64),
                            phase_noise_frac, phase_noise_mode)
