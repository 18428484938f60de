"""Input field generation and bench abstractions.

PRBS bit source, NRZ amplitude / binary phase modulation with finite analog
bandwidth, detection noise, acquisition timing jitter, and trace alignment.
Everything is seed-parameterized and bit-exact reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .core import ComplexWaveform

#: Maximal-length 8-bit LFSR feedback taps for x^8 + x^6 + x^5 + x^4 + 1.
PRBS8_TAPS = (8, 6, 5, 4)
PRBS8_PERIOD = 255


@dataclass(frozen=True)
class BitSequence:
    """Binary data stream with its line rate."""

    bits: np.ndarray
    bit_rate: float

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("bit sequence must be non-empty")
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        if not self.bit_rate > 0:
            raise ValueError(f"bit_rate must be positive, got {self.bit_rate}")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return self.bits.size


@dataclass(frozen=True)
class ChannelParams:
    """Knobs of the abstracted transmit/receive chain.

    ``analog_bandwidth_hz`` is the 3 dB cutoff of the end-to-end Gaussian
    low-pass; ``extinction_ratio_db`` the high/low transmit power ratio;
    ``snr_db`` the detector signal-to-noise ratio (``inf`` = noise off);
    ``jitter_std_s`` the per-acquisition timing wander.
    """

    sample_rate: float
    analog_bandwidth_hz: float = 16e9
    extinction_ratio_db: float = 7.0
    snr_db: float = 14.0
    jitter_std_s: float = 2e-12
    rng_seed: int = 0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not self.analog_bandwidth_hz > 0:
            raise ValueError(f"analog bandwidth must be positive, got {self.analog_bandwidth_hz}")
        if self.extinction_ratio_db < 0:
            raise ValueError("extinction ratio must be nonnegative")
        if self.jitter_std_s < 0:
            raise ValueError("jitter must be nonnegative")

    def samples_per_bit(self, bit_rate: float) -> int:
        if self.sample_rate < 2 * bit_rate:
            raise ValueError(
                f"sample_rate {self.sample_rate} < 2 x bit_rate {bit_rate}"
            )
        ratio = self.sample_rate / bit_rate
        b_sa = round(ratio)
        if abs(ratio - b_sa) > 1e-9 * b_sa or b_sa < 1:
            raise ValueError(
                f"samples per bit must be an integer: sample_rate {self.sample_rate} "
                f"/ bit_rate {bit_rate} = {ratio}"
            )
        return int(b_sa)


def prbs8(length_bits: int, seed: int) -> np.ndarray:
    """Maximal-length pseudo-random binary sequence from an 8-bit LFSR.

    Fibonacci LFSR with feedback polynomial x^8 + x^6 + x^5 + x^4 + 1;
    period 255, repeated cyclically to reach ``length_bits``.  ``seed`` is
    the initial register state and must be in 1..255 (0 is the degenerate
    all-zero state that never leaves itself).
    """
    if length_bits < 1:
        raise ValueError("length_bits must be >= 1")
    if not 1 <= seed <= 255:
        raise ValueError(f"seed must be in 1..255, got {seed} (0 is degenerate)")
    state = seed
    period = np.empty(PRBS8_PERIOD, dtype=np.uint8)
    for i in range(PRBS8_PERIOD):
        fb = 0
        for tap in PRBS8_TAPS:
            fb ^= (state >> (tap - 1)) & 1
        period[i] = state & 1
        state = ((state << 1) | fb) & 0xFF
    reps = -(-length_bits // PRBS8_PERIOD)
    return np.tile(period, reps)[:length_bits]


def _gaussian_sigma_samples(bandwidth_hz: float, sample_rate: float) -> float:
    # |H(f)|^2 = 1/2 at the cutoff for a Gaussian impulse response:
    # sigma_t = sqrt(ln 2) / (2 pi f_c)
    sigma_t = math.sqrt(math.log(2.0)) / (2.0 * math.pi * bandwidth_hz)
    return sigma_t * sample_rate


def _lowpass(values: np.ndarray, bandwidth_hz: float, sample_rate: float) -> np.ndarray:
    if not math.isfinite(bandwidth_hz):
        return values
    sigma = _gaussian_sigma_samples(bandwidth_hz, sample_rate)
    if sigma < 1e-6:
        return values
    # wrap mode keeps the trace consistent with the cyclic PRBS payload
    return gaussian_filter1d(values, sigma, mode="wrap")


def modulate_nrz(bits: BitSequence, params: ChannelParams) -> ComplexWaveform:
    """Amplitude-modulated NRZ optical field.

    Ideal rectangular power levels P_high = 1 and
    P_low = 10^(-extinction_ratio_db/10) are low-passed by the Gaussian
    analog response (applied to the power profile), then the field is
    sqrt(power) at phase 0.  The finite bandwidth produces the
    adjacent-bit-dependent levels seen mid-bit (intersymbol interference).
    """
    b_sa = params.samples_per_bit(bits.bit_rate)
    p_low = 10.0 ** (-params.extinction_ratio_db / 10.0)
    power = np.where(bits.bits == 1, 1.0, p_low).astype(np.float64)
    power = np.repeat(power, b_sa)
    power = _lowpass(power, params.analog_bandwidth_hz, params.sample_rate)
    field = np.sqrt(np.maximum(power, 0.0)).astype(np.complex128)
    return ComplexWaveform(field, params.sample_rate)


def modulate_bpsk(bits: BitSequence, params: ChannelParams) -> ComplexWaveform:
    """Binary phase-shift keyed field: bit 0 -> phase 0, bit 1 -> phase pi.

    The +/-1 field itself is low-passed, so transitions pass through zero
    amplitude (the dips of a null-biased modulator) while the plateaus keep
    unit magnitude: away from transitions the detected intensity is flat.
    """
    b_sa = params.samples_per_bit(bits.bit_rate)
    field = np.where(bits.bits == 1, -1.0, 1.0).astype(np.float64)
    field = np.repeat(field, b_sa)
    field = _lowpass(field, params.analog_bandwidth_hz, params.sample_rate)
    return ComplexWaveform(field.astype(np.complex128), params.sample_rate)


def detect(power_trace: np.ndarray, snr_db: float, rng_seed: int | None = None) -> np.ndarray:
    """Photodetection: white Gaussian electrical noise on a power waveform.

    The noise variance is set so that signal power / noise variance equals
    10^(snr_db/10), taking the signal power as the trace's fluctuation
    (AC) power; a featureless constant trace falls back to its mean-square
    value so that the requested SNR stays meaningful.  ``snr_db = inf`` is
    the noise-off sentinel.  Electrical noise may drive samples below zero;
    no clipping is applied.
    """
    trace = np.asarray(power_trace, dtype=np.float64)
    if math.isinf(snr_db):
        return trace.copy()
    signal_power = float(np.var(trace))
    if signal_power == 0.0:
        signal_power = float(np.mean(trace ** 2))
    noise_var = signal_power / 10.0 ** (snr_db / 10.0)
    if noise_var == 0.0:
        return trace.copy()
    rng = np.random.default_rng(rng_seed)
    return trace + rng.normal(0.0, math.sqrt(noise_var), trace.size)


def jitter_shift_samples(jitter_std_s: float, sample_rate: float,
                         rng_seed: int | None = None) -> int:
    """One per-acquisition timing offset, rounded to whole samples."""
    if jitter_std_s == 0.0:
        return 0
    rng = np.random.default_rng(rng_seed)
    return int(round(rng.normal(0.0, jitter_std_s * sample_rate)))


def apply_jitter(trace: np.ndarray, jitter_std_s: float, sample_rate: float,
                 rng_seed: int | None = None) -> np.ndarray:
    """Shift the whole trace by a random timing offset (one draw per trace).

    The offset is Normal(0, jitter_std^2), rounded to integer samples; the
    shift is circular, consistent with the cyclic trace payload.
    """
    trace = np.asarray(trace)
    shift = jitter_shift_samples(jitter_std_s, sample_rate, rng_seed)
    if shift == 0:
        return trace.copy()
    return np.roll(trace, shift)


def align_traces(reference: np.ndarray, measured: np.ndarray) -> int:
    """Delay (in samples) of ``measured`` relative to ``reference``.

    Returns the argmax of the circular cross-correlation of the mean-removed
    traces, in 0..L-1; ties break to the smallest delay.  Rolling
    ``reference`` right by the returned delay maximizes the overlap.
    """
    ref = np.asarray(reference, dtype=np.float64)
    meas = np.asarray(measured, dtype=np.float64)
    if ref.size == 0 or meas.size == 0:
        raise ValueError("cannot align empty traces")
    if ref.size != meas.size:
        raise ValueError(f"trace lengths differ: {ref.size} vs {meas.size}")
    ref = ref - ref.mean()
    meas = meas - meas.mean()
    if not np.any(ref) or not np.any(meas):
        raise ValueError("correlation undefined for a constant (or all-zero) trace")
    corr = np.fft.ifft(np.conj(np.fft.fft(ref)) * np.fft.fft(meas)).real
    return int(np.argmax(corr))  # np.argmax returns the first (smallest) maximizer
