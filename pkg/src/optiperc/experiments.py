"""Experiment harness: seeded end-to-end runs and the figure-data suites.

A run executes generate -> modulate -> delay/interfere -> record -> align ->
train -> test the way the bench procedure does: every training iteration
acquires fresh traces (new noise), the decision threshold and sampling
offset are re-optimized per acquisition, and all randomness flows from one
master seed through named sub-seeds, so reruns are byte-identical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, core, evaluation, signal, tasks, training

DEFAULT_SAMPLE_RATE = 80e9
DEFAULT_TRACE_SECONDS = 2e-6
DEFAULT_TEST_TRACES = 10
DEFAULT_ATTENUATION_GRID_DB = (0.0, 2.0, 4.0, 6.0)


def derive_seed(master_seed: int, *labels) -> int:
    """Stable sub-seed from the master seed and a component label path."""
    text = str(int(master_seed)) + ":" + ":".join(str(l) for l in labels)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


# ---------------------------------------------------------------------------
# acquisition chain


@dataclass(frozen=True)
class Acquisition:
    """One simulated scope capture: transmitted bits plus both recorded traces."""

    bits: np.ndarray
    rx1: np.ndarray
    rx2: np.ndarray
    b_sa: int


@dataclass(frozen=True)
class PreparedAcquisition:
    """Phase-independent half of an acquisition.

    The input realization (bits, optical field, recorded input-monitor
    trace) does not depend on the programmed phases, so one preparation can
    serve many candidate phase vectors on the identical noise realization.
    """

    bits: np.ndarray
    input_field: core.ComplexWaveform
    tap_delay: int
    rx1: np.ndarray
    b_sa: int
    seed: int
    jitter_seed: int


def record_scope(analog: np.ndarray, channel: signal.ChannelParams, snr_db: float,
                 jitter_seed: int, noise_seed: int,
                 rx_bandwidth_hz: float = 16e9) -> np.ndarray:
    """Scope front end: analog low-pass, acquisition jitter, electrical noise."""
    trace = np.asarray(analog, dtype=np.float64)
    if math.isfinite(rx_bandwidth_hz):
        trace = signal._lowpass(trace, rx_bandwidth_hz, channel.sample_rate)
    trace = signal.apply_jitter(trace, channel.jitter_std_s, channel.sample_rate,
                                jitter_seed)
    return signal.detect(trace, snr_db, noise_seed)


def prepare_acquisition(task: tasks.TaskSpec, channel: signal.ChannelParams,
                        device: core.PerceptronConfig, n_bits: int, seed: int,
                        rx_bandwidth_hz: float = 16e9) -> PreparedAcquisition:
    b_sa = channel.samples_per_bit(task.bit_rate)
    bits = signal.prbs8(n_bits, 1 + derive_seed(seed, "prbs") % 255)
    bit_seq = signal.BitSequence(bits, task.bit_rate)
    if task.uses_phase_encoding:
        fld = signal.modulate_bpsk(bit_seq, channel)
    else:
        fld = signal.modulate_nrz(bit_seq, channel)
    tap_delay = core.delay_samples(channel.sample_rate, device.delta_t)
    jitter_seed = derive_seed(seed, "jitter")
    rx1 = record_scope(np.abs(fld.samples) ** 2, channel, channel.snr_db,
                       jitter_seed, derive_seed(seed, "rx1-noise"), rx_bandwidth_hz)
    return PreparedAcquisition(bits, fld, tap_delay, rx1, b_sa, seed, jitter_seed)


def complete_acquisition(prep: PreparedAcquisition, channel: signal.ChannelParams,
                         device: core.PerceptronConfig, phases,
                         attenuation_db: float = 0.0, rx_bandwidth_hz: float = 16e9,
                         pipeline_shift: int = 0) -> Acquisition:
    """Run the prepared input through the device and record the output.

    Both recorded traces share the acquisition timing jitter (one scope);
    the variable attenuation lowers the output detector's SNR only, because
    the input monitor taps the signal before the attenuator.
    """
    phases = np.asarray(phases, dtype=np.float64)
    if device.phase_noise_frac > 0.0:
        rng = np.random.default_rng(derive_seed(prep.seed, "phase-noise"))
        phases = phases + core.draw_phase_noise(device.n_taps, phases,
                                                device.phase_noise_frac, rng,
                                                device.phase_noise_mode)
    y = core.delayed_weighted_power(prep.input_field.samples, device.amplitudes,
                                    phases, prep.tap_delay)
    if pipeline_shift:
        y = np.roll(y, -pipeline_shift)
    rx2 = record_scope(y, channel, channel.snr_db - attenuation_db,
                       prep.jitter_seed, derive_seed(prep.seed, "rx2-noise"),
                       rx_bandwidth_hz)
    return Acquisition(prep.bits, prep.rx1, rx2, prep.b_sa)


def acquire(task: tasks.TaskSpec, channel: signal.ChannelParams,
            device: core.PerceptronConfig, phases, n_bits: int, seed: int,
            attenuation_db: float = 0.0, rx_bandwidth_hz: float = 16e9,
            pipeline_shift: int = 0) -> Acquisition:
    """One end-to-end acquisition with fresh noise drawn from ``seed``."""
    prep = prepare_acquisition(task, channel, device, n_bits, seed, rx_bandwidth_hz)
    return complete_acquisition(prep, channel, device, phases, attenuation_db,
                                rx_bandwidth_hz, pipeline_shift)


def memory_transient_bits(device: core.PerceptronConfig, channel: signal.ChannelParams,
                          bit_rate: float) -> int:
    """Leading bits whose output still mixes with the zero-padded startup."""
    d = core.delay_samples(channel.sample_rate, device.delta_t)
    b_sa = channel.samples_per_bit(bit_rate)
    return math.ceil((device.n_taps - 1) * d / b_sa)


def acquisition_targets(task: tasks.TaskSpec, acq, transient_bits: int):
    """Targets and validity mask for one acquisition.

    Amplitude-keyed tasks derive the bit labels from the digitized input
    monitor trace, as the bench does; the phase task takes the encoded bits
    directly (intensity detection cannot recover them).  The perceptron's
    startup transient is masked in addition to the task's own history mask.
    """
    if task.uses_phase_encoding:
        ref_bits = acq.bits
    else:
        ref_bits = evaluation.digitize_reference(acq.rx1, acq.b_sa)
    targets, valid = task.targets(ref_bits)
    valid = valid.copy()
    valid[:transient_bits] = False
    return targets, valid


def measure_pipeline_delay(task: tasks.TaskSpec, channel: signal.ChannelParams,
                           device: core.PerceptronConfig, n_bits: int,
                           seed: int, rx_bandwidth_hz: float) -> int:
    """Bulk input-to-output delay from a calibration capture, in samples.

    Mirrors the bench's once-per-bit-rate cross-correlation: a clean capture
    (jitter and noise off, all phases zero so the output tracks the input)
    is aligned against the input monitor trace.  The raw correlation peak
    lands at the path delay plus the device's internal delay centroid; only
    whole-bit misalignment must be corrected (it would make targets index
    the wrong bits), while the sub-bit part is the device's own memory and
    belongs to the sampling-time axis.  The returned delay is therefore
    snapped to the nearest whole bit.
    """
    calm = dataclasses.replace(channel, snr_db=math.inf, jitter_std_s=0.0)
    device0 = device.with_phases(np.zeros(device.n_taps))
    device0 = dataclasses.replace(device0, phase_noise_frac=0.0)
    acq = acquire(task, calm, device0, device0.phases, n_bits, seed,
                  rx_bandwidth_hz=rx_bandwidth_hz)
    raw = signal.align_traces(acq.rx1, acq.rx2)
    length = acq.rx1.size
    signed = raw - length if raw > length // 2 else raw
    b_sa = channel.samples_per_bit(task.bit_rate)
    return int(round(signed / b_sa)) * b_sa


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass
class ExperimentConfig:
    """Fully resolved description of one seeded experiment."""

    name: str
    seed: int
    task: tasks.TaskSpec
    channel: signal.ChannelParams
    device: core.PerceptronConfig
    model: baselines.BaselineKind | None = None  # None = phase-trained device
    psw: training.PswConfig = field(default_factory=training.PswConfig)
    rx_bandwidth_hz: float = 16e9
    attenuation_db: float = 0.0
    train_bits: int = 0          # 0 = derive from trace_seconds
    test_bits: int = 0
    trace_seconds: float = DEFAULT_TRACE_SECONDS
    test_traces: int = DEFAULT_TEST_TRACES
    threshold_levels: int = evaluation.DEFAULT_THRESHOLD_LEVELS
    sampling_offset: int | None = None           # None = free sweep
    ridge_lambda_rel: float = baselines.DEFAULT_RIDGE_LAMBDA_REL
    output_dir: str | None = None

    def __post_init__(self):
        bits_per_trace = int(round(self.trace_seconds * self.task.bit_rate))
        if self.train_bits <= 0:
            self.train_bits = bits_per_trace
        if self.test_bits <= 0:
            self.test_bits = bits_per_trace
        if self.test_traces < 1:
            raise ValueError("test_traces must be >= 1")
        b_sa = self.channel.samples_per_bit(self.task.bit_rate)
        if self.sampling_offset is not None and not 0 <= self.sampling_offset < b_sa:
            raise ValueError(f"sampling_offset {self.sampling_offset} outside 0..{b_sa - 1}")

    @property
    def b_sa(self) -> int:
        return self.channel.samples_per_bit(self.task.bit_rate)


@dataclass
class TestSummary:
    """Aggregated test-set outcome (per-acquisition sweeps, pooled errors)."""

    per_trace: list
    error_count: int
    total_bits: int

    @property
    def ber(self) -> float:
        return self.error_count / self.total_bits

    @property
    def is_error_free(self) -> bool:
        return self.error_count == 0

    @property
    def ber_limit(self) -> float:
        return tasks.statistical_ber_limit(self.total_bits)

    @property
    def reportable_ber(self) -> float:
        """Measured BER, floored at the statistical limit when error-free."""
        return max(self.ber, self.ber_limit)


# ---------------------------------------------------------------------------
# phase-trained device: training and testing


def _trace_is_deterministic(cfg: ExperimentConfig) -> bool:
    return (math.isinf(cfg.channel.snr_db) and cfg.channel.jitter_std_s == 0.0
            and cfg.device.phase_noise_frac == 0.0)


def train_phases(cfg: ExperimentConfig, pipeline_shift: int = 0):
    """Swarm-train the N-1 free phases against fresh acquisitions.

    The reference tap's phase is pinned to zero (a global phase leaves the
    detector output unchanged).  Each loss evaluation acquires a fresh
    training trace; when the whole chain is deterministic the identical
    input realization is reused across evaluations, which is then exact.
    """
    transient = memory_transient_bits(cfg.device, cfg.channel, cfg.task.bit_rate)
    deterministic = _trace_is_deterministic(cfg)
    state = {"count": 0, "prep": None, "targets": None}

    def next_preparation() -> PreparedAcquisition:
        if deterministic:
            if state["prep"] is None:
                state["prep"] = prepare_acquisition(
                    cfg.task, cfg.channel, cfg.device, cfg.train_bits,
                    derive_seed(cfg.seed, "train-trace", 0), cfg.rx_bandwidth_hz)
            return state["prep"]
        state["count"] += 1
        return prepare_acquisition(
            cfg.task, cfg.channel, cfg.device, cfg.train_bits,
            derive_seed(cfg.seed, "train-trace", state["count"]), cfg.rx_bandwidth_hz)

    def loss(free_phases):
        prep = next_preparation()
        phases = np.concatenate([[0.0], free_phases])
        acq = complete_acquisition(prep, cfg.channel, cfg.device, phases,
                                   cfg.attenuation_db, cfg.rx_bandwidth_hz,
                                   pipeline_shift)
        if deterministic and state["targets"] is not None:
            targets, valid = state["targets"]
        else:
            targets, valid = acquisition_targets(cfg.task, acq, transient)
            if deterministic:
                state["targets"] = (targets, valid)
        result = evaluation.sweep_eval(acq.rx2, targets, valid, acq.b_sa,
                                       cfg.threshold_levels, cfg.sampling_offset)
        return result.error_count

    best, best_loss, history = training.psw_minimize(loss, cfg.device.n_taps - 1, cfg.psw)
    return np.concatenate([[0.0], best]), best_loss, history


def test_phases(cfg: ExperimentConfig, phases, pipeline_shift: int = 0) -> TestSummary:
    """Evaluate trained phases on fresh test acquisitions.

    The threshold (and, for free runs, the sampling offset) is re-optimized
    on every acquisition, as the bench does, so slow drifts between
    acquisitions do not accumulate.
    """
    transient = memory_transient_bits(cfg.device, cfg.channel, cfg.task.bit_rate)
    per_trace = []
    errors = 0
    bits = 0
    for t in range(cfg.test_traces):
        acq = acquire(cfg.task, cfg.channel, cfg.device, phases, cfg.test_bits,
                      derive_seed(cfg.seed, "test-trace", t),
                      cfg.attenuation_db, cfg.rx_bandwidth_hz, pipeline_shift)
        targets, valid = acquisition_targets(cfg.task, acq, transient)
        result = evaluation.sweep_eval(acq.rx2, targets, valid, acq.b_sa,
                                       cfg.threshold_levels, cfg.sampling_offset)
        per_trace.append(result)
        errors += result.error_count
        bits += result.total_bits
    return TestSummary(per_trace, errors, bits)


@dataclass
class RunResult:
    """Everything a completed phase-training run produced."""

    config: ExperimentConfig
    phases: np.ndarray
    train_loss: float
    history: list
    test: TestSummary
    pipeline_delay: int


def run_perceptron(cfg: ExperimentConfig) -> RunResult:
    """Calibrate alignment, train the phases, evaluate on the test set."""
    delay = measure_pipeline_delay(cfg.task, cfg.channel, cfg.device,
                                   min(cfg.train_bits, 2048),
                                   derive_seed(cfg.seed, "align"),
                                   cfg.rx_bandwidth_hz)
    phases, train_loss, history = train_phases(cfg, pipeline_shift=delay)
    test = test_phases(cfg, phases, pipeline_shift=delay)
    return RunResult(cfg, phases, train_loss, history, test, delay)


# ---------------------------------------------------------------------------
# baselines through the same pipeline


def _tap_power_traces(cfg: ExperimentConfig, acq_seed: int, n_bits: int) -> Acquisition:
    """Recorded per-tap power traces (each tap detected separately).

    rx2 holds the (n_taps, samples) stack of individually detected tap
    powers instead of the coherent sum.
    """
    bits = signal.prbs8(n_bits, 1 + derive_seed(acq_seed, "prbs") % 255)
    bit_seq = signal.BitSequence(bits, cfg.task.bit_rate)
    fld = (signal.modulate_bpsk if cfg.task.uses_phase_encoding
           else signal.modulate_nrz)(bit_seq, cfg.channel)
    taps = core.tap_matrix(fld, cfg.device)[:, :len(fld)]
    powers = taps.real ** 2 + taps.imag ** 2
    jitter_seed = derive_seed(acq_seed, "jitter")
    rx1 = record_scope(np.abs(fld.samples) ** 2, cfg.channel, cfg.channel.snr_db,
                       jitter_seed, derive_seed(acq_seed, "rx1-noise"),
                       cfg.rx_bandwidth_hz)
    recorded = np.stack([
        record_scope(powers[k], cfg.channel,
                     cfg.channel.snr_db - cfg.attenuation_db, jitter_seed,
                     derive_seed(acq_seed, "tap-noise", k), cfg.rx_bandwidth_hz)
        for k in range(cfg.device.n_taps)
    ])
    return Acquisition(bits, rx1, recorded, cfg.b_sa)


def run_real_perceptron(cfg: ExperimentConfig):
    """Ridge-train and test the incoherent model at every sampling offset.

    Returns a list of (offset, coefficients, TestSummary); each offset gets
    its own readout because the sampled tap powers differ per offset.
    """
    transient = memory_transient_bits(cfg.device, cfg.channel, cfg.task.bit_rate)
    train = _tap_power_traces(cfg, derive_seed(cfg.seed, "real-train"), cfg.train_bits)
    targets, valid = acquisition_targets(cfg.task, train, transient)
    test_acqs = [
        _tap_power_traces(cfg, derive_seed(cfg.seed, "real-test", t), cfg.test_bits)
        for t in range(cfg.test_traces)
    ]
    test_targets = [acquisition_targets(cfg.task, acq, transient) for acq in test_acqs]
    results = []
    for offset in range(cfg.b_sa):
        feats = baselines.tap_power_features(train.rx2, cfg.b_sa, offset)
        coef = baselines.fit_linear_readout(feats, targets, valid, cfg.ridge_lambda_rel)
        per_trace = []
        errors = bits = 0
        for acq, (t_targets, t_valid) in zip(test_acqs, test_targets):
            t_feats = baselines.tap_power_features(acq.rx2, cfg.b_sa, offset)
            res = baselines.evaluate_readout(t_feats, coef, t_targets, t_valid,
                                             cfg.threshold_levels)
            per_trace.append(res)
            errors += res.error_count
            bits += res.total_bits
        results.append((offset, coef, TestSummary(per_trace, errors, bits)))
    return results


@dataclass
class ReservoirRepeat:
    phases: np.ndarray
    readout: np.ndarray
    test: TestSummary


def run_reservoir(cfg: ExperimentConfig, repeats: int = 10):
    """Random-phase reservoir with a trained linear readout, repeated.

    Each repeat freezes random heater phases, uses the per-bit output
    samples as virtual nodes (their count equals the samples per bit),
    ridge-fits the readout on a training acquisition and evaluates on its
    test set.  Returns the repeats plus (mean BER, best BER).
    """
    virtual_nodes = cfg.b_sa
    transient = memory_transient_bits(cfg.device, cfg.channel, cfg.task.bit_rate)
    out = []
    for r in range(repeats):
        rng = np.random.default_rng(derive_seed(cfg.seed, "reservoir-phase", r))
        phases = baselines.draw_reservoir_phases(cfg.device.n_taps, rng)
        train = acquire(cfg.task, cfg.channel, cfg.device, phases, cfg.train_bits,
                        derive_seed(cfg.seed, "reservoir-train", r),
                        cfg.attenuation_db, cfg.rx_bandwidth_hz)
        targets, valid = acquisition_targets(cfg.task, train, transient)
        feats = baselines.virtual_node_features(train.rx2, virtual_nodes)
        coef = baselines.fit_linear_readout(feats, targets, valid, cfg.ridge_lambda_rel)
        per_trace = []
        errors = bits = 0
        for t in range(cfg.test_traces):
            acq = acquire(cfg.task, cfg.channel, cfg.device, phases, cfg.test_bits,
                          derive_seed(cfg.seed, "reservoir-test", r, t),
                          cfg.attenuation_db, cfg.rx_bandwidth_hz)
            t_targets, t_valid = acquisition_targets(cfg.task, acq, transient)
            t_feats = baselines.virtual_node_features(acq.rx2, virtual_nodes)
            res = baselines.evaluate_readout(t_feats, coef, t_targets, t_valid,
                                             cfg.threshold_levels)
            per_trace.append(res)
            errors += res.error_count
            bits += res.total_bits
        out.append(ReservoirRepeat(phases, coef, TestSummary(per_trace, errors, bits)))
    bers = [rep.test.ber for rep in out]
    return out, float(np.mean(bers)), float(min(bers))
