"""Experiment configuration files: parsing, validation, manifest emission.

Configs are TOML with explicit units in the key names (bit_rate_gbps,
delta_t_ps, ...).  The manifest written next to a run's outputs is the fully
resolved configuration in the same format; rerunning from it reproduces
every output byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np

from . import baselines, core, evaluation, experiments, signal, tasks, training


class ConfigError(ValueError):
    """Invalid or missing configuration data; ``field`` names the culprit."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")


def _section(data: dict, name: str, required: bool = True) -> dict:
    sec = data.get(name)
    if sec is None:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a table")
    return sec


def _get(sec: dict, section: str, key: str, kind, default=None, required: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required value")
        return default
    value = sec[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
        if math.isnan(value):
            raise ConfigError(f"{section}.{key}", "must not be NaN")
        return value
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    raise ConfigError(f"{section}.{key}", f"expected {kind.__name__}, got {value!r}")


def parse_config(data: dict, base_dir: Path | None = None) -> experiments.ExperimentConfig:
    """Build a resolved ExperimentConfig from parsed TOML data."""
    name = _get(data, "", "name", str, required=True)
    seed = _get(data, "", "seed", int, default=0)

    task_sec = _section(data, "task")
    kind = _get(task_sec, "task", "kind", str, required=True)
    bit_rate = _get(task_sec, "task", "bit_rate_gbps", float, required=True) * 1e9
    try:
        if kind == tasks.PATTERN_KIND:
            task = tasks.TaskSpec(kind, bit_rate,
                                  pattern=_get(task_sec, "task", "pattern", str,
                                               required=True))
        elif kind == tasks.XOR_KIND:
            task = tasks.TaskSpec(kind, bit_rate,
                                  delay_bits=_get(task_sec, "task", "delay_bits", int,
                                                  required=True))
        elif kind == tasks.PHASE_DECODE_KIND:
            task = tasks.TaskSpec(kind, bit_rate)
        else:
            raise ConfigError("task.kind",
                              f"unknown kind {kind!r} (pattern | xor | phase-decode)")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("task", str(exc)) from exc

    ch = _section(data, "channel", required=False)
    try:
        channel = signal.ChannelParams(
            sample_rate=_get(ch, "channel", "sample_rate_gsa", float, 80.0) * 1e9,
            analog_bandwidth_hz=_get(ch, "channel", "analog_bandwidth_ghz", float, 16.0) * 1e9,
            extinction_ratio_db=_get(ch, "channel", "extinction_ratio_db", float, 7.0),
            snr_db=_get(ch, "channel", "snr_db", float, 14.0),
            jitter_std_s=_get(ch, "channel", "jitter_ps", float, 2.0) * 1e-12,
            rng_seed=seed,
        )
        channel.samples_per_bit(task.bit_rate)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("channel", str(exc)) from exc
    rx_bandwidth_ghz = _get(ch, "channel", "rx_bandwidth_ghz", float, 16.0)
    attenuation_db = _get(ch, "channel", "attenuation_db", float, 0.0)

    dev = _section(data, "device", required=False)
    try:
        device = core.config_from_loss(
            loss_db_per_cm=_get(dev, "device", "loss_db_per_cm", float, 6.0),
            n_taps=_get(dev, "device", "n_taps", int, 4),
            delta_t=_get(dev, "device", "delta_t_ps", float, 50.0) * 1e-12,
            spiral_length_cm=_get(dev, "device", "spiral_length_cm", float,
                                  core.DEFAULT_SPIRAL_LENGTH_CM),
            phase_noise_frac=_get(dev, "device", "phase_noise_frac", float, 0.0),
            phase_noise_mode=_get(dev, "device", "phase_noise_mode", str,
                                  "fraction-of-2pi"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("device", str(exc)) from exc

    model_sec = _section(data, "model", required=False)
    model_kind = _get(model_sec, "model", "kind", str, "complex")
    if model_kind == "complex":
        model = None
    elif model_kind in ("real-perceptron", "reservoir"):
        try:
            model = baselines.BaselineKind(
                model_kind,
                repeats=_get(model_sec, "model", "reservoir_repeats", int, 10))
        except ValueError as exc:
            raise ConfigError("model", str(exc)) from exc
    else:
        raise ConfigError("model.kind",
                          f"unknown kind {model_kind!r} (complex | real-perceptron | reservoir)")

    tr = _section(data, "training", required=False)
    try:
        psw = training.PswConfig(
            particles=_get(tr, "training", "particles", int, 20),
            max_iters=_get(tr, "training", "max_iters", int, 300),
            inertia=_get(tr, "training", "inertia", float, 0.729),
            cognitive=_get(tr, "training", "cognitive", float, 1.49445),
            social=_get(tr, "training", "social", float, 1.49445),
            velocity_clamp=_get(tr, "training", "velocity_clamp_rad", float, math.pi),
            stop_on_error_free=_get(tr, "training", "stop_on_error_free", bool, True),
            rng_seed=experiments.derive_seed(seed, "psw"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("training", str(exc)) from exc
    sampling_offset = _get(tr, "training", "sampling_offset", int, None)

    ev = _section(data, "evaluation", required=False)
    out = _section(data, "output", required=False)
    output_dir = _get(out, "output", "directory", str, None)
    if output_dir is not None and base_dir is not None and not Path(output_dir).is_absolute():
        output_dir = str(base_dir / output_dir)

    try:
        return experiments.ExperimentConfig(
            name=name,
            seed=seed,
            task=task,
            channel=channel,
            device=device,
            model=model,
            psw=psw,
            rx_bandwidth_hz=rx_bandwidth_ghz * 1e9,
            attenuation_db=attenuation_db,
            train_bits=_get(tr, "training", "train_bits", int, 0),
            test_bits=_get(ev, "evaluation", "test_bits", int, 0),
            trace_seconds=_get(tr, "training", "trace_microseconds", float, 2.0) * 1e-6,
            test_traces=_get(ev, "evaluation", "test_traces", int,
                             experiments.DEFAULT_TEST_TRACES),
            threshold_levels=_get(ev, "evaluation", "threshold_levels", int,
                                  evaluation.DEFAULT_THRESHOLD_LEVELS),
            sampling_offset=sampling_offset,
            output_dir=output_dir,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("(resolved)", str(exc)) from exc


def load_config(path) -> experiments.ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("(file)", f"no such config file: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("(syntax)", str(exc))
    return parse_config(data, base_dir=path.parent)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def resolved_config_dict(cfg: experiments.ExperimentConfig) -> dict:
    """Nested plain dict of the fully resolved configuration."""
    task_tbl = {"kind": cfg.task.kind, "bit_rate_gbps": cfg.task.bit_rate / 1e9}
    if cfg.task.pattern is not None:
        task_tbl["pattern"] = cfg.task.pattern
    if cfg.task.delay_bits is not None:
        task_tbl["delay_bits"] = cfg.task.delay_bits
    model_tbl = {"kind": cfg.model.name if cfg.model else "complex"}
    if cfg.model and cfg.model.name == "reservoir":
        model_tbl["reservoir_repeats"] = cfg.model.repeats
    training_tbl = {
        "particles": cfg.psw.particles,
        "max_iters": cfg.psw.max_iters,
        "inertia": cfg.psw.inertia,
        "cognitive": cfg.psw.cognitive,
        "social": cfg.psw.social,
        "velocity_clamp_rad": cfg.psw.velocity_clamp,
        "stop_on_error_free": cfg.psw.stop_on_error_free,
        "train_bits": cfg.train_bits,
        "trace_microseconds": cfg.trace_seconds * 1e6,
    }
    if cfg.sampling_offset is not None:
        training_tbl["sampling_offset"] = cfg.sampling_offset
    return {
        "name": cfg.name,
        "seed": cfg.seed,
        "task": task_tbl,
        "channel": {
            "sample_rate_gsa": cfg.channel.sample_rate / 1e9,
            "analog_bandwidth_ghz": cfg.channel.analog_bandwidth_hz / 1e9,
            "rx_bandwidth_ghz": cfg.rx_bandwidth_hz / 1e9,
            "extinction_ratio_db": cfg.channel.extinction_ratio_db,
            "snr_db": cfg.channel.snr_db,
            "jitter_ps": cfg.channel.jitter_std_s * 1e12,
            "attenuation_db": cfg.attenuation_db,
            "samples_per_bit": cfg.b_sa,
        },
        "device": {
            "n_taps": cfg.device.n_taps,
            "delta_t_ps": cfg.device.delta_t * 1e12,
            "amplitudes": [float(a) for a in cfg.device.amplitudes],
            "phase_noise_frac": cfg.device.phase_noise_frac,
            "phase_noise_mode": cfg.device.phase_noise_mode,
        },
        "model": model_tbl,
        "training": training_tbl,
        "evaluation": {
            "test_traces": cfg.test_traces,
            "test_bits": cfg.test_bits,
            "threshold_levels": cfg.threshold_levels,
        },
    }


def manifest_text(cfg: experiments.ExperimentConfig) -> str:
    """Resolved configuration rendered as deterministic TOML."""
    data = resolved_config_dict(cfg)
    lines = []
    for key, value in data.items():
        if not isinstance(value, dict):
            lines.append(f"{key} = {_toml_value(value)}")
    for key, value in data.items():
        if isinstance(value, dict):
            lines.append("")
            lines.append(f"[{key}]")
            for k, v in value.items():
                lines.append(f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"
