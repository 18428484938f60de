"""Run and suite orchestration: persisted CSVs, manifests, and figures.

Output conventions: '.' decimal separator, one header row, deterministic
row order, no timestamps — rerunning with the same manifest reproduces the
CSV bytes exactly.  Figures are rendered next to each CSV.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import numpy as np

from . import (baselines, configio, core, evaluation, experiments, plots,
               signal, tasks, training)
from .experiments import ExperimentConfig, derive_seed

SUITE_NAMES = ("fig2-sweep", "pattern-vs-bitrate", "xor-vs-bitrate",
               "xor-sampling-map", "model-comparison", "phase-decode")

#: Relative phases (radians) for the toy-model response suite.
SWEEP_PHI_R_DEFAULT = tuple(math.radians(d) for d in (0.0, 60.0, 120.0))

_SUITE_RATES_GBPS = (5.0, 8.0, 10.0, 16.0)
_SUITE_PATTERNS = ("01", "10", "11", "001", "010", "011", "100", "101", "110", "111")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _rows_as_dicts(header, rows):
    return [dict(zip(header, row)) for row in rows]


# ---------------------------------------------------------------------------
# single experiment


def _result_rows(cfg: ExperimentConfig, summary: experiments.TestSummary, extra=()):
    rows = []
    for i, res in enumerate(summary.per_trace):
        rows.append(list(extra) + [
            i, res.error_count, res.total_bits, res.ber,
            res.best_sampling_index,
            res.best_sampling_index / cfg.channel.sample_rate * 1e12,
            res.best_threshold, res.is_error_free,
        ])
    return rows


_RESULT_HEADER = ["trace_index", "errors", "bits", "ber", "best_sampling_index",
                  "best_sampling_time_ps", "best_threshold", "error_free"]


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Path:
    """Execute one configured experiment and persist its result bundle.

    Writes manifest.toml, convergence.csv (phase-trained runs), result.csv,
    summary.csv, level_histograms.csv, test_traces.csv (per-bit sampled
    levels of the test set) and the companion figures.  Reruns with the same
    resolved config are byte-identical.
    """
    out = Path(out_dir if out_dir is not None else (cfg.output_dir or f"runs/{cfg.name}"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.toml").write_text(configio.manifest_text(cfg))

    if cfg.model is None:
        run = experiments.run_perceptron(cfg)
        write_csv(out / "convergence.csv", ["iteration", "best_loss"], run.history)
        plots.render_convergence(run.history, out / "convergence.png")
        write_csv(out / "result.csv", _RESULT_HEADER, _result_rows(cfg, run.test))
        _write_summary(out, cfg, run.test,
                       extra={"trained_phases_rad": " ".join(repr(float(p))
                                                             for p in run.phases),
                              "pipeline_delay_samples": run.pipeline_delay,
                              "final_train_loss": run.train_loss})
        _write_trace_details(out, cfg, run.phases, run.test, run.pipeline_delay)
        return out

    if cfg.model.name == "real-perceptron":
        per_offset = experiments.run_real_perceptron(cfg)
        rows = []
        for offset, coef, summary in per_offset:
            rows.append([offset, offset / cfg.channel.sample_rate * 1e12,
                         summary.error_count, summary.total_bits, summary.ber,
                         summary.is_error_free,
                         " ".join(repr(float(c)) for c in coef)])
        write_csv(out / "result.csv",
                  ["sampling_index", "sampling_time_ps", "errors", "bits", "ber",
                   "error_free", "readout_coefficients"], rows)
        best = min(per_offset, key=lambda item: item[2].ber)
        _write_summary(out, cfg, best[2], extra={"best_sampling_index": best[0]})
        return out

    repeats, mean_ber, best_ber = experiments.run_reservoir(cfg, cfg.model.repeats)
    rows = []
    for r, rep in enumerate(repeats):
        rows.append([r, rep.test.error_count, rep.test.total_bits, rep.test.ber,
                     rep.test.is_error_free,
                     " ".join(repr(float(p)) for p in rep.phases)])
    write_csv(out / "result.csv",
              ["repeat", "errors", "bits", "ber", "error_free", "phases_rad"], rows)
    write_csv(out / "summary.csv", ["name", "mean_ber", "best_ber", "ber_limit"],
              [[cfg.name, mean_ber, best_ber, repeats[0].test.ber_limit]])
    return out


def _write_summary(out, cfg, summary: experiments.TestSummary, extra=None):
    fields = {
        "name": cfg.name,
        "errors": summary.error_count,
        "bits": summary.total_bits,
        "ber": summary.ber,
        "ber_limit": summary.ber_limit,
        "error_free": summary.is_error_free,
    }
    fields.update(extra or {})
    write_csv(out / "summary.csv", list(fields.keys()), [list(fields.values())])


def _write_trace_details(out, cfg: ExperimentConfig, phases,
                         summary: experiments.TestSummary, pipeline_shift):
    """Raw sampled test traces plus output-level histograms of trace 0."""
    transient = experiments.memory_transient_bits(cfg.device, cfg.channel,
                                                  cfg.task.bit_rate)
    rows = []
    hist_rows = []
    first_threshold = None
    for t, res in enumerate(summary.per_trace):
        acq = experiments.acquire(cfg.task, cfg.channel, cfg.device, phases,
                                  cfg.test_bits, derive_seed(cfg.seed, "test-trace", t),
                                  cfg.attenuation_db, cfg.rx_bandwidth_hz,
                                  pipeline_shift)
        targets, valid = experiments.acquisition_targets(cfg.task, acq, transient)
        sampled = evaluation.sampled_bits_matrix(acq.rx2, acq.b_sa)[:, res.best_sampling_index]
        decided = (sampled > res.best_threshold).astype(int)
        for l in range(len(acq.bits)):
            rows.append([t, l, acq.bits[l], targets[l], int(valid[l]),
                         sampled[l], decided[l]])
        if t == 0:
            hists = evaluation.level_histograms(acq.rx2, acq.bits, acq.b_sa,
                                                res.best_sampling_index)
            first_threshold = res.best_threshold
            for symbol in sorted(hists):
                for level in hists[symbol]:
                    hist_rows.append([symbol, level])
            plots.render_level_histograms(hists, first_threshold,
                                          out / "level_histograms.png")
    write_csv(out / "test_traces.csv",
              ["trace_index", "bit_index", "input_bit", "target", "valid",
               "sampled_level", "decided_bit"], rows)
    write_csv(out / "level_histograms.csv", ["symbol", "sampled_level"], hist_rows)


# ---------------------------------------------------------------------------
# suite definitions


def _base_channel(bit_rate: float, seed: int, snr_db: float = 14.0,
                  jitter_ps: float = 2.0) -> signal.ChannelParams:
    return signal.ChannelParams(experiments.DEFAULT_SAMPLE_RATE, 16e9, 7.0,
                                snr_db, jitter_ps * 1e-12, seed)


def _suite_config(name, seed, task, *, sampling_offset=None, max_iters=80,
                  loss_db_per_cm=6.0, attenuation_db=0.0, train_bits=0,
                  test_bits=0, test_traces=experiments.DEFAULT_TEST_TRACES,
                  snr_db=14.0, phase_noise_frac=0.01) -> ExperimentConfig:
    device = core.config_from_loss(loss_db_per_cm, phase_noise_frac=phase_noise_frac)
    return ExperimentConfig(
        name=name, seed=seed, task=task,
        channel=_base_channel(task.bit_rate, seed, snr_db=snr_db),
        device=device,
        psw=training.PswConfig(max_iters=max_iters,
                               rng_seed=derive_seed(seed, "psw", name)),
        attenuation_db=attenuation_db,
        sampling_offset=sampling_offset,
        train_bits=train_bits, test_bits=test_bits, test_traces=test_traces,
    )


def suite_fig2_sweep(out_dir, seed=0, phi_r_values=SWEEP_PHI_R_DEFAULT):
    """Toy-model phase response: the data behind the three-panel figure."""
    a2 = math.sqrt(0.58)
    gamma = math.sqrt(0.34 / 0.58)
    grid = np.radians(np.arange(0.0, 360.0, 1.0))
    inputs = ((1.0, 1.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 1.0))
    table = core.phase_sweep(grid, phi_r_values, inputs, a2, gamma)
    header = ["phi_r_deg", "phi_c_deg", "u1", "u2", "u3", "output"]
    rows = [[math.degrees(pr), math.degrees(pc), u1, u2, u3, y]
            for pr, pc, u1, u2, u3, y in table.rows()]
    write_csv(Path(out_dir) / "fig2_sweep.csv", header, rows)
    plots.render_phase_response(table, Path(out_dir) / "fig2_sweep.png")
    return rows


def _train_and_test(cfg: ExperimentConfig):
    return experiments.run_perceptron(cfg)


def suite_pattern_vs_bitrate(out_dir, seed=0, rates_gbps=_SUITE_RATES_GBPS,
                             patterns=_SUITE_PATTERNS, quick_scale=1.0):
    """Pattern-recognition BER across bit rates (the bar-chart figure data)."""
    rows = []
    for rate in rates_gbps:
        for pattern in patterns:
            task = tasks.TaskSpec(tasks.PATTERN_KIND, rate * 1e9, pattern=pattern)
            cfg = _suite_config(f"pattern-{pattern}-{rate:g}g",
                                derive_seed(seed, "pattern", pattern, rate),
                                task,
                                train_bits=int(2e-6 * rate * 1e9 * quick_scale) or 0,
                                test_bits=int(2e-6 * rate * 1e9 * quick_scale) or 0)
            run = _train_and_test(cfg)
            rows.append([rate, pattern, run.test.ber, run.test.ber_limit,
                         run.test.is_error_free, run.test.error_count,
                         run.test.total_bits])
    header = ["bit_rate_gbps", "pattern", "ber", "ber_limit", "error_free",
              "errors", "bits"]
    write_csv(Path(out_dir) / "pattern_vs_bitrate.csv", header, rows)
    plots.render_pattern_bars(_rows_as_dicts(header, rows),
                              Path(out_dir) / "pattern_vs_bitrate.png")
    return rows


def suite_xor_vs_bitrate(out_dir, seed=0, rates_gbps=_SUITE_RATES_GBPS,
                         delays=(1, 2, 3), quick_scale=1.0):
    """Delayed-XOR BER across bit rates with the linear-separability floor."""
    rows = []
    for rate in rates_gbps:
        for delay in delays:
            task = tasks.TaskSpec(tasks.XOR_KIND, rate * 1e9, delay_bits=delay)
            floor = evaluation.linear_separability_floor(task, delay + 1)
            cfg = _suite_config(f"xor{delay}-{rate:g}g",
                                derive_seed(seed, "xor", delay, rate), task,
                                train_bits=int(2e-6 * rate * 1e9 * quick_scale) or 0,
                                test_bits=int(2e-6 * rate * 1e9 * quick_scale) or 0)
            run = _train_and_test(cfg)
            rows.append([rate, delay, run.test.ber, run.test.ber_limit,
                         run.test.is_error_free, floor])
    header = ["bit_rate_gbps", "delay_bits", "ber", "ber_limit", "error_free",
              "separability_floor"]
    write_csv(Path(out_dir) / "xor_vs_bitrate.csv", header, rows)
    plots.render_xor_bars(_rows_as_dicts(header, rows),
                          Path(out_dir) / "xor_vs_bitrate.png")
    return rows


def sampling_map_rows(seed, attenuation_db_grid=experiments.DEFAULT_ATTENUATION_GRID_DB,
                      offsets=None, loss_db_per_cm=6.0, max_iters=40,
                      test_traces=5, test_bits=0, train_bits=0):
    """Per-offset trained XOR BER at 5 Gbps for each attenuation setting."""
    task = tasks.TaskSpec(tasks.XOR_KIND, 5e9, delay_bits=1)
    rows = []
    b_sa = 16
    offsets = range(b_sa) if offsets is None else offsets
    for atten in attenuation_db_grid:
        for offset in offsets:
            cfg = _suite_config(f"map-a{atten:g}-n{offset}",
                                derive_seed(seed, "map", atten, offset), task,
                                sampling_offset=offset, max_iters=max_iters,
                                loss_db_per_cm=loss_db_per_cm,
                                attenuation_db=atten, test_traces=test_traces,
                                test_bits=test_bits, train_bits=train_bits)
            run = _train_and_test(cfg)
            rows.append([offset * 12.5, atten, run.test.ber, run.test.ber_limit,
                         run.test.is_error_free])
    return rows


def suite_xor_sampling_map(out_dir, seed=0, **kwargs):
    rows = sampling_map_rows(seed, **kwargs)
    header = ["sampling_time_ps", "attenuation_db", "ber", "ber_limit", "error_free"]
    write_csv(Path(out_dir) / "xor_sampling_map.csv", header, rows)
    plots.render_sampling_map(_rows_as_dicts(header, rows),
                              Path(out_dir) / "xor_sampling_map.png")
    return rows


def model_comparison_rows(seed, max_iters=40, test_traces=5, test_bits=0,
                          train_bits=0, reservoir_repeats=10):
    """The three models on 1-bit delayed XOR at 5 Gbps, matched noise."""
    task = tasks.TaskSpec(tasks.XOR_KIND, 5e9, delay_bits=1)
    b_sa = 16
    rows = []
    for offset in range(b_sa):
        cfg = _suite_config(f"cmp-complex-n{offset}",
                            derive_seed(seed, "cmp-complex", offset), task,
                            sampling_offset=offset, max_iters=max_iters,
                            test_traces=test_traces, test_bits=test_bits,
                            train_bits=train_bits)
        run = _train_and_test(cfg)
        rows.append(["complex", offset * 12.5, run.test.ber, run.test.ber_limit,
                     run.test.is_error_free])
    real_cfg = _suite_config("cmp-real", derive_seed(seed, "cmp-real"), task,
                             test_traces=test_traces, test_bits=test_bits,
                             train_bits=train_bits)
    for offset, _coef, summary in experiments.run_real_perceptron(real_cfg):
        rows.append(["real-perceptron", offset * 12.5, summary.ber,
                     summary.ber_limit, summary.is_error_free])
    res_cfg = _suite_config("cmp-reservoir", derive_seed(seed, "cmp-reservoir"),
                            task, test_traces=test_traces, test_bits=test_bits,
                            train_bits=train_bits)
    _repeats, mean_ber, best_ber = experiments.run_reservoir(res_cfg,
                                                             reservoir_repeats)
    limit = tasks.statistical_ber_limit(_repeats[0].test.total_bits)
    for offset in range(b_sa):
        rows.append(["reservoir-mean", offset * 12.5, mean_ber, limit,
                     mean_ber == 0.0])
        rows.append(["reservoir-best", offset * 12.5, best_ber, limit,
                     best_ber == 0.0])
    return rows


def suite_model_comparison(out_dir, seed=0, **kwargs):
    rows = model_comparison_rows(seed, **kwargs)
    header = ["model", "sampling_time_ps", "ber", "ber_limit", "error_free"]
    write_csv(Path(out_dir) / "model_comparison.csv", header, rows)
    plots.render_model_comparison(_rows_as_dicts(header, rows),
                                  Path(out_dir) / "model_comparison.png")
    return rows


def phase_decode_run(seed, snr_db=14.0, max_iters=80, test_traces=10,
                     test_bits=0, train_bits=0):
    """Train the phase-decoding task at 10 Gbps and report BER and the
    input-intensity/output correlation at the best sampling instant."""
    task = tasks.TaskSpec(tasks.PHASE_DECODE_KIND, 10e9)
    cfg = _suite_config("phase-decode", seed, task, max_iters=max_iters,
                        snr_db=snr_db, test_traces=test_traces,
                        test_bits=test_bits, train_bits=train_bits)
    run = experiments.run_perceptron(cfg)
    transient = experiments.memory_transient_bits(cfg.device, cfg.channel,
                                                  cfg.task.bit_rate)
    acq = experiments.acquire(cfg.task, cfg.channel, cfg.device, run.phases,
                              cfg.test_bits, derive_seed(cfg.seed, "test-trace", 0),
                              cfg.attenuation_db, cfg.rx_bandwidth_hz,
                              run.pipeline_delay)
    res = run.test.per_trace[0]
    b_sa = acq.b_sa
    input_levels = evaluation.sampled_bits_matrix(acq.rx1, b_sa)[:, b_sa // 2]
    output_levels = evaluation.sampled_bits_matrix(acq.rx2, b_sa)[:, res.best_sampling_index]
    corr = evaluation.pearson(input_levels[transient:], output_levels[transient:])
    return cfg, run, acq, input_levels, output_levels, corr


def suite_phase_decode(out_dir, seed=0, trace_bits_shown=200, **kwargs):
    cfg, run, acq, input_levels, output_levels, corr = phase_decode_run(seed, **kwargs)
    res = run.test.per_trace[0]
    decided = (output_levels > res.best_threshold).astype(int)
    header = ["bit_index", "phase_bit", "input_level", "output_level", "decoded_bit"]
    rows = [[l, acq.bits[l], input_levels[l], output_levels[l], decided[l]]
            for l in range(min(trace_bits_shown, len(acq.bits)))]
    out = Path(out_dir)
    write_csv(out / "phase_decode_trace.csv", header, rows)
    plots.render_decode_trace(_rows_as_dicts(header, rows),
                              out / "phase_decode_trace.png")
    write_csv(out / "phase_decode_summary.csv",
              ["ber", "ber_limit", "errors", "bits", "error_free",
               "pearson_input_output"],
              [[run.test.ber, run.test.ber_limit, run.test.error_count,
                run.test.total_bits, run.test.is_error_free, corr]])
    return rows


def run_suite(name: str, out_dir, seed: int = 0, **kwargs):
    """Dispatch one named suite; emits its CSV(s) and figure(s)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runners = {
        "fig2-sweep": suite_fig2_sweep,
        "pattern-vs-bitrate": suite_pattern_vs_bitrate,
        "xor-vs-bitrate": suite_xor_vs_bitrate,
        "xor-sampling-map": suite_xor_sampling_map,
        "model-comparison": suite_model_comparison,
        "phase-decode": suite_phase_decode,
    }
    if name not in runners:
        raise ValueError(
            f"unknown suite {name!r}; valid suites: {', '.join(SUITE_NAMES)}")
    return runners[name](out, seed=seed, **kwargs)
