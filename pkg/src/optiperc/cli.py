"""Command-line entry point.

Verbs:
  run <config.toml>        execute one configured experiment
  suite <name>             emit a figure-data bundle (CSV + PNG)
  oracle <name>            run a brute-force reference check
  validate <config.toml>   schema-check a config file

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

ORACLE_NAMES = ("eq4-naive", "phase-grid", "separability")


def _cmd_run(args) -> int:
    from . import configio, report

    try:
        cfg = configio.load_config(args.config)
    except configio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = report.run_experiment(cfg, args.out)
    print(f"run {cfg.name!r} complete; outputs in {out}")
    return 0


def _cmd_validate(args) -> int:
    from . import configio

    try:
        cfg = configio.load_config(args.config)
    except configio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"config {cfg.name!r} is valid "
          f"(task {cfg.task.label}, {cfg.task.bit_rate / 1e9:g} Gbps, "
          f"B_sa {cfg.b_sa}, seed {cfg.seed})")
    return 0


def _cmd_suite(args) -> int:
    from . import report

    if args.name not in report.SUITE_NAMES:
        print(f"error: unknown suite {args.name!r}; valid suites: "
              f"{', '.join(report.SUITE_NAMES)}", file=sys.stderr)
        return 2
    t0 = time.time()
    report.run_suite(args.name, args.out, seed=args.seed)
    print(f"suite {args.name} complete in {time.time() - t0:.1f} s; "
          f"outputs in {args.out}")
    return 0


def _oracle_eq4_naive() -> int:
    from . import core, oracles

    rng = np.random.default_rng(20240)
    worst = 0.0
    for trial in range(100):
        taps = rng.normal(size=(4, 1000)) + 1j * rng.normal(size=(4, 1000))
        phases = rng.uniform(0.0, 2.0 * math.pi, 4)
        fast = core.perceptron_output(taps, phases)
        slow = np.array(oracles.naive_weighted_sum_power(taps, phases))
        scale = np.maximum(np.abs(slow), 1e-300)
        worst = max(worst, float(np.max(np.abs(fast - slow) / scale)))
    print(f"eq4-naive: vectorized vs sample-by-sample evaluator, "
          f"100 random waveforms: max relative deviation {worst:.3e}")
    return 0 if worst < 1e-12 else 3


def _oracle_phase_grid() -> int:
    """Exhaustive 3-phase grid search for noiseless tasks at 16 Gbps.

    Establishes by enumeration (10-degree resolution) that an error-free
    phase setting exists for the 2-bit patterns and the 1-bit XOR, the
    existence fact behind the swarm-trainability expectations.
    """
    from . import core, evaluation, experiments, signal, tasks

    channel = signal.ChannelParams(80e9, 16e9, 7.0, math.inf, 0.0)
    device = core.config_from_loss(6.0)
    grid = np.radians(np.arange(0.0, 360.0, 10.0))
    specs = [tasks.TaskSpec(tasks.PATTERN_KIND, 16e9, pattern="10"),
             tasks.TaskSpec(tasks.PATTERN_KIND, 16e9, pattern="01"),
             tasks.TaskSpec(tasks.PATTERN_KIND, 16e9, pattern="11"),
             tasks.TaskSpec(tasks.XOR_KIND, 16e9, delay_bits=1)]
    all_ok = True
    for task in specs:
        prep = experiments.prepare_acquisition(task, channel, device, 1024, 7)
        transient = experiments.memory_transient_bits(device, channel, task.bit_rate)
        best = None
        for p2 in grid:
            for p3 in grid:
                for p4 in grid:
                    acq = experiments.complete_acquisition(
                        prep, channel, device, np.array([0.0, p2, p3, p4]))
                    targets, valid = experiments.acquisition_targets(task, acq,
                                                                     transient)
                    res = evaluation.sweep_eval(acq.rx2, targets, valid, acq.b_sa)
                    if best is None or res.error_count < best[0]:
                        best = (res.error_count, p2, p3, p4)
                    if best[0] == 0:
                        break
                if best[0] == 0:
                    break
            if best[0] == 0:
                break
        status = "error-free solution found" if best[0] == 0 else \
            f"best residual errors {best[0]}"
        print(f"phase-grid {task.label}: {status} at phases "
              f"(0, {math.degrees(best[1]):.0f}, {math.degrees(best[2]):.0f}, "
              f"{math.degrees(best[3]):.0f}) deg")
        all_ok = all_ok and best[0] == 0
    return 0 if all_ok else 3


def _oracle_separability() -> int:
    from . import evaluation, tasks

    print("separability: exact affine-classifier error floors by enumeration")
    ok = True
    for delay in (1, 2, 3):
        task = tasks.TaskSpec(tasks.XOR_KIND, 5e9, delay_bits=delay)
        floor = evaluation.linear_separability_floor(task, delay + 1)
        print(f"  {delay}-bit delayed XOR (window {delay + 1}): floor {floor}")
        ok = ok and floor == 0.25
    for pattern in ("01", "10", "11"):
        task = tasks.TaskSpec(tasks.PATTERN_KIND, 5e9, pattern=pattern)
        floor = evaluation.linear_separability_floor(task, 2)
        print(f"  pattern {pattern!r} (window 2): floor {floor}")
        ok = ok and floor == 0.0
    return 0 if ok else 3


def _cmd_oracle(args) -> int:
    runners = {"eq4-naive": _oracle_eq4_naive,
               "phase-grid": _oracle_phase_grid,
               "separability": _oracle_separability}
    if args.name not in runners:
        print(f"error: unknown oracle {args.name!r}; valid oracles: "
              f"{', '.join(ORACLE_NAMES)}", file=sys.stderr)
        return 2
    return runners[args.name]()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optiperc",
        description="Delay-line optical perceptron simulator and experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured experiment")
    p_run.add_argument("config", help="TOML experiment configuration")
    p_run.add_argument("--out", default=None, help="output directory override")

    p_val = sub.add_parser("validate", help="schema-check a config file")
    p_val.add_argument("config")

    p_suite = sub.add_parser("suite", help="emit a figure-data bundle")
    p_suite.add_argument("name")
    p_suite.add_argument("--out", default="suite-out")
    p_suite.add_argument("--seed", type=int, default=0)

    p_oracle = sub.add_parser("oracle", help="run a brute-force reference check")
    p_oracle.add_argument("name")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate,
                "suite": _cmd_suite, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # runtime failures map to exit code 3
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
