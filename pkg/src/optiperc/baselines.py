"""Comparison models sharing the signal chain and decision rule.

Two alternatives to the phase-trained coherent device: a real-valued
perceptron that detects each delayed copy separately (no interference, so no
nonlinearity beyond the per-tap square law), and a time-multiplexed
reservoir that freezes random phases and trains only a linear readout on the
per-bit output samples (virtual nodes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, training
from .evaluation import sweep_eval, EvalResult

#: Ridge strength relative to the mean feature power.
DEFAULT_RIDGE_LAMBDA_REL = 1e-4


@dataclass(frozen=True)
class BaselineKind:
    """Which comparison model to run; reservoir carries its repeat count."""

    name: str
    repeats: int = 10
    virtual_nodes: int | None = None

    def __post_init__(self):
        if self.name not in ("real-perceptron", "reservoir"):
            raise ValueError(f"unknown baseline {self.name!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.virtual_nodes is not None and self.virtual_nodes < 1:
            raise ValueError("virtual_nodes must be >= 1")


def effective_lambda(features: np.ndarray, lambda_rel: float) -> float:
    """Ridge strength scaled by the mean feature power."""
    return lambda_rel * float(np.mean(np.asarray(features, dtype=np.float64) ** 2))


def real_perceptron_predict(input_wave: core.ComplexWaveform,
                            config: core.PerceptronConfig,
                            weights) -> np.ndarray:
    """Incoherent tap combination: y(t) = sum_k v_k |u_k(t)|^2 + b.

    ``weights`` holds the N tap coefficients followed by the bias.  The
    square law acts on each delayed copy before the (real-valued) weighting,
    so the model sees only tap powers and is blind to any common optical
    phase.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (config.n_taps + 1,):
        raise ValueError(f"expected {config.n_taps} weights plus a bias, got {weights.shape}")
    taps = core.tap_matrix(input_wave, config)
    powers = taps.real ** 2 + taps.imag ** 2
    return weights[:-1] @ powers + weights[-1]


def tap_power_features(tap_powers: np.ndarray, b_sa: int, offset: int) -> np.ndarray:
    """Per-bit feature matrix of the N tap powers sampled at one intra-bit offset."""
    n_taps, length = tap_powers.shape
    if length % b_sa != 0:
        raise ValueError(f"trace length {length} not divisible by b_sa {b_sa}")
    if not 0 <= offset < b_sa:
        raise ValueError(f"offset {offset} outside 0..{b_sa - 1}")
    return tap_powers.reshape(n_taps, -1, b_sa)[:, :, offset].T


def virtual_node_features(output_trace: np.ndarray, b_sa: int) -> np.ndarray:
    """Per-bit feature matrix of all intra-bit output samples.

    Row l holds the b_sa samples of bit slot l; these are the virtual-node
    states of the time-multiplexed reservoir reading.
    """
    trace = np.asarray(output_trace, dtype=np.float64)
    if trace.size % b_sa != 0:
        raise ValueError(f"trace length {trace.size} not divisible by b_sa {b_sa}")
    return trace.reshape(-1, b_sa)


def fit_linear_readout(features: np.ndarray, targets: np.ndarray, valid: np.ndarray,
                       lambda_rel: float = DEFAULT_RIDGE_LAMBDA_REL) -> np.ndarray:
    """Ridge-fit a readout on the valid bits; returns coefficients, bias last."""
    x = np.asarray(features, dtype=np.float64)[valid]
    t = np.asarray(targets, dtype=np.float64)[valid]
    return training.ridge_fit(x, t, effective_lambda(x, lambda_rel))


def evaluate_readout(features: np.ndarray, coef, targets, valid,
                     threshold_levels: int) -> EvalResult:
    """Binarize readout predictions through the standard threshold sweep.

    Predictions are one value per bit, so the sweep degenerates to a pure
    threshold search (B_sa = 1) — the identical decision rule used for the
    coherent device.
    """
    predictions = training.ridge_predict(features, coef)
    return sweep_eval(predictions, targets, valid, b_sa=1,
                      threshold_levels=threshold_levels)


def draw_reservoir_phases(n_taps: int, rng) -> np.ndarray:
    """Random heater settings of one reservoir realization."""
    return rng.uniform(0.0, core.TWO_PI, n_taps)
