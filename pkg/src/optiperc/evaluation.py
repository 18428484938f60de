"""Digitization, best-threshold/best-sampling search, error metrics.

The decision stage mirrors a telecom receiver: the output trace is sampled
once per bit at a trainable intra-bit offset and compared against a
trainable threshold; both are chosen by exhaustive sweep to minimize the
mismatch count against the targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .tasks import TaskSpec, XOR_KIND, PATTERN_KIND

#: Default number of threshold intervals spanning the signal dynamic range.
DEFAULT_THRESHOLD_LEVELS = 64


@dataclass
class EvalResult:
    """Outcome of the decision-stage sweep on one evaluation set."""

    ber: float
    best_threshold: float
    best_sampling_index: int
    error_count: int
    total_bits: int
    is_error_free: bool
    level_histograms: dict | None = None

    def __post_init__(self):
        if self.total_bits <= 0:
            raise ValueError("total_bits must be positive")
        if not math.isclose(self.ber, self.error_count / self.total_bits,
                            rel_tol=0, abs_tol=1e-12):
            raise ValueError("ber must equal error_count/total_bits")
        if self.is_error_free != (self.error_count == 0):
            raise ValueError("is_error_free must mirror error_count == 0")


def digitize_reference(trace: np.ndarray, b_sa: int) -> np.ndarray:
    """Recover bits from a clean reference trace.

    Bit l is 1 iff the central sample of its slot exceeds the trace mean
    (strict inequality, so a constant trace digitizes to all zeros).
    """
    trace = np.asarray(trace, dtype=np.float64)
    if b_sa < 1:
        raise ValueError("b_sa must be >= 1")
    if trace.size % b_sa != 0:
        raise ValueError(f"trace length {trace.size} not divisible by b_sa {b_sa}")
    centers = trace.reshape(-1, b_sa)[:, b_sa // 2]
    return (centers > trace.mean()).astype(np.uint8)


def threshold_grid(trace_min: float, trace_max: float, levels: int) -> np.ndarray:
    """Decision thresholds spanning the dynamic range.

    ``levels`` uniform steps between the extremes plus a below-everything
    sentinel, so the sweep always has the two constant classifiers
    available (-inf -> all ones, max -> all zeros).  Grids nest under
    doubling of ``levels``, which makes refinement monotone.
    """
    if levels < 1:
        raise ValueError("need at least one threshold level")
    interior = trace_min + (trace_max - trace_min) * np.arange(1, levels) / levels
    return np.concatenate(([-np.inf], interior, [trace_max]))


def sampled_bits_matrix(trace: np.ndarray, b_sa: int) -> np.ndarray:
    """Per-bit output samples: row l holds the b_sa samples of bit slot l."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.size % b_sa != 0:
        raise ValueError(f"trace length {trace.size} not divisible by b_sa {b_sa}")
    return trace.reshape(-1, b_sa)


def mismatch_counts(samples: np.ndarray, targets: np.ndarray, valid: np.ndarray,
                    thresholds: np.ndarray) -> np.ndarray:
    """Error counts for every (sampling offset, threshold) cell.

    ``samples`` is the (bits, b_sa) per-bit sample matrix; returns an
    (b_sa, len(thresholds)) integer array of mismatches over valid bits.
    A decided bit is 1 iff its sample exceeds the threshold, so the error
    count at threshold r is #(target-1 samples <= r) + #(target-0 samples
    > r), evaluated for the whole grid by binary search in the sorted
    per-class samples.
    """
    t = targets[valid].astype(bool)
    s = samples[valid]
    n_offsets = s.shape[1]
    out = np.empty((n_offsets, thresholds.size), dtype=np.int64)
    for n in range(n_offsets):
        ones = np.sort(s[t, n])
        zeros = np.sort(s[~t, n])
        missed_ones = np.searchsorted(ones, thresholds, side="right")
        kept_zeros = np.searchsorted(zeros, thresholds, side="right")
        out[n] = missed_ones + (zeros.size - kept_zeros)
    return out


def sweep_eval(trace: np.ndarray, targets: np.ndarray, valid: np.ndarray,
               b_sa: int, threshold_levels: int = DEFAULT_THRESHOLD_LEVELS,
               sampling_index: int | None = None) -> EvalResult:
    """Exhaustive best-threshold / best-sampling search.

    Digitizes the output at every intra-bit offset n and every threshold r,
    counts mismatches against the unmasked targets, and returns the (r, n)
    minimizing the count.  Ties break to the smallest offset, then the
    smallest threshold.  ``sampling_index`` pins the offset and sweeps the
    threshold only.
    """
    targets = np.asarray(targets, dtype=np.uint8)
    valid = np.asarray(valid, dtype=bool)
    samples = sampled_bits_matrix(trace, b_sa)
    if samples.shape[0] != targets.size or targets.size != valid.size:
        raise ValueError(
            f"targets/mask of {targets.size} bits do not match trace of "
            f"{samples.shape[0]} bit slots"
        )
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValueError("no valid bits to evaluate")
    if threshold_levels < 1:
        raise ValueError("empty threshold grid")
    if sampling_index is not None:
        if not 0 <= sampling_index < b_sa:
            raise ValueError(f"sampling_index {sampling_index} outside 0..{b_sa - 1}")
        samples_view = samples[:, sampling_index:sampling_index + 1]
    else:
        samples_view = samples
    thresholds = threshold_grid(float(samples_view[valid].min()),
                                float(samples_view[valid].max()), threshold_levels)
    errors = mismatch_counts(samples_view, targets, valid, thresholds)
    flat = int(np.argmin(errors))  # row-major: smallest offset, then smallest threshold
    n_idx, r_idx = divmod(flat, thresholds.size)
    best_errors = int(errors[n_idx, r_idx])
    offset = sampling_index if sampling_index is not None else int(n_idx)
    return EvalResult(
        ber=best_errors / n_valid,
        best_threshold=float(thresholds[r_idx]),
        best_sampling_index=offset,
        error_count=best_errors,
        total_bits=n_valid,
        is_error_free=(best_errors == 0),
    )


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("pearson needs two equal-length sequences of >= 2 samples")
    xm = x - x.mean()
    ym = y - y.mean()
    vx = float(np.dot(xm, xm))
    vy = float(np.dot(ym, ym))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    return float(np.dot(xm, ym) / math.sqrt(vx * vy))


def linear_separability_floor(task: TaskSpec, window: int) -> float:
    """Best error rate of any affine classifier on raw input-bit windows.

    Exact enumeration over all 2^window equally weighted windows; any model
    measured below this floor is certifiably performing a nonlinear
    computation on the bits.  Supported for window <= 4.
    """
    if task.kind == XOR_KIND:
        if window < task.delay_bits + 1:
            raise ValueError(
                f"window {window} shorter than the {task.delay_bits}-bit XOR memory"
            )
        labels = oracles.xor_window_labels(task.delay_bits, window)
    elif task.kind == PATTERN_KIND:
        if window < len(task.pattern):
            raise ValueError(f"window {window} shorter than pattern {task.pattern!r}")
        labels = oracles.pattern_window_labels(task.pattern, window)
    else:
        raise ValueError(f"no bit-window formulation for task {task.kind!r}")
    return oracles.affine_error_floor(labels, window)


def level_histograms(trace: np.ndarray, input_bits: np.ndarray, b_sa: int,
                     sampling_index: int) -> dict:
    """Sampled output levels grouped by the (previous bit, current bit) symbol.

    Returns the four lists keyed by "00", "01", "10", "11" (previous bit
    first); the first bit has no predecessor and is skipped.  This is the
    plot data of the output-level distributions.
    """
    samples = sampled_bits_matrix(trace, b_sa)[:, sampling_index]
    bits = np.asarray(input_bits, dtype=np.uint8)
    if bits.size != samples.size:
        raise ValueError(f"{bits.size} bits vs {samples.size} sampled levels")
    out = {"00": [], "01": [], "10": [], "11": []}
    prev = bits[:-1]
    cur = bits[1:]
    levels = samples[1:]
    for p in (0, 1):
        for c in (0, 1):
            sel = (prev == p) & (cur == c)
            out[f"{p}{c}"] = levels[sel].tolist()
    return out
