"""Brute-force reference implementations.

Deliberately naive, loop-based evaluators kept independent of the vectorized
production paths.  They exist to pin expected values in tests and are also
runnable from the CLI (``optiperc oracle <name>``).
"""

from __future__ import annotations

import cmath
import itertools
import math

import numpy as np


def naive_weighted_sum_power(taps, phases) -> list[float]:
    """Sample-by-sample evaluation of |sum_k taps[k][j] * e^{i phi_k}|^2.

    Pure-Python reference for the detector output; accepts any nested
    sequence of complex tap samples (rows = taps).
    """
    taps = [list(row) for row in taps]
    n = len(taps)
    if n == 0:
        raise ValueError("need at least one tap")
    length = len(taps[0])
    for row in taps:
        if len(row) != length:
            raise ValueError("tap rows must have equal length")
    if len(phases) != n:
        raise ValueError("one phase per tap required")
    out = []
    for j in range(length):
        acc = 0j
        for k in range(n):
            acc += complex(taps[k][j]) * cmath.exp(1j * float(phases[k]))
        out.append(abs(acc) ** 2)
    return out


def naive_three_signal(u1, u2, u3, a2, gamma, phi_c, phi_r) -> float:
    """Direct evaluation of the three-arm interference intensity."""
    w1 = 1.0
    w2 = a2 * cmath.exp(1j * phi_c)
    w3 = a2 * gamma * cmath.exp(1j * (phi_c + phi_r))
    return abs(u1 * w1 + u2 * w2 + u3 * w3) ** 2


# Every linear threshold function of n <= 4 binary inputs has an integer
# realization with |weights| <= 3 (Muroga's bound gives (n+1)^((n+1)/2)/2^n
# < 3.5 at n = 4), so enumerating integer weights in [-5, 5] with
# half-integer thresholds is an exact search.
_WEIGHT_BOUND = 5


def affine_error_floor(labels: np.ndarray, window: int) -> float:
    """Exact minimum error fraction of any affine classifier on bit windows.

    ``labels[idx]`` is the target for the window whose bits are the binary
    digits of ``idx`` (LSB = oldest bit); all 2^window windows carry equal
    weight.  Searched by exhaustive enumeration of integer weight vectors,
    which is exact for window <= 4.
    """
    if window > 4:
        raise ValueError("exact enumeration supported only for window <= 4")
    if window < 1:
        raise ValueError("window must be >= 1")
    labels = np.asarray(labels, dtype=np.int64)
    n_points = 2 ** window
    if labels.shape != (n_points,):
        raise ValueError(f"need {n_points} labels, got shape {labels.shape}")
    points = np.array([[(idx >> b) & 1 for b in range(window)]
                       for idx in range(n_points)], dtype=np.int64)
    span = range(-_WEIGHT_BOUND, _WEIGHT_BOUND + 1)
    weights = np.array(list(itertools.product(span, repeat=window)), dtype=np.int64)
    scores = weights @ points.T  # (n_weights, n_points), integer
    max_abs = _WEIGHT_BOUND * window
    best = n_points
    for half_thr in range(-2 * max_abs - 1, 2 * max_abs + 3, 2):
        # threshold = half_thr / 2 is never hit by an integer score
        predicted = (2 * scores > half_thr).astype(np.int64)
        errors = np.sum(predicted != labels[None, :], axis=1)
        best = min(best, int(errors.min()))
    return best / n_points


def xor_window_labels(delay: int, window: int) -> np.ndarray:
    """Targets of the n-bit delayed XOR over all bit windows."""
    if window < delay + 1:
        raise ValueError(f"window {window} too short for {delay}-bit delayed XOR")
    n_points = 2 ** window
    labels = np.zeros(n_points, dtype=np.int64)
    for idx in range(n_points):
        newest = (idx >> (window - 1)) & 1
        older = (idx >> (window - 1 - delay)) & 1
        labels[idx] = newest ^ older
    return labels


def pattern_window_labels(pattern: str, window: int) -> np.ndarray:
    """Targets of pattern recognition (1 iff the window ends with the pattern)."""
    p = len(pattern)
    if window < p:
        raise ValueError(f"window {window} too short for pattern {pattern!r}")
    bits = [int(c) for c in pattern]
    n_points = 2 ** window
    labels = np.zeros(n_points, dtype=np.int64)
    for idx in range(n_points):
        tail = [(idx >> (window - p + i)) & 1 for i in range(p)]
        labels[idx] = int(tail == bits)
    return labels


def brute_force_pattern_targets(bits, pattern: str):
    """Window-scanning reference for pattern targets (validity, target) pairs."""
    p = len(pattern)
    want = [int(c) for c in pattern]
    out = []
    for l in range(len(bits)):
        if l < p - 1:
            out.append((False, 0))
        else:
            out.append((True, int(list(bits[l - p + 1:l + 1]) == want)))
    return out


def interference_extremes(amplitudes, grid_points: int = 60):
    """Brute-force (min, max) of |sum a_k e^{i phi_k}|^2 over a phase grid.

    The first phase is pinned to 0 (global phase invariance); the rest sweep
    a uniform grid.  Used to check the analytic interference bounds.
    """
    amps = np.asarray(amplitudes, dtype=np.float64)
    n = amps.size
    grid = np.linspace(0.0, 2.0 * math.pi, grid_points, endpoint=False)
    lo, hi = math.inf, -math.inf
    for combo in itertools.product(grid, repeat=n - 1):
        s = amps[0] + sum(a * cmath.exp(1j * p) for a, p in zip(amps[1:], combo))
        v = abs(s) ** 2
        lo = min(lo, v)
        hi = max(hi, v)
    return lo, hi
