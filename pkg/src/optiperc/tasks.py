"""Logical task definitions and causal target generation.

Targets are aligned with the newest bit involved in the decision
("wait-and-see": the device may only use bits up to and including the one it
labels).  Positions lacking the required history are masked out of loss and
error counting rather than zero-filled, which keeps short traces exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PATTERN_KIND = "pattern"
XOR_KIND = "xor"
PHASE_DECODE_KIND = "phase-decode"


@dataclass(frozen=True)
class TaskSpec:
    """Which logical task to run and its parameter.

    kind ``"pattern"``: recognize ``pattern`` (2 or 3 bits, not all-zero —
    an all-zero pattern is unrecognizable under amplitude keying because a
    dark input forces a dark output).  kind ``"xor"``: ``delay_bits``-bit
    delayed XOR.  kind ``"phase-decode"``: reproduce phase-encoded bits as
    output intensity.
    """

    kind: str
    bit_rate: float
    pattern: str | None = None
    delay_bits: int | None = None

    def __post_init__(self):
        if not self.bit_rate > 0:
            raise ValueError(f"bit_rate must be positive, got {self.bit_rate}")
        if self.kind == PATTERN_KIND:
            if not self.pattern or any(c not in "01" for c in self.pattern):
                raise ValueError(f"pattern must be a non-empty 0/1 string, got {self.pattern!r}")
            if len(self.pattern) not in (2, 3):
                raise ValueError(f"pattern length must be 2 or 3, got {len(self.pattern)}")
            if set(self.pattern) == {"0"}:
                raise ValueError("all-zero patterns are unrecognizable under NRZ input")
        elif self.kind == XOR_KIND:
            if self.delay_bits is None or self.delay_bits < 1:
                raise ValueError(f"xor delay must be >= 1, got {self.delay_bits}")
        elif self.kind == PHASE_DECODE_KIND:
            pass
        else:
            raise ValueError(f"unknown task kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == PATTERN_KIND:
            return f"pattern-{self.pattern}"
        if self.kind == XOR_KIND:
            return f"xor-{self.delay_bits}"
        return PHASE_DECODE_KIND

    @property
    def uses_phase_encoding(self) -> bool:
        return self.kind == PHASE_DECODE_KIND

    def targets(self, bits: np.ndarray):
        if self.kind == PATTERN_KIND:
            return target_pattern(bits, self.pattern)
        if self.kind == XOR_KIND:
            return target_delayed_xor(bits, self.delay_bits)
        return target_phase_decode(bits)


def target_pattern(bits, pattern: str):
    """Pattern-recognition targets: T_l = 1 iff bits[l-p+1..l] == pattern.

    Returns ``(targets, valid)``; the first p-1 positions have insufficient
    history and are marked invalid.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    p = len(pattern)
    if p > bits.size:
        raise ValueError(f"pattern of {p} bits longer than input of {bits.size}")
    want = np.array([int(c) for c in pattern], dtype=np.uint8)
    targets = np.zeros(bits.size, dtype=np.uint8)
    windows = np.lib.stride_tricks.sliding_window_view(bits, p)
    targets[p - 1:] = np.all(windows == want, axis=1)
    valid = np.ones(bits.size, dtype=bool)
    valid[:p - 1] = False
    return targets, valid


def target_delayed_xor(bits, n: int):
    """Delayed-XOR targets: T_l = bits[l] ^ bits[l-n]; first n positions invalid."""
    bits = np.asarray(bits, dtype=np.uint8)
    if n >= bits.size:
        raise ValueError(f"xor delay {n} >= input length {bits.size}")
    targets = np.zeros(bits.size, dtype=np.uint8)
    targets[n:] = bits[n:] ^ bits[:-n]
    valid = np.ones(bits.size, dtype=bool)
    valid[:n] = False
    return targets, valid


def target_phase_decode(bits):
    """Phase-decoding targets: reproduce the encoded bits themselves."""
    bits = np.asarray(bits, dtype=np.uint8)
    return bits.copy(), np.ones(bits.size, dtype=bool)


def statistical_ber_limit(total_test_bits: int) -> float:
    """Smallest nonzero measurable error rate: 1 / (bits tested).

    A run with zero observed errors is reported as error-free, i.e. its true
    rate is at or below this limit.
    """
    if total_test_bits <= 0:
        raise ValueError(f"total_test_bits must be positive, got {total_test_bits}")
    return 1.0 / total_test_bits
