"""Wavefronts (one event time per wire) and code-space fidelity metrics.

A wavefront is the value passed between every stage of the memory:
recall produces one, capture consumes one.  Two views of the same
wavefront matter: the exact per-channel timings, and the rank order of
arrival, which survives any monotone distortion of the timings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

EFFECTIVE_BITS_CAP = 8.0  # declared precision ceiling of the bits metric


@dataclass(frozen=True)
class Wavefront:
    """Per-channel event times in ns; channel index is positional."""

    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError("wavefront needs at least one channel")
        if any(not math.isfinite(t) or t < 0 for t in times):
            raise ValueError("wavefront times must be finite and non-negative")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_channels(self) -> int:
        return len(self.times)

    @property
    def span(self) -> float:
        return max(self.times) - min(self.times)


@dataclass(frozen=True)
class RankOrder:
    """Channel indices sorted by ascending event time (ties by channel)."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError("order must be a permutation of 0..n-1")
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)


def normalize(w: Wavefront) -> Wavefront:
    """Shift all times so the first event sits at 0 ns."""
    t0 = min(w.times)
    return Wavefront(tuple(t - t0 for t in w.times))


def rank_of(w: Wavefront) -> RankOrder:
    """Arrival order of the channels; simultaneous edges break ties by
    ascending channel index."""
    order = np.argsort(np.asarray(w.times), kind="stable")
    return RankOrder(tuple(int(i) for i in order))


def kendall_tau(a: RankOrder, b: RankOrder) -> float:
    """Kendall rank correlation of two arrival orders, in [-1, 1]."""
    if len(a) != len(b):
        raise ValueError("rank orders must have the same channel count")
    n = len(a)
    if n < 2:
        return 1.0
    pos_a = [0] * n
    pos_b = [0] * n
    for pos, ch in enumerate(a.order):
        pos_a[ch] = pos
    for pos, ch in enumerate(b.order):
        pos_b[ch] = pos
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = (pos_a[i] - pos_a[j]) * (pos_b[i] - pos_b[j])
            if s > 0:
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) / 2)


def timing_error(a: Wavefront, b: Wavefront) -> tuple[float, float]:
    """(rms, max abs) per-channel timing difference in ns, after both
    wavefronts are normalized to their first edge."""
    if len(a) != len(b):
        raise ValueError("wavefronts must have the same channel count")
    da = np.asarray(normalize(a).times)
    db = np.asarray(normalize(b).times)
    diff = da - db
    return float(np.sqrt(np.mean(diff * diff))), float(np.max(np.abs(diff)))


def effective_bits(span: float, rms: float) -> float:
    """Timing precision in bits: log2(span / 2*rms), capped at 8 bits."""
    if span <= 0:
        raise ValueError("span must be positive")
    if rms <= 0:
        return EFFECTIVE_BITS_CAP
    return min(math.log2(span / (2.0 * rms)), EFFECTIVE_BITS_CAP)


def write_wavefront_csv(path, w: Wavefront) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["channel", "time_ns"])
        for ch, t in enumerate(w.times):
            writer.writerow([ch, repr(t)])


def read_wavefront_csv(path) -> Wavefront:
    """Parse a `channel,time_ns` file; channels must be 0..N-1 contiguous."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["channel", "time_ns"]:
            raise ValueError(f"{path}: expected header 'channel,time_ns'")
        rows = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 fields")
            try:
                ch, t = int(row[0]), float(row[1])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            if ch in rows:
                raise ValueError(f"{path}: line {lineno}: duplicate channel {ch}")
            rows[ch] = t
    if not rows:
        raise ValueError(f"{path}: no channels")
    if sorted(rows) != list(range(len(rows))):
        raise ValueError(f"{path}: channel indices must be contiguous 0..N-1")
    return Wavefront(tuple(rows[ch] for ch in range(len(rows))))
