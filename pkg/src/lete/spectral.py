"""Spectral entropy of event-time sequences.

Pipeline per node: min-max normalise the timestamps (or inter-event gaps),
zero-pad to a power of two, take an iterative radix-2 FFT, keep the one-sided
magnitudes, drop the DC bin, normalise to a distribution and take its Shannon
entropy in nats. Low entropy indicates periodic structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EventSequence:
    times: np.ndarray
    node_id: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)

    def __len__(self) -> int:
        return self.times.size


@dataclass
class SpectralReport:
    entropy: float
    n_bins: int
    distribution: np.ndarray = field(repr=False)


def normalize_times(times) -> np.ndarray:
    """Affine map sending the minimum to 0 and the maximum to 1."""
    if isinstance(times, EventSequence):
        times = times.times
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two timestamps to normalise")
    lo, hi = times.min(), times.max()
    if not hi > lo:
        raise ValueError("all timestamps are equal; cannot normalise a zero range")
    return (times - lo) / (hi - lo)


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=int)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_radix2(signal) -> np.ndarray:
    """Iterative decimation-in-time FFT; the length must be a power of two."""
    a = np.asarray(signal, dtype=complex)
    n = a.size
    if n < 1 or n & (n - 1):
        raise ValueError(f"radix-2 FFT needs a power-of-two length, got {n}")
    a = a[_bit_reverse_permutation(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(-1, size)
        even = blocks[:, :half].copy()
        odd = blocks[:, half:] * twiddle
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        a = blocks.reshape(-1)
        size *= 2
    return a


def dft_magnitude(signal) -> np.ndarray:
    """One-sided DFT magnitudes ``|X(f)|`` for bins ``0..N/2`` after zero-padding to ``N = 2^k``.

    Bin 0 (DC) is included here; the entropy pipeline drops it.
    """
    x = np.asarray(signal, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    n = next_pow2(x.size)
    padded = np.zeros(n)
    padded[: x.size] = x
    return np.abs(fft_radix2(padded))[: n // 2 + 1]


def spectral_entropy(magnitudes) -> SpectralReport:
    """Shannon entropy (nats) of ``magnitudes / sum(magnitudes)`` with ``0 log 0 = 0``."""
    m = np.asarray(magnitudes, dtype=float)
    if m.size == 0 or np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValueError("magnitudes must be a non-empty vector of finite non-negative values")
    total = m.sum()
    if not total > 0:
        raise ValueError("all magnitudes are zero; the distribution is undefined")
    p = m / total
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return SpectralReport(max(entropy, 0.0), m.size, p)


def binned_counts(times, n_bins: int = 64) -> np.ndarray:
    """Event counts on ``n_bins`` equal-width bins over the normalised time range."""
    t = normalize_times(times)
    counts, _ = np.histogram(t, bins=n_bins, range=(0.0, 1.0))
    return counts.astype(float)


def analyze_sequence(seq, use_diffs: bool = False, mode: str = "values", n_bins: int = 64) -> SpectralReport:
    """Spectral entropy of one node's events.

    ``mode="values"`` feeds the normalised timestamps (or gaps, with
    ``use_diffs``) straight into the FFT as the signal; ``mode="binned"``
    uses event counts on a uniform grid instead.
    """
    times = seq.times if isinstance(seq, EventSequence) else np.asarray(seq, dtype=float)
    times = np.sort(times)
    if use_diffs:
        times = np.diff(times)
    if mode == "values":
        signal = normalize_times(times)
    elif mode == "binned":
        signal = binned_counts(times, n_bins)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return spectral_entropy(dft_magnitude(signal)[1:])


def analyze_batch(sequences, use_diffs: bool = False, mode: str = "values") -> list[tuple[str, int, float]]:
    """``(node_id, n_events, entropy)`` rows; nodes whose signal is degenerate are skipped."""
    rows = []
    for seq in sequences:
        try:
            report = analyze_sequence(seq, use_diffs=use_diffs, mode=mode)
        except ValueError:
            continue
        rows.append((seq.node_id, len(seq), report.entropy))
    return rows
