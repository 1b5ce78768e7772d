"""Time-series diagnostics: autocorrelation, periodogram, release intervals,
week-of-year aggregation, moving average and the seasonal peak ratio.

Censored weeks enter these diagnostics as zeros; callers that need them
excluded should filter beforehand.  Every function is pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import DataError, Panel, ValidationError, week_of_year


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided power spectrum on frequencies 0..0.5 cycles/week.

    Power is scaled so that its sum equals n times the biased sample
    variance of the input (discrete Parseval identity).
    """

    frequencies: np.ndarray
    power: np.ndarray

    def __post_init__(self) -> None:
        if len(self.frequencies) != len(self.power):
            raise ValidationError("frequencies and power lengths differ")
        if np.any(np.diff(self.frequencies) <= 0):
            raise ValidationError("frequencies must be strictly increasing")

    def dominant_frequency(self) -> float:
        """Frequency of maximal power, excluding the zero-frequency bin."""
        idx = 1 + int(np.argmax(self.power[1:]))
        return float(self.frequencies[idx])


@dataclass(frozen=True, eq=False)
class WeekOfYearAggregate:
    """Total sales per week-of-year, raw and frame-3 smoothed."""

    raw: np.ndarray
    smoothed: np.ndarray
    censored_weeks: int = 0

    def __post_init__(self) -> None:
        if self.raw.shape != (52,) or self.smoothed.shape != (52,):
            raise ValidationError("aggregates must have 52 weekly entries")


@dataclass(frozen=True, eq=False)
class IntervalHistogram:
    """Pooled inter-release gaps with a fixed-width binning."""

    gaps: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray

    def modal_bin(self) -> tuple[float, float]:
        i = int(np.argmax(self.counts))
        return float(self.bin_edges[i]), float(self.bin_edges[i + 1])


def acf(series: Sequence[float] | np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelation r(0..max_lag) with the biased normalization
    r(k) = sum_t (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2, so r(0) = 1 and
    |r(k)| <= 1."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if not 0 <= max_lag < len(x):
        raise ValidationError(f"need 0 <= max_lag < len(series), got {max_lag} for {len(x)}")
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise DataError("zero variance: autocorrelation undefined for a constant series")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(d[:-k], d[k:])) / denom
    return out


def periodogram(series: Sequence[float] | np.ndarray) -> Spectrum:
    """Mean-removed one-sided periodogram.

    The conjugate-symmetric half of the spectrum is folded in, so the total
    power equals n times the biased sample variance exactly.
    """
    x = np.asarray(series, dtype=np.float64)
    if len(x) < 8:
        raise DataError(f"periodogram needs at least 8 points, got {len(x)}")
    n = len(x)
    d = x - x.mean()
    f = np.fft.rfft(d)
    power = np.abs(f) ** 2 / n
    # fold in the negative-frequency half (all bins except 0 and Nyquist)
    inner = slice(1, -1) if n % 2 == 0 else slice(1, None)
    power[inner] *= 2.0
    return Spectrum(np.fft.rfftfreq(n), power)


def moving_average(values: Sequence[float] | np.ndarray, frame: int) -> np.ndarray:
    """Centered moving average with an odd frame; windows truncate at the
    boundaries (no wraparound) and divide by the actual window size."""
    x = np.asarray(values, dtype=np.float64)
    if frame % 2 != 1:
        raise ValidationError(f"frame must be odd, got {frame}")
    if not 1 <= frame <= len(x):
        raise ValidationError(f"need 1 <= frame <= len(values), got {frame} for {len(x)}")
    kernel = np.ones(frame)
    sums = np.convolve(x, kernel, mode="same")
    counts = np.convolve(np.ones(len(x)), kernel, mode="same")
    return sums / counts


def release_intervals(
    release_weeks_by_artist: Mapping[str, Sequence[int]],
    bin_width: int = 4,
) -> IntervalHistogram:
    """Pool per-artist consecutive release gaps into one histogram."""
    if bin_width < 1:
        raise ValidationError(f"bin_width must be >= 1, got {bin_width}")
    gaps: list[int] = []
    for weeks in release_weeks_by_artist.values():
        ordered = sorted(weeks)
        gaps.extend(int(b - a) for a, b in zip(ordered, ordered[1:]))
    if not gaps:
        warnings.warn("no artist has two releases; interval histogram is empty", stacklevel=2)
        return IntervalHistogram(
            gaps=np.array([], dtype=np.int64),
            bin_edges=np.array([0.0, float(bin_width)]),
            counts=np.array([0], dtype=np.int64),
        )
    arr = np.asarray(sorted(gaps), dtype=np.int64)
    top = (int(arr.max()) // bin_width + 1) * bin_width
    edges = np.arange(0, top + bin_width, bin_width, dtype=np.float64)
    counts, _ = np.histogram(arr, bins=edges)
    return IntervalHistogram(arr, edges, counts.astype(np.int64))


def aggregate_week_of_year(panel: Panel) -> WeekOfYearAggregate:
    """Sum sales per week-of-year across all artists and years; censored
    weeks count as zeros and are tallied in the report."""
    if not len(panel):
        raise DataError("empty panel")
    raw = np.zeros(52)
    censored = 0
    for s in panel:
        censored += int(np.count_nonzero(s.censored))
        for i, v in enumerate(s.values):
            raw[week_of_year(s.start_week + i, panel.origin) - 1] += v
    return WeekOfYearAggregate(raw, moving_average(raw, 3), censored)


def peak_to_base_ratio(
    agg: WeekOfYearAggregate,
    peak_weeks: tuple[int, int] = (45, 52),
    base_weeks: tuple[int, int] = (10, 40),
) -> float:
    """Seasonal peak height as a percentage of the typical level: max of the
    smoothed aggregate over the peak window divided by its median over the
    base window, times 100."""
    lo, hi = peak_weeks
    blo, bhi = base_weeks
    if not (1 <= lo <= hi <= 52 and 1 <= blo <= bhi <= 52):
        raise ValidationError("window bounds must lie in 1..52")
    peak = float(np.max(agg.smoothed[lo - 1 : hi]))
    base = float(np.median(agg.smoothed[blo - 1 : bhi]))
    if base == 0.0:
        raise DataError("zero base level: peak ratio undefined")
    return 100.0 * peak / base
