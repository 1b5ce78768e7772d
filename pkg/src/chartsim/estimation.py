"""Parameter calibration from weekly sales data.

Covers the exact conditional-Gaussian likelihood of the mean-reverting step,
transition probabilities from regime sojourns, Poisson/binomial fits of the
singles-per-album histogram, the smoothed seasonal release hazard, the
release-peak memory fit, and Hurst exponent estimation.

All estimators are pure functions; censored weeks are excluded pairwise
rather than zero-filled, since zero-filling would drag drift estimates down.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .analytics import moving_average
from .core import (
    DataError,
    InsufficientDataError,
    Regime,
    ValidationError,
    WeeklySeries,
    regime_codes,
)
from .simulator import MemoryParams, SeasonalProfile

MIN_MR_PAIRS = 10


@dataclass(frozen=True)
class MrEstimate:
    """Maximum-likelihood estimate of the mean-reverting step constants."""

    a: float
    b: float
    s: float
    log_likelihood: float
    n_used: int
    n_excluded: int = 0


@dataclass(frozen=True)
class TransitionEstimate:
    """Per-week switching probabilities counted from a regime path.

    A probability is None when the path never visits the source state;
    states visited but never left are estimated 0 and flagged.
    """

    q12: float | None
    q22_exit: float | None
    weeks_base: int
    weeks_episode: int
    n_promotions: int
    n_exits: int
    low_confidence: tuple[str, ...] = ()


@dataclass(frozen=True)
class CountFit:
    """Poisson and binomial fits of a singles-per-album histogram."""

    poisson_lambda: float
    binomial_n: int
    binomial_theta: float
    poisson_log_likelihood: float
    binomial_log_likelihood: float


@dataclass(frozen=True)
class HurstEstimate:
    """Scaling exponent with the window sizes and statistics behind it."""

    h: float
    method: str
    window_sizes: np.ndarray
    statistics: np.ndarray


# --------------------------------------------------------------------------
# Mean-reversion MLE
# --------------------------------------------------------------------------


def _mr_pairs(
    series: WeeklySeries | np.ndarray,
    regime_mask: Sequence[bool] | np.ndarray | None,
    multiplicative: bool,
) -> tuple[np.ndarray, np.ndarray, int]:
    if isinstance(series, WeeklySeries):
        values = series.values
        censored = series.censored
    else:
        values = np.asarray(series, dtype=np.float64)
        censored = np.zeros(len(values), dtype=bool)
    n = len(values)
    if n < 2:
        raise InsufficientDataError("need at least two weeks of data")
    if censored.all():
        raise InsufficientDataError("all weeks are censored")
    mask = np.ones(n, dtype=bool) if regime_mask is None else np.asarray(regime_mask, dtype=bool)
    if len(mask) != n:
        raise ValidationError("regime mask length does not match the series")
    keep = mask & ~censored
    ok = keep[:-1] & keep[1:]
    if multiplicative:
        ok = ok & (values[:-1] > 0.0)
    excluded = int(np.count_nonzero(mask[:-1] & mask[1:])) - int(np.count_nonzero(ok))
    return values[:-1][ok], values[1:][ok], excluded


def estimate_mr_params(
    series: WeeklySeries | np.ndarray,
    regime_mask: Sequence[bool] | np.ndarray | None = None,
    noise_mode: str = "multiplicative",
) -> MrEstimate:
    """Fit (a, b, s) of the weekly step x' = x + a - b*x + noise by exact
    conditional maximum likelihood.

    The one-step density is Normal(a + (1-b)x, (s*x)^2) in multiplicative
    mode and Normal(a + (1-b)x, s^2) in additive mode, so (a, b) solve a
    weighted least-squares problem (weights 1/x^2 or 1) and s comes from the
    weighted residuals.  Pairs that enter or leave censored weeks, leave the
    requested regime, or start at x = 0 in multiplicative mode are excluded.
    """
    if noise_mode not in ("multiplicative", "additive"):
        raise ValidationError(f"unknown noise_mode {noise_mode!r}")
    multiplicative = noise_mode == "multiplicative"
    x, y, excluded = _mr_pairs(series, regime_mask, multiplicative)
    n = len(x)
    if n < MIN_MR_PAIRS:
        raise InsufficientDataError(
            f"only {n} usable transitions; need at least {MIN_MR_PAIRS}"
        )
    w = 1.0 / (x * x) if multiplicative else np.ones(n)
    sw = float(np.sum(w))
    sx = float(np.sum(w * x))
    sy = float(np.sum(w * y))
    sxx = float(np.sum(w * x * x))
    sxy = float(np.sum(w * x * y))
    det = sw * sxx - sx * sx
    if det <= 0 or float(np.var(x)) == 0.0:
        raise DataError("zero-variance input: drift and reversion rate are not identifiable")
    phi = (sw * sxy - sx * sy) / det
    a = (sy - phi * sx) / sw
    resid = y - a - phi * x
    s2 = float(np.sum(w * resid * resid)) / n
    s = math.sqrt(s2)
    if s2 == 0.0:
        log_lik = math.inf
    else:
        log_x_term = float(np.sum(np.log(x))) if multiplicative else 0.0
        log_lik = -0.5 * n * math.log(2.0 * math.pi * s2) - log_x_term - 0.5 * n
    return MrEstimate(a=a, b=1.0 - phi, s=s, log_likelihood=log_lik, n_used=n, n_excluded=excluded)


def mr_log_likelihood(
    series: WeeklySeries | np.ndarray,
    a: float,
    b: float,
    s: float,
    regime_mask: Sequence[bool] | np.ndarray | None = None,
    noise_mode: str = "multiplicative",
) -> float:
    """Exact conditional log-likelihood of given step constants."""
    multiplicative = noise_mode == "multiplicative"
    x, y, _ = _mr_pairs(series, regime_mask, multiplicative)
    sd = s * x if multiplicative else np.full(len(x), s)
    if np.any(sd <= 0):
        return -math.inf
    return float(np.sum(stats.norm.logpdf(y, loc=a + (1.0 - b) * x, scale=sd)))


# --------------------------------------------------------------------------
# Transition probabilities
# --------------------------------------------------------------------------


def estimate_transition_probs(
    regimes: Sequence | np.ndarray | Iterable[Sequence],
) -> TransitionEstimate:
    """Count per-week switching probabilities from one or more regime paths.

    q12 is promotions started per week spent in base; q22_exit is episodes
    ended per week spent promoting (popularity weeks included, since the
    exit hazard is shared).  Paths may be RegimeState sequences or integer
    codes; a list of paths is pooled.
    """
    first = regimes
    if isinstance(regimes, (list, tuple)) and regimes and isinstance(regimes[0], (list, tuple, np.ndarray)):
        paths = [regime_codes(r) for r in regimes]
    else:
        paths = [regime_codes(first)]
    weeks_base = weeks_episode = n12 = n_exit = 0
    for codes in paths:
        if np.any((codes < 0) | (codes > 2)):
            raise DataError("regime codes must be 0 (base), 1 (promotion) or 2 (popularity)")
        if len(codes) < 2:
            continue
        cur, nxt = codes[:-1], codes[1:]
        if np.any((cur == Regime.BASE) & (nxt == Regime.POPULARITY)):
            raise DataError("invalid path: popularity entered straight from base")
        base = cur == Regime.BASE
        weeks_base += int(np.count_nonzero(base))
        weeks_episode += int(np.count_nonzero(~base))
        n12 += int(np.count_nonzero(base & (nxt != Regime.BASE)))
        n_exit += int(np.count_nonzero(~base & (nxt == Regime.BASE)))
    if weeks_base == 0 and weeks_episode == 0:
        raise InsufficientDataError("no usable transitions in the regime path")
    flags = []
    q12 = None
    if weeks_base > 0:
        q12 = n12 / weeks_base
        if n12 == 0:
            flags.append("q12: no completed base sojourn")
    q22 = None
    if weeks_episode > 0:
        q22 = n_exit / weeks_episode
        if n_exit == 0:
            flags.append("q22_exit: no completed promotion sojourn")
    return TransitionEstimate(
        q12=q12,
        q22_exit=q22,
        weeks_base=weeks_base,
        weeks_episode=weeks_episode,
        n_promotions=n12,
        n_exits=n_exit,
        low_confidence=tuple(flags),
    )


# --------------------------------------------------------------------------
# Singles-per-album count fit
# --------------------------------------------------------------------------


def fit_singles_count(counts: Sequence[int], n_cap: int = 30) -> CountFit:
    """Fit the singles-per-album histogram with a Poisson and a binomial law.

    Poisson: lambda is the sample mean (closed-form MLE).  Binomial: profile
    likelihood over n from max(counts) to n_cap with theta = mean/n; ties go
    to the smaller n.
    """
    k = np.asarray(list(counts), dtype=np.int64)
    if len(k) == 0:
        raise InsufficientDataError("no albums")
    if np.any(k < 0):
        raise ValidationError("counts must be non-negative")
    lam = float(np.mean(k))
    if lam == 0.0:
        raise DataError("every album has zero singles; count fit is degenerate")
    pois_ll = float(np.sum(stats.poisson.logpmf(k, lam)))
    n_lo = max(1, int(k.max()))
    if n_cap < n_lo:
        raise ValidationError(f"n_cap {n_cap} is below the largest count {k.max()}")
    best = None
    for n in range(n_lo, n_cap + 1):
        theta = lam / n
        ll = float(np.sum(stats.binom.logpmf(k, n, theta)))
        if best is None or ll > best[0]:
            best = (ll, n, theta)
    binom_ll, binom_n, binom_theta = best
    return CountFit(
        poisson_lambda=lam,
        binomial_n=binom_n,
        binomial_theta=binom_theta,
        poisson_log_likelihood=pois_ll,
        binomial_log_likelihood=binom_ll,
    )


# --------------------------------------------------------------------------
# Seasonal release hazard
# --------------------------------------------------------------------------


def estimate_seasonal_profile(release_weeks: Sequence[int]) -> SeasonalProfile:
    """Seasonal release-intensity correction from observed release weeks.

    Builds the 52-bin week-of-year histogram, smooths it with the frame-3
    moving average (truncated at the year boundary, not circular, so a
    year-end discontinuity stays visible), and normalizes to mean one.
    """
    weeks = np.asarray(list(release_weeks), dtype=np.int64)
    if len(weeks) == 0:
        raise InsufficientDataError("no releases")
    if np.any((weeks < 1) | (weeks > 52)):
        raise ValidationError("release weeks must be week-of-year values in 1..52")
    hist = np.bincount(weeks - 1, minlength=52).astype(np.float64)
    smoothed = moving_average(hist, 3)
    return SeasonalProfile(smoothed / smoothed.mean())


# --------------------------------------------------------------------------
# Release-peak memory fit
# --------------------------------------------------------------------------


def _memory_prediction(prev_total: np.ndarray, s_c: float, s_s: float) -> np.ndarray:
    m = prev_total / s_c
    if s_s == 0.0:
        return np.maximum(m, 0.0)
    h = m / s_s
    return m * stats.norm.cdf(h) + s_s * stats.norm.pdf(h)


def successive_peak_pairs(
    episodes_by_artist: Mapping[str, Sequence[tuple[float, float]]] | Iterable[Sequence[tuple[float, float]]],
) -> np.ndarray:
    """Pool (previous episode total, next release peak) pairs per artist.

    Input is one (peak, episode_total) sequence per artist, in album order.
    """
    seqs = episodes_by_artist.values() if isinstance(episodes_by_artist, Mapping) else episodes_by_artist
    pairs = []
    for seq in seqs:
        seq = list(seq)
        for (peak_prev, total_prev), (peak_next, total_next) in zip(seq, seq[1:]):
            del peak_prev, total_next
            pairs.append((total_prev, peak_next))
    return np.asarray(pairs, dtype=np.float64).reshape(-1, 2)


def fit_memory_params(
    episodes_by_artist,
    s_c_grid: Sequence[float] | None = None,
    s_s_grid: Sequence[float] | None = None,
) -> MemoryParams:
    """Grid-search the peak-memory constants (s_c, s_s).

    Minimizes the mean squared error between observed next-album peaks and
    the zero-floored Gaussian prediction E[max(total/s_c + s_s*Z, 0)].
    Ties break toward smaller s_s, then smaller s_c.
    """
    pairs = successive_peak_pairs(episodes_by_artist)
    if len(pairs) == 0:
        raise InsufficientDataError("need at least one artist with two consecutive albums")
    s_c_values = np.arange(2.0, 30.5, 1.0) if s_c_grid is None else np.asarray(s_c_grid, dtype=np.float64)
    s_s_values = np.arange(0.0, 105.0, 5.0) if s_s_grid is None else np.asarray(s_s_grid, dtype=np.float64)
    if len(s_c_values) == 0 or len(s_s_values) == 0:
        raise ValidationError("memory-fit grids must be non-empty")
    prev_total, peaks = pairs[:, 0], pairs[:, 1]
    best = None
    for s_s in sorted(float(v) for v in s_s_values):
        for s_c in sorted(float(v) for v in s_c_values):
            pred = _memory_prediction(prev_total, s_c, s_s)
            mse = float(np.mean((peaks - pred) ** 2))
            if best is None or mse < best[0]:
                best = (mse, s_s, s_c)
    _, s_s, s_c = best
    return MemoryParams(s_c=s_c, s_s=s_s)


def memory_fit_mse(
    episodes_by_artist,
    mem: MemoryParams,
) -> float:
    """Mean squared error of a memory-parameter choice on observed pairs."""
    pairs = successive_peak_pairs(episodes_by_artist)
    if len(pairs) == 0:
        raise InsufficientDataError("need at least one artist with two consecutive albums")
    pred = _memory_prediction(pairs[:, 0], mem.s_c, mem.s_s)
    return float(np.mean((pairs[:, 1] - pred) ** 2))


# --------------------------------------------------------------------------
# Hurst exponent
# --------------------------------------------------------------------------


def _dyadic_windows(n: int, min_window: int, max_window: int | None) -> np.ndarray:
    hi = n // 4 if max_window is None else max_window
    if min_window < 4:
        raise ValidationError(f"min_window must be >= 4, got {min_window}")
    sizes = []
    w = min_window
    while w <= hi:
        sizes.append(w)
        w *= 2
    if len(sizes) < 2:
        raise InsufficientDataError(
            f"window range {min_window}..{hi} leaves fewer than two dyadic sizes"
        )
    return np.asarray(sizes, dtype=np.int64)


def estimate_hurst(
    series: Sequence[float] | np.ndarray,
    method: str = "rescaled_range",
    min_window: int = 8,
    max_window: int | None = None,
) -> HurstEstimate:
    """Long-memory scaling exponent by rescaled range or detrended
    fluctuation analysis.

    rescaled_range: mean R/S over non-overlapping blocks per dyadic window
    size, slope of log(R/S) against log(size).  Roughly 0.5 for white noise
    (with a known upward small-sample bias) and near 1 for walk-like input.

    dfa: order-1 detrended fluctuations of the cumulative profile, slope of
    log F(size).  0.5 for white noise; integrated noise scales steeper.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if len(x) < 64:
        raise InsufficientDataError(f"need at least 64 points, got {len(x)}")
    if float(np.ptp(x)) == 0.0:
        raise DataError("constant series: scaling exponent undefined")
    sizes = _dyadic_windows(len(x), min_window, max_window)
    if method == "rescaled_range":
        stats_per_size = _rescaled_range(x, sizes)
    elif method == "dfa":
        stats_per_size = _dfa(x, sizes)
    else:
        raise ValidationError(f"unknown method {method!r}; expected 'rescaled_range' or 'dfa'")
    ok = stats_per_size > 0
    if int(np.count_nonzero(ok)) < 2:
        raise DataError("degenerate fluctuation statistics; cannot fit a scaling law")
    slope = float(np.polyfit(np.log(sizes[ok]), np.log(stats_per_size[ok]), 1)[0])
    return HurstEstimate(h=slope, method=method, window_sizes=sizes, statistics=stats_per_size)


def _rescaled_range(x: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    out = np.zeros(len(sizes))
    for i, w in enumerate(sizes):
        nb = len(x) // w
        blocks = x[: nb * w].reshape(nb, w)
        dev = blocks - blocks.mean(axis=1, keepdims=True)
        z = np.cumsum(dev, axis=1)
        r = z.max(axis=1) - z.min(axis=1)
        s = blocks.std(axis=1)
        valid = s > 0
        if np.any(valid):
            out[i] = float(np.mean(r[valid] / s[valid]))
    return out


def _dfa(x: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    profile = np.cumsum(x - x.mean())
    out = np.zeros(len(sizes))
    for i, w in enumerate(sizes):
        nb = len(profile) // w
        blocks = profile[: nb * w].reshape(nb, w).T  # columns are blocks
        t = np.arange(w, dtype=np.float64)
        coef = np.polynomial.polynomial.polyfit(t, blocks, 1)
        fitted = coef[0] + np.outer(t, coef[1])
        resid = blocks - fitted
        out[i] = math.sqrt(float(np.mean(resid * resid)))
    return out


# --------------------------------------------------------------------------
# Regime labeling heuristics (plumbing for empirical data)
# --------------------------------------------------------------------------


def label_regimes(series: WeeklySeries, release_weeks: Sequence[int]) -> np.ndarray:
    """Heuristic promotion labels from release dates and chart presence.

    Each release opens a promotion regime that lasts until the end of the
    contiguous uncensored charting run containing it; everything else is
    base.  This is a pragmatic labeler for empirical inputs, not a fitted
    regime inference.
    """
    n = len(series)
    codes = np.zeros(n, dtype=np.int8)
    for week in release_weeks:
        i = int(week) - series.start_week
        if not 0 <= i < n:
            raise ValidationError(f"release week {week} outside the observed span")
        if series.censored[i]:
            warnings.warn(
                f"{series.artist_id}: release at week {week} falls on a censored week; skipped",
                stacklevel=2,
            )
            continue
        j = i
        while j < n and not series.censored[j]:
            j += 1
        codes[i:j] = Regime.PROMOTION
    return codes


def infer_release_weeks(series: WeeklySeries) -> list[int]:
    """Fallback release guess: the first week of each uncensored run."""
    releases = []
    prev_censored = True
    for i, censored in enumerate(series.censored):
        if not censored and prev_censored:
            releases.append(series.start_week + i)
        prev_censored = bool(censored)
    return releases
