"""Shared domain types: weekly calendar, sales series, model parameters and
the deterministic random-stream contract used by every other module.

All sales values are stored in k-units (1 k-unit = 1000 copies).  The weekly
calendar is a flat integer index; a :class:`CalendarOrigin` maps index 0 to a
(year, week-of-year) pair under a fixed 52-week-year convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

WEEKS_PER_YEAR = 52


class ChartSimError(Exception):
    """Base class for package errors."""


class ValidationError(ChartSimError):
    """Invalid parameters or configuration."""


class DataError(ChartSimError):
    """Malformed or unusable input data."""


class InsufficientDataError(ChartSimError):
    """Too little data for the requested estimate."""


# --------------------------------------------------------------------------
# Calendar
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CalendarOrigin:
    """Anchors global week index 0 to a (year, week-of-year) pair.

    Years are exactly 52 weeks long; week-of-year is always in 1..52.
    """

    year: int = 2003
    week: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.week <= WEEKS_PER_YEAR:
            raise ValidationError(f"origin week must be in 1..52, got {self.week}")

    def year_and_week(self, global_week: int) -> tuple[int, int]:
        shifted = global_week + self.week - 1
        return self.year + shifted // WEEKS_PER_YEAR, shifted % WEEKS_PER_YEAR + 1

    def global_week(self, year: int, week: int) -> int:
        if not 1 <= week <= WEEKS_PER_YEAR:
            raise ValidationError(f"week-of-year must be in 1..52, got {week}")
        return (year - self.year) * WEEKS_PER_YEAR + (week - self.week)


def week_of_year(global_week: int, origin: CalendarOrigin) -> int:
    """Week-of-year (1..52) of a global week index; periodic with period 52."""
    return origin.year_and_week(global_week)[1]


# --------------------------------------------------------------------------
# Series and panels
# --------------------------------------------------------------------------


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class WeeklySeries:
    """One artist's weekly sales trajectory in k-units with a censoring mask.

    ``censored[i]`` marks weeks where true sales fell below the chart
    threshold and were recorded as zero; such weeks always hold value 0.
    """

    artist_id: str
    start_week: int
    values: np.ndarray
    censored: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        censored = np.asarray(self.censored, dtype=bool)
        if values.ndim != 1 or censored.ndim != 1:
            raise ValidationError("values and censored must be one-dimensional")
        if len(values) != len(censored):
            raise ValidationError(
                f"{self.artist_id}: values and censored lengths differ "
                f"({len(values)} vs {len(censored)})"
            )
        if len(values) and not np.all(np.isfinite(values)):
            raise ValidationError(f"{self.artist_id}: non-finite sales value")
        if np.any(values < 0):
            raise ValidationError(f"{self.artist_id}: negative sales value")
        if np.any(values[censored] != 0.0):
            raise ValidationError(f"{self.artist_id}: censored week with nonzero value")
        object.__setattr__(self, "values", _as_readonly(values))
        object.__setattr__(self, "censored", _as_readonly(censored))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_week(self) -> int:
        """Global index one past the last observed week."""
        return self.start_week + len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeeklySeries):
            return NotImplemented
        return (
            self.artist_id == other.artist_id
            and self.start_week == other.start_week
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.censored, other.censored)
        )


@dataclass(frozen=True, eq=False)
class Panel:
    """A collection of weekly series aligned on one global calendar."""

    series: tuple[WeeklySeries, ...]
    origin: CalendarOrigin = field(default_factory=CalendarOrigin)

    def __post_init__(self) -> None:
        object.__setattr__(self, "series", tuple(self.series))

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def artist_ids(self) -> list[str]:
        return [s.artist_id for s in self.series]

    def total_sales(self) -> float:
        """Exact sum of all stored sales in k-units."""
        return math.fsum(math.fsum(s.values.tolist()) for s in self.series)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Panel):
            return NotImplemented
        return self.origin == other.origin and self.series == other.series


# --------------------------------------------------------------------------
# Regimes
# --------------------------------------------------------------------------


class Regime(IntEnum):
    BASE = 0
    PROMOTION = 1
    POPULARITY = 2


@dataclass(frozen=True)
class RegimeState:
    """Weekly regime label; the popularity sub-state carries the elevated
    reversion drift currently in force."""

    regime: Regime
    elevated_drift: float | None = None

    def __post_init__(self) -> None:
        if self.regime is Regime.POPULARITY and self.elevated_drift is None:
            raise ValidationError("popularity state requires elevated_drift")
        if self.regime is not Regime.POPULARITY and self.elevated_drift is not None:
            raise ValidationError("elevated_drift only applies to the popularity state")


def regime_codes(regimes: Sequence[RegimeState] | Iterable[int] | np.ndarray) -> np.ndarray:
    """Coerce regime labels (RegimeState objects or integer codes) to an int8 array."""
    seq = list(regimes) if not isinstance(regimes, np.ndarray) else regimes
    if len(seq) and isinstance(seq[0], RegimeState):
        return np.array([s.regime for s in seq], dtype=np.int8)
    return np.asarray(seq, dtype=np.int8)


# --------------------------------------------------------------------------
# Model parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Constants of the stationary sales process.

    a        base reversion drift, k-units/week
    b        mean-reversion rate, 1/week; the weekly Euler update is stable
             only for 0 < b < 1
    s        volatility; multiplies the current level in multiplicative mode
    q12      per-week probability of starting a promotion from base
    q22_exit per-week probability of a running promotion ending
    p        per-week single-release probability during promotion
    p_prime  per-single probability of the single reaching a general audience
    jump_mu, jump_sigma   log-normal parameters of the album release peak
    jump_scale            peak scale in raw copies (divided by 1000 so the
                          peak is expressed in k-units)
    spike_max             upper bound of the uniform single spike, k-units
    noise_mode            "multiplicative" (noise = s*x*Z) or "additive" (s*Z)
    """

    a: float = 1.16
    b: float = 0.2
    s: float = 0.25014
    q12: float = 1.0 / 97.9
    q22_exit: float = 1.0 / 33.1
    p: float = 0.1
    p_prime: float = 0.1007
    jump_mu: float = 1.2
    jump_sigma: float = 1.7
    jump_scale: float = 1000.0
    spike_max: float = 100.0
    noise_mode: str = "multiplicative"

    def __post_init__(self) -> None:
        for name in ("q12", "q22_exit", "p", "p_prime"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be a probability in [0, 1], got {value}")
        if self.s < 0:
            raise ValidationError(f"s must be non-negative, got {self.s}")
        if self.jump_sigma <= 0:
            raise ValidationError(f"jump_sigma must be positive, got {self.jump_sigma}")
        if self.jump_scale <= 0:
            raise ValidationError(f"jump_scale must be positive, got {self.jump_scale}")
        if self.spike_max <= 0:
            raise ValidationError(f"spike_max must be positive, got {self.spike_max}")
        if self.noise_mode not in ("multiplicative", "additive"):
            raise ValidationError(
                f"noise_mode must be 'multiplicative' or 'additive', got {self.noise_mode!r}"
            )
        if not 0.0 < self.b < 1.0:
            raise ValidationError(
                f"mean-reversion rate b={self.b} is outside (0, 1): the weekly update "
                f"x + a - b*x contracts toward a/b only for 0 < b < 1, so larger rates "
                f"make the discrete map explosive"
            )

    @property
    def jump_scale_k(self) -> float:
        """Release-peak scale in k-units."""
        return self.jump_scale / 1000.0

    @property
    def long_term_mean(self) -> float:
        return self.a / self.b


#: Published point estimates for the weekly model.  ``b`` fails the stability
#: guard on purpose: at b > 1 the weekly Euler map oscillates explosively, so
#: these values document the source estimates rather than a runnable preset.
AS_PUBLISHED_ESTIMATES: dict[str, float] = {"a": 1.16, "b": 267.512, "s": 0.25014}


def as_published_params(**overrides) -> ModelParams:
    """Build ModelParams from :data:`AS_PUBLISHED_ESTIMATES`.

    Raises ValidationError unless ``b`` is overridden with a stable value.
    """
    kwargs: dict = dict(AS_PUBLISHED_ESTIMATES)
    kwargs.update(overrides)
    return ModelParams(**kwargs)


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Wraps a counter-based Philox generator: identical keys replay the
    identical draw sequence, distinct stream ids are statistically
    independent, and streams may be created in any order.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        if self.stream_id < 0:
            raise ValidationError(f"stream_id must be non-negative, got {stream_id}")
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def clone(self) -> "RngStream":
        """Fresh stream at the start of the same draw sequence."""
        return RngStream(self.seed, self.stream_id)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def draw_normal(rng: RngStream) -> float:
    """One standard normal draw; advances the stream."""
    return float(rng.generator.standard_normal())


def draw_uniform(rng: RngStream, lo: float, hi: float) -> float:
    """One uniform draw on (lo, hi); advances the stream."""
    if not lo < hi:
        raise ValidationError(f"uniform bounds require lo < hi, got ({lo}, {hi})")
    return lo + (hi - lo) * float(rng.generator.random())


def draw_lognormal(rng: RngStream, mu: float, sigma: float) -> float:
    """One draw of exp(mu + sigma*Z) with Z standard normal."""
    if sigma <= 0:
        raise ValidationError(f"lognormal sigma must be positive, got {sigma}")
    return math.exp(mu + sigma * float(rng.generator.standard_normal()))
