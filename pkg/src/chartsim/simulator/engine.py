"""Trajectory simulation for the two-regime sales process.

Weekly update order is fixed: (1) regime transition from the current state's
row, (2) album release jump on a base-to-promotion switch, (3) single release
and popularity entry while promoting, (4) popularity exit on the next single,
(5) mean-reverting diffusion step with the drift currently in force, floored
at zero.  The release peak therefore lands in the release week itself.

The inner loop runs in a compiled kernel when the extension built, with a
pure-Python fallback selected at import; both consume the same pre-drawn
variate blocks and produce bit-identical trajectories.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..core import (
    CalendarOrigin,
    ModelParams,
    Panel,
    Regime,
    RegimeState,
    RngStream,
    ValidationError,
    WeeklySeries,
    week_of_year,
)
from . import _kernel_py

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:
    _kernel = None

#: Number of uniform / normal columns each engine consumes per week.
UNIFORMS_PER_WEEK = 6
NORMALS_PER_WEEK = 2


def compiled_kernel_available() -> bool:
    return _kernel is not None


def default_engine() -> str:
    """Engine selected at import: "compiled" when the extension is present
    and CHARTSIM_PURE_PYTHON is unset, else "python"."""
    if _kernel is None or os.environ.get("CHARTSIM_PURE_PYTHON"):
        return "python"
    return "compiled"


def _resolve_kernel(engine: str | None):
    name = engine or default_engine()
    if name == "compiled":
        if _kernel is None:
            raise ValidationError("compiled kernel requested but the extension is not built")
        return _kernel, "compiled"
    if name == "python":
        return _kernel_py, "python"
    raise ValidationError(f"unknown engine {name!r}; expected 'compiled' or 'python'")


# --------------------------------------------------------------------------
# Simulation-side domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AlbumRelease:
    """Album release: the week's added peak and the running album index."""

    week: int
    album_index: int
    peak_value: float


@dataclass(frozen=True)
class SingleRelease:
    """Single release during a promotion episode; success marks the singles
    that push the album into the popularity sub-state."""

    week: int
    success: bool


SimEvent = AlbumRelease | SingleRelease


@dataclass(frozen=True, eq=False)
class SeasonalProfile:
    """52-entry release-intensity correction, one weight per week-of-year.

    The simulator scales the base-to-promotion hazard by c(week)/mean(c), so
    only the shape matters; profiles built from data are normalized to mean 1.
    """

    c: np.ndarray
    mean_c: float = field(init=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=np.float64)
        if c.shape != (52,):
            raise ValidationError(f"seasonal profile needs 52 weekly entries, got {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValidationError("seasonal profile entries must be finite and non-negative")
        mean = float(np.mean(c))
        if mean <= 0:
            raise ValidationError("seasonal profile must have positive mean")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mean_c", mean)

    @classmethod
    def uniform(cls) -> "SeasonalProfile":
        return cls(np.ones(52))

    @classmethod
    def autumn_default(cls) -> "SeasonalProfile":
        """Release intensity three times higher in weeks 36..48 than in the
        rest of the year, the package's default non-stationary profile."""
        c = np.ones(52)
        c[35:48] = 3.0
        return cls(c)

    def relative(self) -> np.ndarray:
        """c / mean(c); multiplies the weekly hazard."""
        return self.c / self.mean_c

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeasonalProfile):
            return NotImplemented
        return np.array_equal(self.c, other.c)


@dataclass(frozen=True)
class MemoryParams:
    """Release-peak memory: the peak of album i > 1 is the previous episode
    total scaled by 1/s_c plus Gaussian noise of level s_s, floored at zero.

    Defaults are config placeholders meant to be replaced by a fitted value.
    """

    s_c: float = 10.0
    s_s: float = 50.0

    def __post_init__(self) -> None:
        if self.s_c <= 0:
            raise ValidationError(f"s_c must be positive, got {self.s_c}")
        if self.s_s < 0:
            raise ValidationError(f"s_s must be non-negative, got {self.s_s}")


@dataclass(eq=False)
class SimulationOutput:
    """One simulated trajectory with its regime path and event log."""

    series: WeeklySeries
    regime_codes: np.ndarray
    drift: np.ndarray
    events: list[SimEvent]
    metadata: dict

    def __post_init__(self) -> None:
        if len(self.regime_codes) != len(self.series.values):
            raise ValidationError("regime path and trajectory lengths differ")

    @cached_property
    def regimes(self) -> tuple[RegimeState, ...]:
        out = []
        for code, a_t in zip(self.regime_codes, self.drift):
            regime = Regime(int(code))
            if regime is Regime.POPULARITY:
                out.append(RegimeState(regime, float(a_t)))
            else:
                out.append(RegimeState(regime))
        return tuple(out)

    def release_weeks(self) -> list[int]:
        return [e.week for e in self.events if isinstance(e, AlbumRelease)]

    def singles(self) -> list[SingleRelease]:
        return [e for e in self.events if isinstance(e, SingleRelease)]


@dataclass(frozen=True)
class EpisodeSummary:
    """One promotion episode: release peak, weekly-sales total over the
    episode, and whether the episode ended within the simulated horizon."""

    album_index: int
    release_week: int
    peak: float
    total: float
    n_weeks: int
    completed: bool


# --------------------------------------------------------------------------
# Elementary operations
# --------------------------------------------------------------------------


def step_base(x: float, params: ModelParams, rng: RngStream, drift: float | None = None) -> float:
    """One weekly Euler step of the mean-reverting walk, floored at zero."""
    if x < 0:
        raise ValidationError(f"sales level must be non-negative, got {x}")
    z = float(rng.generator.standard_normal())
    a_t = params.a if drift is None else drift
    if params.noise_mode == "multiplicative":
        nxt = x + a_t - params.b * x + params.s * x * z
    else:
        nxt = x + a_t - params.b * x + params.s * z
    return nxt if nxt > 0.0 else 0.0


def draw_release_jump(params: ModelParams, rng: RngStream) -> float:
    """Album-release jump in k-units: long-tailed log-normal peak plus the
    uniform first-single spike.  Consumes one normal then one uniform draw."""
    peak = params.jump_scale_k * math.exp(
        params.jump_mu + params.jump_sigma * float(rng.generator.standard_normal())
    )
    return peak + float(rng.generator.random()) * params.spike_max


def draw_single_spike(params: ModelParams, rng: RngStream) -> float:
    """Uniform single-release spike on (0, spike_max), in k-units."""
    return float(rng.generator.random()) * params.spike_max


def draw_peak_memory(
    album_index: int,
    prev_total: float,
    mem: MemoryParams,
    params: ModelParams,
    rng: RngStream,
) -> float:
    """Release peak under sale memory: the first album draws the log-normal
    peak, later albums scale the previous episode total, floored at zero."""
    if album_index < 1:
        raise ValidationError(f"album_index must be >= 1, got {album_index}")
    z = float(rng.generator.standard_normal())
    if album_index == 1:
        return params.jump_scale_k * math.exp(params.jump_mu + params.jump_sigma * z)
    if prev_total < 0:
        raise ValidationError(f"prev_total must be non-negative, got {prev_total}")
    peak = prev_total / mem.s_c + mem.s_s * z
    return peak if peak > 0.0 else 0.0


# --------------------------------------------------------------------------
# Trajectory simulation
# --------------------------------------------------------------------------


def _effective_hazard(params: ModelParams, profile: SeasonalProfile | None) -> tuple[np.ndarray, int]:
    if profile is None:
        return np.full(52, params.q12), 0
    hazard = params.q12 * profile.relative()
    clamped = int(np.count_nonzero(hazard > 1.0))
    return np.clip(hazard, 0.0, 1.0), clamped


def _run(
    params: ModelParams,
    profile: SeasonalProfile | None,
    mem: MemoryParams | None,
    horizon_weeks: int,
    rng: RngStream,
    x0: float | None,
    origin: CalendarOrigin,
    artist_id: str,
    engine: str | None,
) -> SimulationOutput:
    if horizon_weeks < 0:
        raise ValidationError(f"horizon_weeks must be non-negative, got {horizon_weeks}")
    kernel, engine_name = _resolve_kernel(engine)
    hazard, clamped = _effective_hazard(params, profile)
    if clamped:
        warnings.warn(
            f"seasonal hazard exceeds 1 in {clamped} week(s) of the year; clamped",
            stacklevel=3,
        )
    start = params.long_term_mean if x0 is None else float(x0)
    if start < 0:
        raise ValidationError(f"x0 must be non-negative, got {x0}")

    u = rng.generator.random((horizon_weeks, UNIFORMS_PER_WEEK))
    z = rng.generator.standard_normal((horizon_weeks, NORMALS_PER_WEEK))
    memory_mode = mem is not None
    values, codes, drift, raw_events = kernel.run_weekly_loop(
        u,
        z,
        start,
        params.a,
        params.b,
        params.s,
        params.noise_mode == "multiplicative",
        hazard,
        origin.week - 1,
        params.q22_exit,
        params.p,
        params.p_prime,
        params.jump_mu,
        params.jump_sigma,
        params.jump_scale_k,
        params.spike_max,
        memory_mode,
        mem.s_c if memory_mode else 1.0,
        mem.s_s if memory_mode else 0.0,
    )

    events: list[SimEvent] = []
    for week, kind, album, value, flag in raw_events:
        if kind == _kernel_py.EV_ALBUM:
            events.append(AlbumRelease(week, album, value))
        else:
            events.append(SingleRelease(week, bool(flag)))

    series = WeeklySeries(
        artist_id=artist_id,
        start_week=0,
        values=values,
        censored=np.zeros(horizon_weeks, dtype=bool),
    )
    metadata = {
        "engine": engine_name,
        "mode": "nonstationary" if (profile is not None or memory_mode) else "stationary",
        "clamped_weeks": clamped,
        "seed": rng.seed,
        "stream_id": rng.stream_id,
    }
    return SimulationOutput(series, codes, drift, events, metadata)


def simulate_stationary(
    params: ModelParams,
    horizon_weeks: int,
    rng: RngStream,
    *,
    x0: float | None = None,
    origin: CalendarOrigin | None = None,
    artist_id: str = "sim",
    engine: str | None = None,
) -> SimulationOutput:
    """Simulate the constant-hazard process for ``horizon_weeks`` weeks."""
    return _run(
        params, None, None, horizon_weeks, rng, x0, origin or CalendarOrigin(), artist_id, engine
    )


def simulate_nonstationary(
    params: ModelParams,
    profile: SeasonalProfile,
    mem: MemoryParams,
    horizon_weeks: int,
    rng: RngStream,
    *,
    x0: float | None = None,
    origin: CalendarOrigin | None = None,
    artist_id: str = "sim",
    engine: str | None = None,
) -> SimulationOutput:
    """Simulate with seasonal release hazard and release-peak memory."""
    return _run(
        params, profile, mem, horizon_weeks, rng, x0, origin or CalendarOrigin(), artist_id, engine
    )


def simulate_cohort(
    params: ModelParams,
    n_artists: int,
    horizon_weeks: int,
    seed: int,
    *,
    profile: SeasonalProfile | None = None,
    mem: MemoryParams | None = None,
    origin: CalendarOrigin | None = None,
    engine: str | None = None,
) -> tuple[Panel, list[SimulationOutput]]:
    """Simulate n_artists independent trajectories on one calendar.

    Artist i uses stream (seed, i), so cohorts are reproducible and members
    are independent regardless of evaluation order.  Passing a profile (and
    optionally memory parameters) switches to the non-stationary engine.
    """
    if n_artists < 1:
        raise ValidationError(f"n_artists must be >= 1, got {n_artists}")
    origin = origin or CalendarOrigin()
    if profile is not None and mem is None:
        mem = MemoryParams()
    width = max(3, len(str(n_artists - 1)))
    outputs = []
    for i in range(n_artists):
        outputs.append(
            _run(
                params,
                profile,
                mem,
                horizon_weeks,
                RngStream(seed, i),
                None,
                origin,
                f"artist_{i:0{width}d}",
                engine,
            )
        )
    panel = Panel(tuple(o.series for o in outputs), origin)
    return panel, outputs


# --------------------------------------------------------------------------
# Episode extraction and run summaries
# --------------------------------------------------------------------------


def episode_summaries(output: SimulationOutput) -> list[EpisodeSummary]:
    """Promotion episodes of one trajectory, in release order.

    An episode spans the release week through the week before promotion
    ends; its total is the sum of recorded weekly sales over that span.
    """
    codes = output.regime_codes
    values = output.series.values
    releases = {e.week: e for e in output.events if isinstance(e, AlbumRelease)}
    episodes: list[EpisodeSummary] = []
    n = len(codes)
    t = 0
    while t < n:
        if codes[t] == Regime.BASE:
            t += 1
            continue
        start = t
        while t < n and codes[t] != Regime.BASE:
            t += 1
        release = releases.get(start)
        if release is None:
            # episode begun before the simulated window; skip
            continue
        episodes.append(
            EpisodeSummary(
                album_index=release.album_index,
                release_week=start,
                peak=release.peak_value,
                total=float(np.sum(values[start:t])),
                n_weeks=t - start,
                completed=t < n,
            )
        )
    return episodes


def release_week_of_year(outputs: Sequence[SimulationOutput], origin: CalendarOrigin) -> np.ndarray:
    """Week-of-year (1..52) of every album release across a cohort."""
    weeks = []
    for out in outputs:
        for w in out.release_weeks():
            weeks.append(week_of_year(out.series.start_week + w, origin))
    return np.asarray(weeks, dtype=np.int64)


def cohort_summary(outputs: Sequence[SimulationOutput]) -> dict:
    """Headline statistics of a simulated cohort.

    Episode lengths use completed episodes only; per-album rates divide by
    the total number of releases.
    """
    episodes = [ep for out in outputs for ep in episode_summaries(out)]
    completed = [ep for ep in episodes if ep.completed]
    n_albums = sum(len(out.release_weeks()) for out in outputs)
    singles = [e for out in outputs for e in out.singles()]
    gaps: list[int] = []
    for out in outputs:
        weeks = out.release_weeks()
        gaps.extend(np.diff(weeks).tolist())
    clamped = max((out.metadata.get("clamped_weeks", 0) for out in outputs), default=0)
    return {
        "n_artists": len(outputs),
        "n_albums": n_albums,
        "n_completed_episodes": len(completed),
        "mean_promotion_weeks": float(np.mean([ep.n_weeks for ep in completed])) if completed else math.nan,
        "mean_release_interval": float(np.mean(gaps)) if gaps else math.nan,
        "singles_per_album": len(singles) / n_albums if n_albums else math.nan,
        "popularity_entries_per_album": (
            sum(1 for s in singles if s.success) / n_albums if n_albums else math.nan
        ),
        "clamped_weeks": clamped,
    }
