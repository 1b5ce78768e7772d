"""chartsim: simulation, calibration and diagnostics for weekly sales charts."""

from .core import (
    AS_PUBLISHED_ESTIMATES,
    CalendarOrigin,
    ChartSimError,
    DataError,
    InsufficientDataError,
    ModelParams,
    Panel,
    Regime,
    RegimeState,
    RngStream,
    ValidationError,
    WeeklySeries,
    as_published_params,
    draw_lognormal,
    draw_normal,
    draw_uniform,
    week_of_year,
)
from .simulator import (
    AlbumRelease,
    MemoryParams,
    SeasonalProfile,
    SimulationOutput,
    SingleRelease,
    simulate_cohort,
    simulate_nonstationary,
    simulate_stationary,
)

__version__ = "0.1.0"

__all__ = [
    "AS_PUBLISHED_ESTIMATES",
    "AlbumRelease",
    "CalendarOrigin",
    "ChartSimError",
    "DataError",
    "InsufficientDataError",
    "MemoryParams",
    "ModelParams",
    "Panel",
    "Regime",
    "RegimeState",
    "RngStream",
    "SeasonalProfile",
    "SimulationOutput",
    "SingleRelease",
    "ValidationError",
    "WeeklySeries",
    "as_published_params",
    "draw_lognormal",
    "draw_normal",
    "draw_uniform",
    "simulate_cohort",
    "simulate_nonstationary",
    "simulate_stationary",
    "week_of_year",
    "__version__",
]
