from .engine import (
    AlbumRelease,
    EpisodeSummary,
    MemoryParams,
    SeasonalProfile,
    SimEvent,
    SimulationOutput,
    SingleRelease,
    cohort_summary,
    compiled_kernel_available,
    default_engine,
    draw_peak_memory,
    draw_release_jump,
    draw_single_spike,
    episode_summaries,
    release_week_of_year,
    simulate_cohort,
    simulate_nonstationary,
    simulate_stationary,
    step_base,
)

__all__ = [
    "AlbumRelease",
    "EpisodeSummary",
    "MemoryParams",
    "SeasonalProfile",
    "SimEvent",
    "SimulationOutput",
    "SingleRelease",
    "cohort_summary",
    "compiled_kernel_available",
    "default_engine",
    "draw_peak_memory",
    "draw_release_jump",
    "draw_single_spike",
    "episode_summaries",
    "release_week_of_year",
    "simulate_cohort",
    "simulate_nonstationary",
    "simulate_stationary",
    "step_base",
]
