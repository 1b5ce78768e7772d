"""Run configuration: one key-per-line text file shared by all commands.

Lines are ``key = value``; blank lines and ``#`` comments are ignored.
Unknown keys are rejected with the offending key named, and every value is
validated on load so command code never sees a half-valid config.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .core import CalendarOrigin, ModelParams, ValidationError
from .simulator import MemoryParams, SeasonalProfile


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    mode: str = "stationary"
    seasonal_profile: str = "autumn"
    memory: MemoryParams = field(default_factory=MemoryParams)
    n_artists: int = 30
    horizon_weeks: int = 520
    origin: CalendarOrigin = field(default_factory=CalendarOrigin)
    seed: int = 0
    outputs: Path = Path("out")
    max_lag: int = 200
    bin_width: int = 4

    def __post_init__(self) -> None:
        if self.mode not in ("stationary", "nonstationary"):
            raise ValidationError(f"mode must be stationary or nonstationary, got {self.mode!r}")
        if self.n_artists < 1:
            raise ValidationError(f"cohort.n_artists must be >= 1, got {self.n_artists}")
        if self.horizon_weeks < 0:
            raise ValidationError(f"cohort.horizon_weeks must be >= 0, got {self.horizon_weeks}")
        if self.max_lag < 0:
            raise ValidationError(f"analysis.max_lag must be >= 0, got {self.max_lag}")
        if self.bin_width < 1:
            raise ValidationError(f"analysis.bin_width must be >= 1, got {self.bin_width}")

    def resolve_profile(self) -> SeasonalProfile:
        """Materialize the seasonal profile named in the config."""
        name = self.seasonal_profile
        if name == "uniform":
            return SeasonalProfile.uniform()
        if name == "autumn":
            return SeasonalProfile.autumn_default()
        from .ingestion import parse_profile_file

        return parse_profile_file(name)


_MODEL_KEYS = {
    "model.a": ("a", float),
    "model.b": ("b", float),
    "model.s": ("s", float),
    "model.q12": ("q12", float),
    "model.q22_exit": ("q22_exit", float),
    "model.p": ("p", float),
    "model.p_prime": ("p_prime", float),
    "model.jump_mu": ("jump_mu", float),
    "model.jump_sigma": ("jump_sigma", float),
    "model.jump_scale": ("jump_scale", float),
    "model.spike_max": ("spike_max", float),
    "model.noise_mode": ("noise_mode", str),
}

_TOP_KEYS = {
    "mode": ("mode", str),
    "seasonal.profile": ("seasonal_profile", str),
    "memory.s_c": ("memory_s_c", float),
    "memory.s_s": ("memory_s_s", float),
    "cohort.n_artists": ("n_artists", int),
    "cohort.horizon_weeks": ("horizon_weeks", int),
    "calendar.origin_year": ("origin_year", int),
    "calendar.origin_week": ("origin_week", int),
    "seed": ("seed", int),
    "outputs": ("outputs", str),
    "analysis.max_lag": ("max_lag", int),
    "analysis.bin_width": ("bin_width", int),
}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    model_kwargs: dict = {}
    top: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _MODEL_KEYS:
            name, cast = _MODEL_KEYS[key]
            bucket, field_name = model_kwargs, name
        elif key in _TOP_KEYS:
            name, cast = _TOP_KEYS[key]
            bucket, field_name = top, name
        else:
            raise ValidationError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            bucket[field_name] = cast(value)
        except ValueError as exc:
            raise ValidationError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc

    try:
        model = ModelParams(**model_kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{source}: model: {exc}") from exc
    memory_defaults = MemoryParams()
    memory = MemoryParams(
        s_c=top.pop("memory_s_c", memory_defaults.s_c),
        s_s=top.pop("memory_s_s", memory_defaults.s_s),
    )
    origin_defaults = CalendarOrigin()
    origin = CalendarOrigin(
        year=top.pop("origin_year", origin_defaults.year),
        week=top.pop("origin_week", origin_defaults.week),
    )
    if "outputs" in top:
        top["outputs"] = Path(top["outputs"])
    return RunConfig(model=model, memory=memory, origin=origin, **top)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Replace config fields with any non-None keyword values (CLI flags)."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return config
    valid = {f.name for f in fields(RunConfig)}
    unknown = set(updates) - valid
    if unknown:
        raise ValidationError(f"unknown config overrides: {sorted(unknown)}")
    return replace(config, **updates)


def config_template() -> str:
    """The documented config schema with package defaults."""
    params = ModelParams()
    memory = MemoryParams()
    origin = CalendarOrigin()
    return f"""\
# chartsim run configuration: one 'key = value' per line, '#' comments.
# Flags given on the command line override these keys.

# Weekly sales process.  The update x + a - b*x is stable only for
# 0 < b < 1; configs outside that range are rejected up front.
model.a = {params.a}
model.b = {params.b}
model.s = {params.s}
model.q12 = {params.q12!r}
model.q22_exit = {params.q22_exit!r}
model.p = {params.p}
model.p_prime = {params.p_prime}
model.jump_mu = {params.jump_mu}
model.jump_sigma = {params.jump_sigma}
model.jump_scale = {params.jump_scale}
model.spike_max = {params.spike_max}
model.noise_mode = {params.noise_mode}   # multiplicative | additive

# stationary: constant release hazard.  nonstationary: seasonal hazard
# plus release-peak memory.
mode = stationary

# uniform | autumn | path to a week,c file (52 rows)
seasonal.profile = autumn
memory.s_c = {memory.s_c}
memory.s_s = {memory.s_s}

cohort.n_artists = 30
cohort.horizon_weeks = 520
calendar.origin_year = {origin.year}
calendar.origin_week = {origin.week}

seed = 0
outputs = out

analysis.max_lag = 200
analysis.bin_width = 4
"""
