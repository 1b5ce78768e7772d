"""Chart-file parsing and tabular export.

The input format is a UTF-8 comma-separated file with header

    artist_id,year,week,sales_units[,threshold]

one row per charting week, sales in raw copies.  Weeks run 1..52; week-53
rows are folded into week 52 with a logged notice.  Stored values are
k-units (raw / 1000).  Missing weeks inside an artist's span and explicit
zero rows are censored: the chart only reports sales above a threshold, so
a zero means "below threshold", not "no sales".

All exports are comma-separated UTF-8 text with LF line endings, dot
decimal separators, floats at 9 significant digits, and deterministic row
order (artist, then week).
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analytics import IntervalHistogram, Spectrum, WeekOfYearAggregate
from .clustering import CorrelationMatrix, CorrelationTree
from .core import (
    CalendarOrigin,
    DataError,
    Panel,
    Regime,
    WeeklySeries,
)
from .simulator import AlbumRelease, SeasonalProfile, SimulationOutput

CHART_HEADER = ("artist_id", "year", "week", "sales_units")


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def parse_chart_file(
    path: str | Path,
    precision: int = 100,
    threshold_rule: float | None = None,
) -> Panel:
    """Parse a chart file into a Panel with censoring.

    precision: expected granularity of reported sales (raw copies); rows
    that are not multiples of it are accepted but counted in a notice.
    threshold_rule: optional cutoff in raw copies; rows strictly below it
    are treated like zero rows (censored).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 text ({exc})") from exc
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header[:4] != CHART_HEADER or len(header) > 5 or (
        len(header) == 5 and header[4] != "threshold"
    ):
        raise DataError(
            f"{path}: bad header {lines[0]!r}; expected 'artist_id,year,week,sales_units'"
        )

    rows: dict[str, dict[int, float]] = {}
    seen: set[tuple[str, int, int]] = set()
    years: list[int] = []
    merged_53 = 0
    off_precision = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}")
        artist = parts[0]
        if not artist:
            raise DataError(f"{path}:{lineno}: empty artist_id")
        try:
            year = int(parts[1])
            week = int(parts[2])
            sales = float(parts[3])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: malformed row ({exc})") from exc
        if not 1 <= week <= 53:
            raise DataError(f"{path}:{lineno}: week {week} outside 1..53")
        if sales < 0:
            raise DataError(f"{path}:{lineno}: negative sales {sales}")
        key = (artist, year, week)
        if key in seen:
            raise DataError(f"{path}:{lineno}: duplicate entry for {artist!r} {year}-W{week}")
        seen.add(key)
        if week == 53:
            week = 52
            merged_53 += 1
        if precision and sales % precision != 0:
            off_precision += 1
        if threshold_rule is not None and sales < threshold_rule:
            sales = 0.0
        years.append(year)
        per_artist = rows.setdefault(artist, {})
        # week-53 merges may land on an existing week 52; fold the sales in
        per_artist[(year, week)] = per_artist.get((year, week), 0.0) + sales

    if not rows:
        raise DataError(f"{path}: no data rows")
    if merged_53:
        warnings.warn(f"{path}: merged {merged_53} week-53 row(s) into week 52", stacklevel=2)
    if off_precision:
        warnings.warn(
            f"{path}: {off_precision} row(s) are not multiples of the declared "
            f"precision {precision}",
            stacklevel=2,
        )

    origin = CalendarOrigin(year=min(years), week=1)
    series = []
    for artist in sorted(rows):
        by_week = {
            origin.global_week(year, week): sales
            for (year, week), sales in rows[artist].items()
        }
        start = min(by_week)
        length = max(by_week) - start + 1
        values = np.zeros(length)
        censored = np.ones(length, dtype=bool)
        for g, sales in by_week.items():
            if sales > 0:
                values[g - start] = sales / 1000.0
                censored[g - start] = False
        series.append(WeeklySeries(artist, start, values, censored))
    return Panel(tuple(series), origin)


# --------------------------------------------------------------------------
# Export
# --------------------------------------------------------------------------


def _write(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def export_panel(panel: Panel, path: str | Path) -> None:
    """Write a panel in the chart-file schema; censored weeks become
    explicit zero rows so the file re-parses to the same panel."""

    def rows():
        for s in sorted(panel.series, key=lambda s: s.artist_id):
            for i, (value, censored) in enumerate(zip(s.values, s.censored)):
                year, week = panel.origin.year_and_week(s.start_week + i)
                raw = "0" if censored else _fmt(value * 1000.0)
                yield (s.artist_id, str(year), str(week), raw)

    _write(path, CHART_HEADER, rows())


def export_regimes(outputs: Sequence[SimulationOutput], origin: CalendarOrigin, path: str | Path) -> None:
    names = {Regime.BASE: "base", Regime.PROMOTION: "promotion", Regime.POPULARITY: "popularity"}

    def rows():
        for out in sorted(outputs, key=lambda o: o.series.artist_id):
            for i, (code, drift) in enumerate(zip(out.regime_codes, out.drift)):
                year, week = origin.year_and_week(out.series.start_week + i)
                yield (
                    out.series.artist_id,
                    str(year),
                    str(week),
                    names[Regime(int(code))],
                    _fmt(drift),
                )

    _write(path, ("artist_id", "year", "week", "regime", "drift"), rows())


def export_events(outputs: Sequence[SimulationOutput], path: str | Path) -> None:
    def rows():
        for out in sorted(outputs, key=lambda o: o.series.artist_id):
            for e in out.events:
                if isinstance(e, AlbumRelease):
                    yield (
                        out.series.artist_id,
                        str(e.week),
                        "album",
                        str(e.album_index),
                        _fmt(e.peak_value),
                        "",
                    )
                else:
                    yield (
                        out.series.artist_id,
                        str(e.week),
                        "single",
                        "",
                        "",
                        "1" if e.success else "0",
                    )

    _write(path, ("artist_id", "week", "kind", "album_index", "value", "success"), rows())


def export_spectrum(spec: Spectrum, path: str | Path) -> None:
    _write(
        path,
        ("frequency", "power"),
        ((_fmt(f), _fmt(p)) for f, p in zip(spec.frequencies, spec.power)),
    )


def export_acf(r: np.ndarray, path: str | Path) -> None:
    _write(path, ("lag", "acf"), ((str(k), _fmt(v)) for k, v in enumerate(r)))


def export_aggregate(agg: WeekOfYearAggregate, path: str | Path) -> None:
    _write(
        path,
        ("week", "raw", "smoothed"),
        (
            (str(w + 1), _fmt(agg.raw[w]), _fmt(agg.smoothed[w]))
            for w in range(52)
        ),
    )


def export_intervals(hist: IntervalHistogram, path: str | Path) -> None:
    _write(
        path,
        ("bin_lo", "bin_hi", "count"),
        (
            (_fmt(hist.bin_edges[i]), _fmt(hist.bin_edges[i + 1]), str(int(hist.counts[i])))
            for i in range(len(hist.counts))
        ),
    )


def export_tree(tree: CorrelationTree, path: str | Path) -> None:
    _write(
        path,
        ("node_a", "node_b", "distance"),
        ((e.node_a, e.node_b, _fmt(e.distance)) for e in tree.edges),
    )


def export_correlations(cm: CorrelationMatrix, path: str | Path) -> None:
    def rows():
        n = len(cm.labels)
        for i in range(n):
            for j in range(i + 1, n):
                value = "" if cm.missing[i, j] else _fmt(cm.rho[i, j])
                yield (cm.labels[i], cm.labels[j], value)

    _write(path, ("artist_a", "artist_b", "rho"), rows())


def export_profile(profile: SeasonalProfile, path: str | Path) -> None:
    _write(
        path,
        ("week", "c"),
        ((str(w + 1), _fmt(profile.c[w])) for w in range(52)),
    )


def parse_profile_file(path: str | Path) -> SeasonalProfile:
    """Read a 52-row week,c file back into a seasonal profile."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or tuple(h.strip() for h in lines[0].split(",")) != ("week", "c"):
        raise DataError(f"{path}: expected header 'week,c'")
    c = np.full(52, np.nan)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            week = int(parts[0])
            value = float(parts[1])
        except (IndexError, ValueError) as exc:
            raise DataError(f"{path}:{lineno}: malformed row ({exc})") from exc
        if not 1 <= week <= 52:
            raise DataError(f"{path}:{lineno}: week {week} outside 1..52")
        c[week - 1] = value
    if np.any(np.isnan(c)):
        missing = int(np.argmax(np.isnan(c))) + 1
        raise DataError(f"{path}: no entry for week {missing}")
    return SeasonalProfile(c)


def export_series(obj, path: str | Path) -> None:
    """Type-dispatching export used by the command-line layer."""
    if isinstance(obj, Panel):
        export_panel(obj, path)
    elif isinstance(obj, Spectrum):
        export_spectrum(obj, path)
    elif isinstance(obj, WeekOfYearAggregate):
        export_aggregate(obj, path)
    elif isinstance(obj, IntervalHistogram):
        export_intervals(obj, path)
    elif isinstance(obj, CorrelationTree):
        export_tree(obj, path)
    elif isinstance(obj, CorrelationMatrix):
        export_correlations(obj, path)
    elif isinstance(obj, SeasonalProfile):
        export_profile(obj, path)
    else:
        raise DataError(f"no exporter for {type(obj).__name__}")
