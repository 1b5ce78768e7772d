"""Command-line entry point.

Subcommands: simulate, estimate, analyze, cluster, compare, config-template.
Summary statistics go to standard output; all data goes to CSV files under
the output directory, so every run is scriptable and reproducible from
(input files, config, seed) alone.

Exit codes: 0 success, 2 validation error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import functools
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import analytics, clustering, estimation, ingestion
from .config import RunConfig, apply_overrides, config_template, load_config
from .core import (
    CalendarOrigin,
    ChartSimError,
    DataError,
    InsufficientDataError,
    Panel,
    Regime,
    ValidationError,
    WeeklySeries,
)
from .simulator import (
    AlbumRelease,
    cohort_summary,
    default_engine,
    episode_summaries,
    release_week_of_year,
    simulate_cohort,
)

EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (DataError, InsufficientDataError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except ChartSimError as exc:
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper


@click.group()
def main() -> None:
    """Simulation, calibration and diagnostics for weekly sales charts."""


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="Run configuration file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option(
    "--stationary/--nonstationary",
    "stationary",
    default=None,
    help="Override the configured mode.",
)
@click.option("--n-artists", type=int, default=None)
@click.option("--horizon", "horizon_weeks", type=int, default=None)
@guarded
def simulate(config_path, seed, out, stationary, n_artists, horizon_weeks):
    """Simulate a cohort and write trajectories, regimes and events."""
    cfg = load_config(config_path)
    mode = None if stationary is None else ("stationary" if stationary else "nonstationary")
    cfg = apply_overrides(
        cfg,
        seed=seed,
        outputs=None if out is None else Path(out),
        mode=mode,
        n_artists=n_artists,
        horizon_weeks=horizon_weeks,
    )
    nonstationary = cfg.mode == "nonstationary"
    panel, outputs = simulate_cohort(
        cfg.model,
        cfg.n_artists,
        cfg.horizon_weeks,
        cfg.seed,
        profile=cfg.resolve_profile() if nonstationary else None,
        mem=cfg.memory if nonstationary else None,
        origin=cfg.origin,
    )
    out_dir = Path(cfg.outputs)
    ingestion.export_panel(panel, out_dir / "trajectories.csv")
    ingestion.export_regimes(outputs, cfg.origin, out_dir / "regimes.csv")
    ingestion.export_events(outputs, out_dir / "events.csv")

    summary = cohort_summary(outputs)
    click.echo(f"engine: {default_engine()}  mode: {cfg.mode}  seed: {cfg.seed}")
    click.echo(
        f"artists: {summary['n_artists']}  albums: {summary['n_albums']}  "
        f"completed episodes: {summary['n_completed_episodes']}"
    )
    click.echo(f"mean promotion length [weeks]: {summary['mean_promotion_weeks']:.3f}")
    click.echo(f"mean release interval [weeks]: {summary['mean_release_interval']:.3f}")
    click.echo(f"singles per album: {summary['singles_per_album']:.4f}")
    click.echo(f"popularity entries per album: {summary['popularity_entries_per_album']:.4f}")
    if summary["clamped_weeks"]:
        click.echo(f"warning: seasonal hazard clamped in {summary['clamped_weeks']} week(s)")
    click.echo(f"wrote trajectories, regimes, events under {out_dir}")


# --------------------------------------------------------------------------
# shared data helpers
# --------------------------------------------------------------------------


def _read_week_rows(path: Path, expected: tuple[str, ...]) -> list[list[str]]:
    if not path.exists():
        raise DataError(f"no such file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header != expected:
        raise DataError(f"{path}: expected header {','.join(expected)!r}, got {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(expected):
            raise DataError(f"{path}:{lineno}: expected {len(expected)} fields")
        rows.append(parts)
    return rows


def _read_release_file(path: Path, origin: CalendarOrigin) -> dict[str, list[int]]:
    """artist_id,year,week rows giving album release dates."""
    releases: dict[str, list[int]] = {}
    for parts in _read_week_rows(path, ("artist_id", "year", "week")):
        artist, year, week = parts[0], int(parts[1]), int(parts[2])
        releases.setdefault(artist, []).append(origin.global_week(year, min(week, 52)))
    return {k: sorted(v) for k, v in releases.items()}


_REGIME_NAMES = {"base": Regime.BASE, "promotion": Regime.PROMOTION, "popularity": Regime.POPULARITY}


def _read_labels_file(path: Path, panel: Panel) -> dict[str, np.ndarray]:
    """artist_id,year,week,regime rows; weeks not listed default to base."""
    by_artist = {s.artist_id: s for s in panel.series}
    labels = {
        artist: np.zeros(len(series), dtype=np.int8) for artist, series in by_artist.items()
    }
    rows = _read_week_rows(path, ("artist_id", "year", "week", "regime"))
    for parts in rows:
        artist, year, week, regime = parts[0], int(parts[1]), int(parts[2]), parts[3]
        if artist not in by_artist:
            continue
        if regime not in _REGIME_NAMES:
            raise DataError(f"{path}: unknown regime {regime!r}")
        series = by_artist[artist]
        idx = panel.origin.global_week(year, min(week, 52)) - series.start_week
        if 0 <= idx < len(series):
            labels[artist][idx] = _REGIME_NAMES[regime]
    return labels


def _read_events_file(path: Path) -> dict[str, dict]:
    """Per-artist album release weeks and single weeks from an events file."""
    rows = _read_week_rows(
        path, ("artist_id", "week", "kind", "album_index", "value", "success")
    )
    out: dict[str, dict] = {}
    for artist, week, kind, album_index, value, success in rows:
        entry = out.setdefault(artist, {"albums": [], "singles": []})
        if kind == "album":
            entry["albums"].append((int(week), int(album_index), float(value)))
        elif kind == "single":
            entry["singles"].append((int(week), success == "1"))
        else:
            raise DataError(f"{path}: unknown event kind {kind!r}")
    for entry in out.values():
        entry["albums"].sort()
        entry["singles"].sort()
    return out


def _derive_labels(
    panel: Panel,
    labels_path: Path | None,
    releases_path: Path | None,
    events: dict[str, dict] | None,
) -> tuple[dict[str, np.ndarray], dict[str, list[int]], str]:
    """Regime labels plus release weeks per artist, with provenance note."""
    if labels_path is not None:
        labels = _read_labels_file(labels_path, panel)
        releases = {}
        for s in panel.series:
            codes = labels[s.artist_id]
            starts = np.flatnonzero(
                (codes != Regime.BASE) & np.concatenate(([True], codes[:-1] == Regime.BASE))
            )
            releases[s.artist_id] = [s.start_week + int(i) for i in starts]
        return labels, releases, "labels file"
    if releases_path is not None:
        releases = _read_release_file(releases_path, panel.origin)
    elif events is not None:
        releases = {
            artist: [week for week, _, _ in entry["albums"]]
            for artist, entry in events.items()
        }
    else:
        releases = {s.artist_id: estimation.infer_release_weeks(s) for s in panel.series}
    labels = {}
    for s in panel.series:
        labels[s.artist_id] = estimation.label_regimes(s, releases.get(s.artist_id, []))
    source = (
        "releases file"
        if releases_path is not None
        else ("events file" if events is not None else "inferred from censoring")
    )
    return labels, releases, source


def _pooled_mr_estimate(panel: Panel, labels, regime: Regime, noise_mode: str):
    """Pool per-artist series into one estimate by concatenating with masked
    censored separators, so no pair crosses an artist boundary."""
    values, censored, mask = [], [], []
    for s in panel.series:
        codes = labels[s.artist_id]
        values.extend(s.values.tolist() + [0.0])
        censored.extend(s.censored.tolist() + [True])
        mask.extend((codes == regime).tolist() + [False])
    series = WeeklySeries("pooled", 0, np.array(values), np.array(censored, dtype=bool))
    return estimation.estimate_mr_params(series, np.array(mask, dtype=bool), noise_mode)


def _singles_per_album(events: dict[str, dict]) -> list[int]:
    counts: list[int] = []
    for entry in events.values():
        album_weeks = [week for week, _, _ in entry["albums"]]
        if not album_weeks:
            continue
        per_album = [0] * len(album_weeks)
        for week, _ in entry["singles"]:
            i = int(np.searchsorted(album_weeks, week, side="right")) - 1
            if i >= 0:
                per_album[i] += 1
        counts.extend(per_album)
    return counts


def _total_series(panel: Panel) -> np.ndarray:
    lo = min(s.start_week for s in panel.series)
    hi = max(s.end_week for s in panel.series)
    total = np.zeros(hi - lo)
    for s in panel.series:
        total[s.start_week - lo : s.end_week - lo] += s.values
    return total


def _episode_pairs_from_labels(panel: Panel, labels, releases) -> dict[str, list[tuple[float, float]]]:
    """(peak, episode total) per album per artist, from labeled data."""
    out: dict[str, list[tuple[float, float]]] = {}
    for s in panel.series:
        codes = labels[s.artist_id]
        episodes = []
        for release in sorted(releases.get(s.artist_id, [])):
            i = release - s.start_week
            if not 0 <= i < len(s) or codes[i] == Regime.BASE:
                continue
            j = i
            while j < len(s) and codes[j] != Regime.BASE:
                j += 1
            episodes.append((float(s.values[i]), float(np.sum(s.values[i:j]))))
        if episodes:
            out[s.artist_id] = episodes
    return out


# --------------------------------------------------------------------------
# estimate
# --------------------------------------------------------------------------


@main.command()
@click.argument("data", type=click.Path())
@click.option("--labels", "labels_path", type=click.Path(), default=None,
              help="Explicit regime labels (artist_id,year,week,regime).")
@click.option("--releases", "releases_path", type=click.Path(), default=None,
              help="Album release dates (artist_id,year,week).")
@click.option("--events", "events_path", type=click.Path(), default=None,
              help="Event log from a simulation run.")
@click.option("--out", type=click.Path(), default="out")
@click.option("--grid", default=None,
              help="Memory-fit grid 'SC_LO:SC_HI:SC_STEP,SS_LO:SS_HI:SS_STEP'.")
@guarded
def estimate(data, labels_path, releases_path, events_path, out, grid):
    """Calibrate model parameters from a chart file."""
    panel = ingestion.parse_chart_file(data)
    events = _read_events_file(Path(events_path)) if events_path else None
    labels, releases, label_source = _derive_labels(
        panel,
        Path(labels_path) if labels_path else None,
        Path(releases_path) if releases_path else None,
        events,
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report: list[tuple[str, str, str]] = [("labels", "source", label_source)]

    for regime, name in ((Regime.BASE, "base"), (Regime.PROMOTION, "promotion")):
        try:
            est = _pooled_mr_estimate(panel, labels, regime, "multiplicative")
            report += [
                (name, "a", f"{est.a:.9g}"),
                (name, "b", f"{est.b:.9g}"),
                (name, "s", f"{est.s:.9g}"),
                (name, "log_likelihood", f"{est.log_likelihood:.9g}"),
                (name, "n_used", str(est.n_used)),
                (name, "n_excluded", str(est.n_excluded)),
            ]
        except ChartSimError as exc:
            report.append((name, "error", str(exc)))

    paths = [labels[s.artist_id] for s in panel.series]
    try:
        trans = estimation.estimate_transition_probs(paths)
        report += [
            ("transitions", "q12", "" if trans.q12 is None else f"{trans.q12:.9g}"),
            ("transitions", "q22_exit", "" if trans.q22_exit is None else f"{trans.q22_exit:.9g}"),
            ("transitions", "weeks_base", str(trans.weeks_base)),
            ("transitions", "weeks_episode", str(trans.weeks_episode)),
            ("transitions", "n_promotions", str(trans.n_promotions)),
            ("transitions", "n_exits", str(trans.n_exits)),
        ]
        for flag in trans.low_confidence:
            report.append(("transitions", "low_confidence", flag))
    except ChartSimError as exc:
        report.append(("transitions", "error", str(exc)))

    if events is not None:
        counts = _singles_per_album(events)
        try:
            fit = estimation.fit_singles_count(counts)
            report += [
                ("singles", "poisson_lambda", f"{fit.poisson_lambda:.9g}"),
                ("singles", "binomial_n", str(fit.binomial_n)),
                ("singles", "binomial_theta", f"{fit.binomial_theta:.9g}"),
                ("singles", "poisson_log_likelihood", f"{fit.poisson_log_likelihood:.9g}"),
                ("singles", "binomial_log_likelihood", f"{fit.binomial_log_likelihood:.9g}"),
                ("singles", "n_albums", str(len(counts))),
            ]
        except ChartSimError as exc:
            report.append(("singles", "error", str(exc)))
    else:
        report.append(("singles", "skipped", "no event log; single counts unavailable"))

    release_woy = [
        panel.origin.year_and_week(week)[1]
        for artist_weeks in releases.values()
        for week in artist_weeks
    ]
    try:
        profile = estimation.estimate_seasonal_profile(release_woy)
        ingestion.export_profile(profile, out_dir / "seasonal_profile.csv")
        report.append(("seasonal", "n_releases", str(len(release_woy))))
        report.append(("seasonal", "profile_file", "seasonal_profile.csv"))
    except ChartSimError as exc:
        report.append(("seasonal", "error", str(exc)))

    pairs = _episode_pairs_from_labels(panel, labels, releases)
    try:
        sc_grid = ss_grid = None
        if grid:
            sc_grid, ss_grid = _parse_grid(grid)
        mem = estimation.fit_memory_params(pairs, sc_grid, ss_grid)
        report += [
            ("memory", "s_c", f"{mem.s_c:.9g}"),
            ("memory", "s_s", f"{mem.s_s:.9g}"),
            ("memory", "mse", f"{estimation.memory_fit_mse(pairs, mem):.9g}"),
        ]
    except ChartSimError as exc:
        report.append(("memory", "error", str(exc)))

    for s in panel.series:
        try:
            hurst = estimation.estimate_hurst(s.values, method="dfa")
            report.append(("hurst_dfa", s.artist_id, f"{hurst.h:.9g}"))
        except ChartSimError as exc:
            report.append(("hurst_dfa", s.artist_id, f"skipped: {exc}"))

    with open(out_dir / "report.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("section,key,value\n")
        for section, key, value in report:
            fh.write(f"{section},{key},{value}\n")
    for section, key, value in report:
        click.echo(f"{section}.{key} = {value}")
    click.echo(f"wrote report under {out_dir}")


def _parse_grid(spec: str):
    try:
        sc_spec, ss_spec = spec.split(",")
        sc_lo, sc_hi, sc_step = (float(v) for v in sc_spec.split(":"))
        ss_lo, ss_hi, ss_step = (float(v) for v in ss_spec.split(":"))
    except ValueError as exc:
        raise ValidationError(
            f"bad --grid {spec!r}; expected 'LO:HI:STEP,LO:HI:STEP'"
        ) from exc
    return (
        np.arange(sc_lo, sc_hi + sc_step / 2, sc_step),
        np.arange(ss_lo, ss_hi + ss_step / 2, ss_step),
    )


# --------------------------------------------------------------------------
# analyze
# --------------------------------------------------------------------------


@main.command()
@click.argument("data", type=click.Path())
@click.option("--max-lag", type=int, default=200, show_default=True)
@click.option("--bin-width", type=int, default=4, show_default=True)
@click.option("--releases", "releases_path", type=click.Path(), default=None)
@click.option("--events", "events_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default="out")
@guarded
def analyze(data, max_lag, bin_width, releases_path, events_path, out):
    """Diagnostics: ACF, periodogram, release intervals, seasonality."""
    panel = ingestion.parse_chart_file(data)
    out_dir = Path(out)
    total = _total_series(panel)
    lag = min(max_lag, len(total) - 1)
    ingestion.export_acf(analytics.acf(total, lag), out_dir / "acf.csv")
    ingestion.export_spectrum(analytics.periodogram(total), out_dir / "periodogram.csv")

    if events_path:
        events = _read_events_file(Path(events_path))
        releases = {a: [w for w, _, _ in e["albums"]] for a, e in events.items()}
    elif releases_path:
        releases = _read_release_file(Path(releases_path), panel.origin)
    else:
        releases = {s.artist_id: estimation.infer_release_weeks(s) for s in panel.series}
    hist = analytics.release_intervals(releases, bin_width=bin_width)
    ingestion.export_intervals(hist, out_dir / "intervals.csv")

    agg = analytics.aggregate_week_of_year(panel)
    ingestion.export_aggregate(agg, out_dir / "week_of_year.csv")

    click.echo(f"artists: {len(panel)}  censored weeks: {agg.censored_weeks}")
    if len(hist.gaps):
        lo, hi = hist.modal_bin()
        click.echo(
            f"release gaps: n={len(hist.gaps)} mean={float(np.mean(hist.gaps)):.1f} "
            f"modal bin=[{lo:.0f},{hi:.0f})"
        )
    spectrum = analytics.periodogram(total)
    peak_freq = spectrum.dominant_frequency()
    period = math.inf if peak_freq == 0 else 1.0 / peak_freq
    click.echo(f"dominant period [weeks]: {period:.2f}")
    try:
        ratio = analytics.peak_to_base_ratio(agg)
        click.echo(f"seasonal peak-to-base ratio: {ratio:.1f}%")
    except DataError as exc:
        click.echo(f"seasonal peak-to-base ratio: undefined ({exc})")
    click.echo(f"wrote acf, periodogram, intervals, week_of_year under {out_dir}")


# --------------------------------------------------------------------------
# cluster
# --------------------------------------------------------------------------


@main.command()
@click.argument("data", type=click.Path())
@click.option("--min-overlap", type=int, default=52, show_default=True)
@click.option("--out", type=click.Path(), default="out")
@guarded
def cluster(data, min_overlap, out):
    """Correlation matrix, minimum spanning tree and dendrogram."""
    panel = ingestion.parse_chart_file(data)
    out_dir = Path(out)
    cm = clustering.correlation_matrix(panel, min_overlap=min_overlap)
    ingestion.export_correlations(cm, out_dir / "correlations.csv")
    if not cm.is_complete():
        n_missing = int(cm.missing.sum()) // 2
        raise DataError(
            f"{n_missing} artist pair(s) lack {min_overlap} shared uncensored weeks; "
            f"trees need a complete matrix (see correlations.csv)"
        )
    d = clustering.correlation_distance(cm)
    mst = clustering.minimum_spanning_tree(d, cm.labels)
    ingestion.export_tree(mst, out_dir / "mst.csv")
    dendro = clustering.single_linkage_dendrogram(d, cm.labels)
    ingestion.export_tree(dendro, out_dir / "dendrogram.csv")
    click.echo(f"artists: {len(cm.labels)}  mst weight: {mst.total_weight():.6g}")
    click.echo(f"wrote correlations, mst, dendrogram under {out_dir}")


# --------------------------------------------------------------------------
# compare
# --------------------------------------------------------------------------


@main.command()
@click.argument("data", type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--releases", "releases_path", type=click.Path(), default=None)
@guarded
def compare(data, config_path, seed, out, releases_path):
    """Run the configured model and report data-vs-model diagnostics."""
    cfg = load_config(config_path)
    cfg = apply_overrides(cfg, seed=seed, outputs=None if out is None else Path(out))
    out_dir = Path(cfg.outputs)

    def side(label, fn):
        try:
            return fn()
        except ChartSimError as exc:
            raise type(exc)(f"{label}: {exc}") from exc

    panel = side("data", lambda: ingestion.parse_chart_file(data))
    if releases_path:
        data_releases = _read_release_file(Path(releases_path), panel.origin)
    else:
        data_releases = {s.artist_id: estimation.infer_release_weeks(s) for s in panel.series}

    nonstationary = cfg.mode == "nonstationary"
    model_panel, outputs = side(
        "model",
        lambda: simulate_cohort(
            cfg.model,
            cfg.n_artists,
            cfg.horizon_weeks,
            cfg.seed,
            profile=cfg.resolve_profile() if nonstationary else None,
            mem=cfg.memory if nonstationary else None,
            origin=cfg.origin,
        ),
    )
    model_releases = {o.series.artist_id: o.release_weeks() for o in outputs}

    rows = []
    for label, pnl, rels in (
        ("data", panel, data_releases),
        ("model", model_panel, model_releases),
    ):
        agg = side(label, lambda: analytics.aggregate_week_of_year(pnl))
        ingestion.export_aggregate(agg, out_dir / f"{label}_week_of_year.csv")
        hist = side(label, lambda: analytics.release_intervals(rels, bin_width=cfg.bin_width))
        ingestion.export_intervals(hist, out_dir / f"{label}_intervals.csv")
        try:
            cm = clustering.correlation_matrix(pnl, min_overlap=min(52, cfg.horizon_weeks))
            if cm.is_complete() and len(cm.labels) >= 2:
                tree = clustering.minimum_spanning_tree(
                    clustering.correlation_distance(cm), cm.labels
                )
                ingestion.export_tree(tree, out_dir / f"{label}_mst.csv")
                tree_note = f"{tree.total_weight():.6g}"
            else:
                tree_note = "incomplete correlation matrix"
        except ChartSimError as exc:
            tree_note = f"unavailable: {exc}"
        try:
            ratio = f"{analytics.peak_to_base_ratio(agg):.1f}"
        except ChartSimError:
            ratio = ""
        rows.append(
            {
                "side": label,
                "peak_to_base_pct": ratio,
                "mean_gap_weeks": f"{float(np.mean(hist.gaps)):.2f}" if len(hist.gaps) else "",
                "n_gaps": str(len(hist.gaps)),
                "mst_weight": tree_note,
            }
        )

    with open(out_dir / "comparison.csv", "w", encoding="utf-8", newline="\n") as fh:
        keys = ["side", "peak_to_base_pct", "mean_gap_weeks", "n_gaps", "mst_weight"]
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(row[k] for k in keys) + "\n")
    for row in rows:
        click.echo(
            f"{row['side']}: peak-to-base {row['peak_to_base_pct']}%  "
            f"mean gap {row['mean_gap_weeks']} weeks (n={row['n_gaps']})  "
            f"mst weight {row['mst_weight']}"
        )
    click.echo(f"wrote paired diagnostics under {out_dir}")


@main.command("config-template")
def config_template_cmd():
    """Print the documented configuration schema with defaults."""
    click.echo(config_template(), nl=False)


if __name__ == "__main__":
    main()
