"""Series figures: outcomes, durations, and the command mix as PNG files.

Rendering is headless (Agg) so it works in CI and containers; every chart
is derived from a ``SeriesReport``, the same object the CSV export reads,
so the pictures and the table can never disagree.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend selection first)

from .harness import SeriesReport

_RESULT_COLORS = {
    "win": "#2a9d2a",
    "loss": "#c23b3b",
    "timeout": "#b8860b",
    "aborted": "#777777",
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _outcome_figure(report: SeriesReport, path: Path) -> Path:
    counts: dict[str, int] = {}
    for m in report.matches:
        counts[m.result] = counts.get(m.result, 0) + 1
    order = [r for r in ("win", "loss", "timeout", "aborted") if r in counts]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([r.capitalize() for r in order],
           [counts[r] for r in order],
           color=[_RESULT_COLORS[r] for r in order])
    ax.set_ylabel("matches")
    label = report.matches[0].difficulty if report.matches else ""
    ax.set_title(f"Outcomes vs {label} "
                 f"({report.wins}/{len(report.matches)} wins)")
    ax.yaxis.get_major_locator().set_params(integer=True)
    return _save(fig, path)


def _duration_figure(report: SeriesReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    seeds = [str(m.seed) for m in report.matches]
    ticks = [m.duration_ticks for m in report.matches]
    colors = [_RESULT_COLORS.get(m.result, "#777777") for m in report.matches]
    ax.bar(seeds, ticks, color=colors)
    ax.set_xlabel("seed")
    ax.set_ylabel("game seconds")
    ax.set_title(f"Match duration (mean {report.mean_duration:.0f})")
    return _save(fig, path)


def _barh_figure(data: dict[str, float], title: str, xlabel: str,
                 path: Path, limit: int = 14) -> Path:
    items = sorted(data.items(), key=lambda kv: kv[1], reverse=True)[:limit]
    items.reverse()  # largest on top
    fig, ax = plt.subplots(figsize=(7, max(3, 0.4 * len(items) + 1)))
    ax.barh([k for k, _ in items], [v for _, v in items], color="#4878a8")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    return _save(fig, path)


def render_series_figures(report: SeriesReport,
                          out_dir: str | Path) -> list[Path]:
    """Write the four standard charts into ``out_dir`` and return them."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        _outcome_figure(report, out / "outcomes.png"),
        _duration_figure(report, out / "durations.png"),
        _barh_figure(
            {k: float(v) for k, v in report.command_frequency().items()},
            "Dispatched commands", "count", out / "command_frequency.png"),
        _barh_figure(
            report.command_percentages(),
            "Command mix", "% of dispatched commands",
            out / "command_share.png"),
    ]
    return paths
