"""Results tables (CSV) and accuracy-versus-budget curves (SVG)."""

from __future__ import annotations

import csv
import io
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Sequence

from ..scoring import format_pct
from .matrix import RunResult

log = logging.getLogger(__name__)


class Layout(str, Enum):
    WIDE_BY_DATASET = "wide"
    LONG = "long"


HEADER = ["Configuration", "Thinking", "Budget", "Calls", "Total"]


def _row_key(r: RunResult):
    return (r.spec.sort_key, r.budget)


def _prefix(r: RunResult) -> list[str]:
    calls, total = r.planned
    return [r.spec.label, "yes" if r.thinking else "no", str(r.budget), str(calls), str(total)]


def emit_results_table(results: Sequence[RunResult], layout: Layout | str = Layout.WIDE_BY_DATASET,
                       path: str | Path | None = None) -> str:
    """Render results as CSV (and write it to ``path`` when given)."""
    if not results:
        raise ValueError("no results to tabulate")
    layout = Layout(layout)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    ordered = sorted(results, key=_row_key)
    if layout is Layout.LONG:
        writer.writerow(HEADER + ["Model", "Dataset", "Accuracy"])
        for r in ordered:
            writer.writerow(_prefix(r) + [r.model_tag, r.dataset, format_pct(r.accuracy)])
    else:
        columns: list[tuple[str, str]] = []
        for r in results:
            if (r.model_tag, r.dataset) not in columns:
                columns.append((r.model_tag, r.dataset))
        models = {m for m, _ in columns}
        labels = [d if len(models) == 1 else f"{m} {d}" for m, d in columns]
        writer.writerow(HEADER + labels)
        rows: dict[tuple, dict] = {}
        for r in ordered:
            rows.setdefault(_row_key(r), {"prefix": _prefix(r)})[(r.model_tag, r.dataset)] = r
        for key in sorted(rows):
            row = rows[key]
            writer.writerow(row["prefix"] + [
                format_pct(row[c].accuracy) if c in row else "" for c in columns
            ])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# --- SVG curves -----------------------------------------------------------

PALETTE = ["#222222", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#17becf", "#bcbd22"]
WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 190, 30, 50


def _num(v: float) -> str:
    text = f"{v:.2f}".rstrip("0").rstrip(".")
    return text if text != "-0" else "0"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _nice_max(x: float) -> float:
    if x <= 0:
        return 1.0
    step = 10 ** (len(str(int(x))) - 1)
    return float(((int(x) + step - 1) // step) * step) if x % step else float(x)


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-") or "x"


def render_curves_svg(series: dict[str, list[tuple[float, float]]], title: str) -> str:
    """Polylines of accuracy (percent) against total thinking budget (tokens)."""
    xmax = _nice_max(max(x for pts in series.values() for x, _ in pts))
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + plot_w * x / xmax

    def sy(y: float) -> float:
        return MARGIN_T + plot_h * (1 - y / 100.0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L}" y="18" font-size="13">{_esc(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{_num(sy(0))}" x2="{_num(sx(xmax))}" y2="{_num(sy(0))}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{_num(sy(0))}" x2="{MARGIN_L}" y2="{_num(sy(100))}" stroke="black"/>',
    ]
    for i in range(6):
        y = 20 * i
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{_num(sy(y))}" x2="{_num(sx(xmax))}" '
                   f'y2="{_num(sy(y))}" stroke="#dddddd"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_num(sy(y) + 4)}" text-anchor="end">{y}</text>')
    for i in range(5):
        x = xmax * i / 4
        out.append(f'<line x1="{_num(sx(x))}" y1="{_num(sy(0))}" x2="{_num(sx(x))}" '
                   f'y2="{_num(sy(0) + 4)}" stroke="black"/>')
        out.append(f'<text x="{_num(sx(x))}" y="{_num(sy(0) + 16)}" text-anchor="middle">{_num(x)}</text>')
    out.append(f'<text x="{_num(MARGIN_L + plot_w / 2)}" y="{HEIGHT - 10}" text-anchor="middle">'
               f'total thinking tokens</text>')
    out.append(f'<text x="14" y="{_num(MARGIN_T + plot_h / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_num(MARGIN_T + plot_h / 2)})">accuracy (%)</text>')
    for idx, (label, pts) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in pts)
        out.append(f'<polyline class="series" data-label="{_esc(label)}" points="{coords}" '
                   f'fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{_num(sx(x))}" cy="{_num(sy(y))}" r="3" fill="{color}"/>')
        ly = MARGIN_T + 14 + 18 * idx
        lx = WIDTH - MARGIN_R + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 26}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def curve_series(results: Sequence[RunResult]) -> dict[str, list[tuple[float, float]]]:
    """Series keyed by configuration label, Vanilla first, then table order."""
    by_label: dict[str, tuple] = {}
    points: dict[str, list[tuple[float, float]]] = {}
    for r in sorted(results, key=_row_key):
        by_label.setdefault(r.spec.label, r.spec.sort_key)
        points.setdefault(r.spec.label, []).append((float(r.planned[1]), r.accuracy))
    return {label: sorted(points[label]) for label in sorted(by_label, key=by_label.get)}


def emit_curves(results: Sequence[RunResult], output_dir: str | Path) -> list[Path]:
    """Write one SVG per (model, dataset); groups with no multi-budget series are skipped."""
    output_dir = Path(output_dir)
    groups: dict[tuple[str, str], list[RunResult]] = {}
    for r in results:
        groups.setdefault((r.model_tag, r.dataset), []).append(r)
    written = []
    for (model, dataset), group in groups.items():
        series = curve_series(group)
        if not any(len({x for x, _ in pts}) >= 2 for pts in series.values()):
            log.warning("not enough budgets to draw curves for %s/%s", model, dataset)
            continue
        path = output_dir / f"curves_{slug(model)}_{slug(dataset)}.svg"
        path.write_text(render_curves_svg(series, f"{model} / {dataset}"), encoding="utf-8")
        written.append(path)
    return written
