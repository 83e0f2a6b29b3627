"""Sweep outputs: the curve CSV, an SVG chart and the accuracy-drop report."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from ..errors import ContractError, DataError
from ..ioutil import atomic_write_text
from .sweep import SweepResult, SweepRow

SWEEP_CSV_HEADER = "mu,train_acc,test_acc,train_di,test_di"

UNDEFINED = "undefined"

DEFAULT_DI_TARGET = 0.8


def _cell(value: Optional[float]) -> str:
    return UNDEFINED if value is None else repr(float(value))


def sweep_csv(result: SweepResult) -> str:
    lines = [SWEEP_CSV_HEADER]
    for row in result.rows:
        lines.append(
            ",".join(
                [
                    repr(float(row.mu)),
                    repr(float(row.train_accuracy)),
                    repr(float(row.test_accuracy)),
                    _cell(row.train_di),
                    _cell(row.test_di),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def load_sweep_csv(path) -> SweepResult:
    """Reload a sweep CSV; hyperparameter fields are not stored in the file."""
    source = Path(path)
    if not source.exists():
        raise DataError(f"sweep file not found: {source}")
    lines = source.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != SWEEP_CSV_HEADER:
        raise DataError(
            f"{source}: expected header {SWEEP_CSV_HEADER!r}, got {lines[0] if lines else ''!r}"
        )
    rows: List[SweepRow] = []
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 5:
            raise DataError(f"{source}: line {number}: expected 5 cells, got {len(cells)}")
        try:
            rows.append(
                SweepRow(
                    mu=float(cells[0]),
                    train_accuracy=float(cells[1]),
                    test_accuracy=float(cells[2]),
                    train_di=None if cells[3] == UNDEFINED else float(cells[3]),
                    test_di=None if cells[4] == UNDEFINED else float(cells[4]),
                )
            )
        except ValueError as exc:
            raise DataError(f"{source}: line {number}: {exc}") from None
    if not rows:
        raise DataError(f"{source}: no sweep rows")
    return SweepResult(rows=tuple(rows))


@dataclass(frozen=True)
class DropReport:
    """How much test accuracy the DI target costs, relative to vanilla."""

    di_target: float
    vanilla_accuracy: float
    vanilla_test_di: Optional[float]
    achieved: bool
    min_achieving_mu: Optional[float]
    best_fair_accuracy: Optional[float]
    accuracy_drop: Optional[float]


def accuracy_drop_report(result: SweepResult, di_target: float = DEFAULT_DI_TARGET) -> DropReport:
    """Compare the vanilla row against the best row meeting the DI target.

    If vanilla already meets the target the drop is exactly 0.0.  Otherwise
    the drop is vanilla test accuracy minus the best test accuracy among
    qualifying rows; with no qualifying row the target is unachieved.
    """
    vanilla = result.vanilla_row()
    if vanilla is None:
        raise ContractError("sweep result has no mu = 0 row; cannot compute the drop")
    target = float(di_target)
    if vanilla.test_di is not None and vanilla.test_di >= target:
        return DropReport(
            di_target=target,
            vanilla_accuracy=vanilla.test_accuracy,
            vanilla_test_di=vanilla.test_di,
            achieved=True,
            min_achieving_mu=0.0,
            best_fair_accuracy=vanilla.test_accuracy,
            accuracy_drop=0.0,
        )
    qualifying = [r for r in result.rows if r.test_di is not None and r.test_di >= target]
    if not qualifying:
        return DropReport(
            di_target=target,
            vanilla_accuracy=vanilla.test_accuracy,
            vanilla_test_di=vanilla.test_di,
            achieved=False,
            min_achieving_mu=None,
            best_fair_accuracy=None,
            accuracy_drop=None,
        )
    best = max(r.test_accuracy for r in qualifying)
    return DropReport(
        di_target=target,
        vanilla_accuracy=vanilla.test_accuracy,
        vanilla_test_di=vanilla.test_di,
        achieved=True,
        min_achieving_mu=min(r.mu for r in qualifying),
        best_fair_accuracy=best,
        accuracy_drop=vanilla.test_accuracy - best,
    )


def render_drop_report(report: DropReport) -> str:
    lines = [
        f"di_target: {report.di_target!r}",
        f"vanilla_test_accuracy: {report.vanilla_accuracy!r}",
        f"vanilla_test_di: {_cell(report.vanilla_test_di)}",
        f"target_achieved: {'yes' if report.achieved else 'no'}",
    ]
    if report.achieved:
        lines.append(f"min_achieving_mu: {report.min_achieving_mu!r}")
        lines.append(f"best_accuracy_at_target: {report.best_fair_accuracy!r}")
        lines.append(f"accuracy_drop: {report.accuracy_drop!r}")
    else:
        lines.append("accuracy_drop: unachieved")
    return "\n".join(lines) + "\n"


def _scale(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def _polyline(points: List[Tuple[float, float]], stroke: str, dash: str = "") -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{extra} points="{coords}" />'


def sweep_curves_svg(result: SweepResult, di_target: float = DEFAULT_DI_TARGET) -> str:
    """Accuracy and DI versus mu as a standalone SVG with a DI target line."""
    width, height = 720.0, 420.0
    left, right, top, bottom = 60.0, 160.0, 20.0, 45.0
    x0, x1 = left, width - right
    y_axis_top, y_axis_bottom = top, height - bottom

    defined = [v for row in result.rows for v in (row.train_di, row.test_di) if v is not None]
    y_max = max([1.0, float(di_target)] + defined) * 1.05
    mus = [row.mu for row in result.rows]
    mu_lo, mu_hi = min(mus), max(mus)
    if mu_hi == mu_lo:
        mu_lo, mu_hi = mu_lo - 0.5, mu_hi + 0.5

    def sx(mu: float) -> float:
        return _scale(mu, mu_lo, mu_hi, x0, x1)

    def sy(value: float) -> float:
        return _scale(value, 0.0, y_max, y_axis_bottom, y_axis_top)

    series = [
        ("test_di", "#d62728", "", [(r.mu, r.test_di) for r in result.rows]),
        ("train_di", "#d62728", "2 3", [(r.mu, r.train_di) for r in result.rows]),
        ("test_acc", "#1f77b4", "", [(r.mu, r.test_accuracy) for r in result.rows]),
        ("train_acc", "#1f77b4", "2 3", [(r.mu, r.train_accuracy) for r in result.rows]),
    ]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white" />',
        f'<line x1="{x0:.2f}" y1="{y_axis_bottom:.2f}" x2="{x1:.2f}" y2="{y_axis_bottom:.2f}" '
        'stroke="black" stroke-width="1" />',
        f'<line x1="{x0:.2f}" y1="{y_axis_top:.2f}" x2="{x0:.2f}" y2="{y_axis_bottom:.2f}" '
        'stroke="black" stroke-width="1" />',
    ]

    for i in range(5):
        mu = mu_lo + (mu_hi - mu_lo) * i / 4
        x = sx(mu)
        parts.append(
            f'<text x="{x:.2f}" y="{y_axis_bottom + 18:.2f}" font-size="11" '
            f'text-anchor="middle">{mu:.2f}</text>'
        )
    for i in range(6):
        value = y_max * i / 5
        y = sy(value)
        parts.append(
            f'<text x="{x0 - 8:.2f}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">{value:.2f}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{height - 8:.2f}" font-size="12" '
        'text-anchor="middle">mu</text>'
    )

    ref_y = sy(float(di_target))
    parts.append(
        f'<line id="di-reference" x1="{x0:.2f}" y1="{ref_y:.2f}" x2="{x1:.2f}" y2="{ref_y:.2f}" '
        'stroke="#555555" stroke-width="1" stroke-dasharray="6 4" />'
    )
    parts.append(
        f'<text x="{x1 + 6:.2f}" y="{ref_y + 4:.2f}" font-size="11">di target {di_target:g}</text>'
    )

    legend_y = top + 10
    for name, color, dash, values in series:
        points = [(sx(mu), sy(v)) for mu, v in values if v is not None]
        if len(points) >= 2:
            parts.append(_polyline(points, color, dash))
        for x, y in points:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="{color}" />')
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<line x1="{x1 + 6:.2f}" y1="{legend_y:.2f}" x2="{x1 + 30:.2f}" y2="{legend_y:.2f}" '
            f'stroke="{color}" stroke-width="1.5"{dash_attr} />'
        )
        parts.append(
            f'<text x="{x1 + 36:.2f}" y="{legend_y + 4:.2f}" font-size="11">{name}</text>'
        )
        legend_y += 18

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_curves(result: SweepResult, out_dir, di_target: float = DEFAULT_DI_TARGET):
    """Write sweep.csv and curves.svg into out_dir; returns their paths."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / "sweep.csv"
    svg_path = directory / "curves.svg"
    atomic_write_text(csv_path, sweep_csv(result))
    atomic_write_text(svg_path, sweep_curves_svg(result, di_target))
    return csv_path, svg_path
