"""Static SVG line plots for CSV files produced by the experiment runner.

Hand-rolled on purpose: the output is a plain standalone SVG with axes,
tick labels, and one polyline per series, and identical inputs produce
identical bytes (no timestamps, no library version strings).
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import InvalidArgument

__all__ = ["read_csv_columns", "render_csv"]

_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 20, 44
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    """Parse a header-row CSV of floats; malformed content raises InvalidArgument."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc}")
    if not rows:
        raise InvalidArgument(f"{path} is empty")
    header, data_rows = rows[0], rows[1:]
    if not header or any(not name.strip() for name in header):
        raise InvalidArgument(f"{path} has a malformed header row")
    if not data_rows:
        raise InvalidArgument(f"{path} contains no data rows")
    columns = {name: np.empty(len(data_rows)) for name in header}
    for i, row in enumerate(data_rows):
        if len(row) != len(header):
            raise InvalidArgument(f"{path} row {i + 2}: expected {len(header)} fields, got {len(row)}")
        for name, field in zip(header, row):
            try:
                columns[name][i] = float(field)
            except ValueError:
                raise InvalidArgument(f"{path} row {i + 2}: not a number: {field!r}")
    return columns


def _scale(lo: float, hi: float, pixel_lo: float, pixel_hi: float):
    if hi == lo:  # flat series: give it some room
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    lo, hi = lo - 0.05 * span, hi + 0.05 * span

    def to_pixel(x):
        return pixel_lo + (x - lo) / (hi - lo) * (pixel_hi - pixel_lo)

    return lo, hi, to_pixel


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_csv(input_path: str, out_path: str, xy: str | None = None) -> None:
    """Plot a CSV as polylines.

    Default: the first column is the x axis and every other column is a
    series. ``xy="colx:coly"`` instead plots a single coly-vs-colx curve
    (e.g. a velocity-vs-position orbit).
    """
    columns = read_csv_columns(input_path)
    names = list(columns)
    if xy is not None:
        parts = xy.split(":")
        if len(parts) != 2 or not all(p in columns for p in parts):
            raise InvalidArgument(
                f"--xy must be '<xcol>:<ycol>' with columns from {names}, got {xy!r}"
            )
        x_name, series_names = parts[0], [parts[1]]
    else:
        if len(names) < 2:
            raise InvalidArgument("need at least two columns to plot")
        x_name, series_names = names[0], names[1:]

    x = columns[x_name]
    series = [(name, columns[name]) for name in series_names]
    x_lo, x_hi, to_px = _scale(float(x.min()), float(x.max()), _MARGIN_L, _WIDTH - _MARGIN_R)
    y_all = np.concatenate([s for _, s in series])
    y_lo, y_hi, to_py = _scale(float(y_all.min()), float(y_all.max()), _HEIGHT - _MARGIN_B, _MARGIN_T)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    axis_y = _HEIGHT - _MARGIN_B
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{axis_y}" x2="{_WIDTH - _MARGIN_R}" y2="{axis_y}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" y2="{axis_y}" '
        f'stroke="black" stroke-width="1"/>'
    )
    for tick in _ticks(x_lo, x_hi):
        px = to_px(tick)
        parts.append(f'<line x1="{px:.2f}" y1="{axis_y}" x2="{px:.2f}" y2="{axis_y + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{px:.2f}" y="{axis_y + 18}" font-size="11" text-anchor="middle">{tick:.4g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        py = to_py(tick)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{py:.2f}" x2="{_MARGIN_L}" y2="{py:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{py + 4:.2f}" font-size="11" text-anchor="end">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="{(_MARGIN_L + _WIDTH - _MARGIN_R) / 2:.2f}" y="{_HEIGHT - 8}" '
        f'font-size="12" text-anchor="middle">{x_name}</text>'
    )

    for idx, (name, y) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{to_px(xi):.2f},{to_py(yi):.2f}" for xi, yi in zip(x, y))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{_WIDTH - _MARGIN_R - 6}" y="{_MARGIN_T + 14 + 16 * idx}" font-size="12" '
            f'text-anchor="end" fill="{color}">{name}</text>'
        )

    parts.append("</svg>")
    with open(out_path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")
