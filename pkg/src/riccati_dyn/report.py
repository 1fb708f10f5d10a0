"""File output: trajectory CSV, JSON reports, SVG polylines and PNG figures."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .integrate import Trajectory

HEADER_1D = ("t", "x", "v")
HEADER_2D = ("t", "x", "v", "y", "vy")


def fmt(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def trajectory_rows(traj: Trajectory) -> np.ndarray:
    return np.column_stack([traj.t, traj.y])


def write_csv(path: str | Path, rows: np.ndarray | Sequence[Sequence[float]],
              header: Sequence[str] | None = None) -> Path:
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header) if header else np.shape(rows)[-1])
    if header is None:
        header = HEADER_1D if rows.shape[1] == 3 else HEADER_2D
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> Path:
    rows = trajectory_rows(traj)
    return write_csv(path, rows, HEADER_1D if rows.shape[1] == 3 else HEADER_2D)


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r if row]
    return header, np.array(data, dtype=float).reshape(-1, len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj)) if math.isfinite(obj) else str(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(report: dict) -> str:
    # repr of a Python float is already shortest round-trip; fmt() pins it
    return json.dumps(_jsonable(report), indent=2, sort_keys=False)


def write_json(path: str | Path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report) + "\n")
    return path


def svg_polyline(xs: Iterable[float], ys: Iterable[float], width: int = 640, height: int = 400) -> str:
    xs, ys = np.asarray(list(xs), float), np.asarray(list(ys), float)
    ok = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[ok], ys[ok]
    if xs.size == 0:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    pad_x, pad_y = 0.05 * dx, 0.05 * dy
    # flip y so that larger values are drawn higher up
    pts = " ".join(f"{x:.6g},{-y:.6g}" for x, y in zip(xs, ys))
    vb = f"{x0 - pad_x:.6g} {-(y1 + pad_y):.6g} {dx + 2 * pad_x:.6g} {dy + 2 * pad_y:.6g}"
    stroke = 0.004 * max(dx, dy)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{vb}" preserveAspectRatio="none">\n'
        f'  <polyline fill="none" stroke="black" stroke-width="{stroke:.6g}" '
        f'vector-effect="non-scaling-stroke" points="{pts}"/>\n</svg>\n'
    )


def write_svg(path: str | Path, xs, ys) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg_polyline(xs, ys))
    return path


def plot_curves(path: str | Path, curves: Sequence[tuple[np.ndarray, np.ndarray, str]],
                xlabel: str, ylabel: str, title: str = "", equal: bool = False) -> Path:
    """Render labelled (xs, ys) curves to a PNG with the Agg backend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for xs, ys, label in curves:
        ax.plot(xs, ys, lw=1.0, label=label or None)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if equal:
        ax.set_aspect("equal", adjustable="datalim")
    if any(lbl for *_, lbl in curves):
        ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
