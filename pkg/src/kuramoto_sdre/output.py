"""Run artifacts: trajectory CSV, summary JSON and SVG time-series plots."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .scenarios import SCHEMA_VERSION, ResolvedScenario, Scenario
from .sim import RunSummary, Trajectory

__all__ = [
    "trajectory_header",
    "format_number",
    "write_trajectory_csv",
    "summary_document",
    "write_summary_json",
    "svg_line_plot",
    "write_plots",
]

PLOT_FILES = ("phase_differences.svg", "errors.svg", "controls.svg")


def format_number(v: float) -> str:
    """9 significant digits, fixed ``nan``/``inf`` spellings."""
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.9g}"


def trajectory_header(n: int) -> list[str]:
    cols = ["t"]
    cols += [f"theta_{i}" for i in range(1, n + 1)]
    cols += [f"x_{i}" for i in range(1, n)]
    cols += [f"e_{i}" for i in range(1, n)]
    cols += [f"u_{i}" for i in range(1, n + 1)]
    cols += ["care_residual", "fallback"]
    return cols


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> Path:
    path = Path(path)
    n = traj.theta.shape[1]
    lines = [",".join(trajectory_header(n))]
    for i in range(len(traj)):
        row = [traj.t[i], *traj.theta[i], *traj.x[i], *traj.e[i], *traj.u[i], traj.care_residual[i]]
        cells = [format_number(float(v)) for v in row]
        cells.append("1" if traj.fallback[i] else "0")
        lines.append(",".join(cells))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a).ravel()]


def summary_document(
    resolved: ResolvedScenario,
    source: Scenario,
    summary: RunSummary,
    u_ss: np.ndarray,
    wall_time_s: float,
) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "scenario": resolved.as_scenario().to_json(),
        "source_scenario": source.to_json(),
        "seed": resolved.seed,
        "final_e_inf_norm": summary.final_e_inf_norm,
        "final_u": _floats(summary.final_u),
        "u_ss_oracle": _floats(u_ss),
        "peak_u_inf_norm": summary.peak_u_inf_norm,
        "any_fallback": summary.any_fallback,
        "negative_final_u": bool(np.any(summary.final_u < 0)),
        "steps": summary.steps,
        "wall_time_s": wall_time_s,
    }


def write_summary_json(path: str | Path, doc: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def svg_line_plot(
    t: np.ndarray,
    series: np.ndarray,
    labels: Sequence[str],
    title: str,
    ylabel: str,
    width: int = 640,
    height: int = 400,
    max_legend: int = 10,
) -> str:
    """One polyline per column of ``series`` against ``t``; linear axes."""
    series = np.atleast_2d(np.asarray(series, dtype=float))
    if series.shape[0] != len(t):
        series = series.T
    left, right, top, bottom = 60, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom
    t0, t1 = float(t[0]), float(t[-1])
    finite = series[np.isfinite(series)]
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1.0, y1 + 1.0
    if t1 - t0 < 1e-12:
        t1 = t0 + 1.0

    def px(tv):
        return left + (tv - t0) / (t1 - t0) * pw

    def py(yv):
        return top + (y1 - yv) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        tv = t0 + frac * (t1 - t0)
        yv = y0 + frac * (y1 - y0)
        out.append(f'<text x="{px(tv):.1f}" y="{top + ph + 15}" text-anchor="middle" '
                   f'font-size="10">{tv:.3g}</text>')
        out.append(f'<text x="{left - 5}" y="{py(yv) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
               f'font-size="11">t [s]</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="11" '
               f'transform="rotate(-90 14 {top + ph / 2:.1f})">{ylabel}</text>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{left}" y1="{py(0):.1f}" x2="{left + pw}" y2="{py(0):.1f}" '
                   f'stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    for j in range(series.shape[1]):
        color = _PALETTE[j % len(_PALETTE)]
        pts = " ".join(f"{px(tv):.2f},{py(yv):.2f}"
                       for tv, yv in zip(t, series[:, j]) if math.isfinite(yv))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        if j < max_legend:
            ly = top + 12 + 13 * j
            out.append(f'<line x1="{left + pw - 70}" y1="{ly - 4}" x2="{left + pw - 55}" '
                       f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw - 50}" y="{ly}" font-size="10">{labels[j]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plots(out_dir: str | Path, traj: Trajectory, name: str) -> list[Path]:
    out_dir = Path(out_dir)
    n = traj.theta.shape[1]
    specs = [
        (traj.x, [f"X_{i}" for i in range(1, n)], f"{name}: phase differences", "X [rad]"),
        (traj.e, [f"e_{i}" for i in range(1, n)], f"{name}: errors", "e [rad]"),
        (traj.u, [f"u_{i}" for i in range(1, n + 1)], f"{name}: control inputs", "u"),
    ]
    paths = []
    for fname, (data, labels, title, ylabel) in zip(PLOT_FILES, specs):
        p = out_dir / fname
        p.write_text(svg_line_plot(traj.t, data, labels, title, ylabel), encoding="utf-8")
        paths.append(p)
    return paths
