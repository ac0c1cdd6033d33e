"""Command-line entry point.

    kuramoto-sdre list
    kuramoto-sdre run <name|path> [<name|path> ...] --out DIR [--seed S] [--set k=v]...
    kuramoto-sdre steady-state <name|path> [--seed S]
    kuramoto-sdre care-solve <file.json>

Exit codes: 0 success (CARE fallbacks are recorded, not fatal), 2 scenario
or input parse failure, 3 output directory not writable, 4 CARE not
stabilizable.

``care-solve`` reads ``{"a": [[...]], "b": [[...]], "q": [[...]], "r": [[...]]}``
with row-major nested lists.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .output import (
    format_number,
    summary_document,
    write_plots,
    write_summary_json,
    write_trajectory_csv,
)
from .riccati import BadWeights, CareProblem, NotStabilizable, solve_care
from .scenarios import Scenario, ScenarioError, builtin_names, resolve_ref
from .sim import run_closed_loop, steady_state_u

log = logging.getLogger("kuramoto_sdre")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_OUTPUT = 3
EXIT_NOT_STABILIZABLE = 4

THREADS_ENV = "KURAMOTO_SDRE_THREADS"


@dataclass(frozen=True)
class OutputBundle:
    trajectory_csv: Path
    summary_json: Path
    plots: list[Path]


class OutputError(OSError):
    pass


def parse_overrides(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ScenarioError(f"override must look like key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def prepare_scenario(ref: str, overrides: dict[str, str], seed: int | None) -> Scenario:
    scenario = resolve_ref(ref).with_overrides(overrides)
    if seed is not None:
        scenario = scenario.with_overrides({"seed": str(seed)})
    return scenario


def cmd_run(scenario: Scenario, out_dir: str | Path) -> OutputBundle:
    """Simulate ``scenario`` and write its CSV, summary and plots into ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"cannot write to {out_dir}: {exc}") from exc

    resolved = scenario.resolve()
    start = time.perf_counter()
    traj, summary = run_closed_loop(resolved.params, resolved.x_des, resolved.weights,
                                    resolved.theta0, resolved.sim)
    wall = time.perf_counter() - start
    u_ss = steady_state_u(resolved.params, resolved.x_des)
    if summary.any_fallback:
        log.warning("%s: CARE fallback used at least once", scenario.name)

    try:
        csv_path = write_trajectory_csv(out_dir / "trajectory.csv", traj)
        doc = summary_document(resolved, scenario, summary, u_ss, wall)
        summary_path = write_summary_json(out_dir / "summary.json", doc)
        plots = write_plots(out_dir, traj, scenario.name)
    except OSError as exc:
        raise OutputError(f"cannot write to {out_dir}: {exc}") from exc
    return OutputBundle(csv_path, summary_path, plots)


def _run_one(args: tuple[Scenario, str]) -> tuple[str, float, list[float]]:
    scenario, out_dir = args
    bundle = cmd_run(scenario, out_dir)
    doc = json.loads(bundle.summary_json.read_text())
    return scenario.name, doc["final_e_inf_norm"], doc["final_u"]


def _max_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
    return os.cpu_count() or 1


def _fmt_vec(v) -> str:
    return "[" + ", ".join(format_number(float(x)) for x in v) + "]"


def _main_run(args: argparse.Namespace) -> int:
    try:
        overrides = parse_overrides(args.set or [])
        scenarios = [prepare_scenario(ref, overrides, args.seed) for ref in args.scenario]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    out = Path(args.out)
    if len(scenarios) == 1:
        jobs = [(scenarios[0], str(out))]
    else:
        names = [s.name for s in scenarios]
        if len(set(names)) != len(names):
            print("error: batch scenarios must have distinct names", file=sys.stderr)
            return EXIT_PARSE
        jobs = [(s, str(out / s.name)) for s in scenarios]

    try:
        if len(jobs) == 1:
            results = [_run_one(jobs[0])]
        else:
            with ProcessPoolExecutor(max_workers=min(_max_workers(), len(jobs))) as pool:
                results = list(pool.map(_run_one, jobs))
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    for name, e_inf, final_u in results:
        print(f"{name}: final |e|_inf = {format_number(e_inf)}, final u = {_fmt_vec(final_u)}")
    return EXIT_OK


def _main_steady_state(args: argparse.Namespace) -> int:
    try:
        scenario = prepare_scenario(args.scenario, {}, args.seed)
        resolved = scenario.resolve()
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    u_ss = steady_state_u(resolved.params, resolved.x_des)
    print(" ".join(format_number(float(v)) for v in u_ss))
    return EXIT_OK


def load_care_problem(path: str | Path) -> CareProblem:
    try:
        doc = json.loads(Path(path).read_text())
        return CareProblem(*(np.asarray(doc[k], dtype=np.float64) for k in ("a", "b", "q", "r")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        # BadWeights is a ValueError as well
        raise ScenarioError(f"cannot read CARE problem from {path}: {exc}") from exc


def _main_care_solve(args: argparse.Namespace) -> int:
    try:
        prob = load_care_problem(args.file)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        sol = solve_care(prob)
    except NotStabilizable as exc:
        print(f"not stabilizable: {exc}", file=sys.stderr)
        return EXIT_NOT_STABILIZABLE
    print("P =")
    for row in sol.p:
        print(" ".join(format_number(float(v)) for v in row))
    print(f"residual_norm = {format_number(sol.residual_norm)}")
    print(f"iterations = {sol.iterations}")
    return EXIT_OK


def _main_list(args: argparse.Namespace) -> int:
    for name in builtin_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuramoto-sdre",
        description="SDRE phase-locking control of Kuramoto oscillator networks.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one or more scenarios")
    p.add_argument("scenario", nargs="+", help="builtin name or scenario JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario field")
    p.set_defaults(func=_main_run)

    p = sub.add_parser("steady-state", help="print the input that holds the target configuration")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_main_steady_state)

    p = sub.add_parser("care-solve", help="solve a CARE given as a JSON matrix file")
    p.add_argument("file")
    p.set_defaults(func=_main_care_solve)

    p = sub.add_parser("list", help="list builtin scenarios")
    p.set_defaults(func=_main_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors already exit with 2
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
