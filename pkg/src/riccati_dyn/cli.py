"""Command-line front end: ``riccati-dyn {simulate,verify,portrait,lissajous}``.

Exit codes: 0 on success (Completed / all checks pass), 2 when a run ends
Singular or BlowUp (or a verify check fails), 1 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import report
from .analytic import oscillator_solution, velocity_branches
from .errors import RiccatiError
from .integrate import IntegratorConfig, Status, Trajectory, integrate, integrate_window
from .model import (
    CubicRiccati,
    GeneralU,
    NonlinearOscillator,
    Product2D,
    QuadraticU,
    State,
    SystemSpec,
    denominator,
)
from .suites import FIGURE_EIGHT_CONFIG, SUITES, run_suite

SYSTEMS = ("cubic", "oscillator", "general-u", "2d-cubic", "2d-oscillator")
EXIT_OK, EXIT_USAGE, EXIT_STOPPED = 0, 1, 2


class UsageError(Exception):
    pass


def seed_from_env() -> int:
    raw = os.environ.get("RICCATI_DYN_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"RICCATI_DYN_SEED must be an integer, got {raw!r}") from None


# --- system / state resolution -------------------------------------------------


def build_system(a: argparse.Namespace) -> SystemSpec:
    if a.system == "cubic":
        return CubicRiccati(a.k)
    if a.system == "oscillator":
        return NonlinearOscillator(a.k, a.w)
    if a.system == "general-u":
        return GeneralU(QuadraticU(a.c0, a.c1, a.c2), a.k)
    if a.system == "2d-cubic":
        return Product2D(CubicRiccati(a.k1), CubicRiccati(a.k2))
    if a.system == "2d-oscillator":
        return Product2D(NonlinearOscillator(a.k1, a.n1 * a.w0), NonlinearOscillator(a.k2, a.n2 * a.w0))
    raise UsageError(f"unknown system {a.system!r}")


def _branch_index(branch: str) -> int:
    return 0 if branch == "plus" else 1


def _axis_state(spec, E, phi, x0, v0, branch) -> tuple[float, float]:
    """(x, v) for one axis from an explicit state or an energy parametrization."""
    if v0 is not None:
        return (0.0 if x0 is None else x0), v0
    if E is None:
        raise UsageError("give either an initial velocity (--v0/--vy0) or an energy (--E/--E1/--E2)")
    if isinstance(spec, NonlinearOscillator):
        if x0 is not None:
            return x0, velocity_branches(spec, x0, E)[_branch_index(branch)]
        return oscillator_solution(spec.k, spec.w, E, phi, 0.0)
    x = 0.0 if x0 is None else x0
    return x, velocity_branches(spec, x, E)[_branch_index(branch)]


def initial_state(spec: SystemSpec, a: argparse.Namespace) -> State:
    if isinstance(spec, Product2D):
        x, vx = _axis_state(spec.first, a.E1, a.phi1, a.x0, a.v0, a.branch)
        y, vy = _axis_state(spec.second, a.E2, a.phi2, a.y0, a.vy0, a.branch)
        return State.two(x, vx, y, vy)
    x, v = _axis_state(spec, a.E, a.phi, a.x0, a.v0, a.branch)
    return State.one(x, v)


def config_from(a: argparse.Namespace, default: IntegratorConfig = IntegratorConfig()) -> IntegratorConfig:
    return IntegratorConfig(
        rtol=default.rtol if a.rtol is None else a.rtol,
        atol=default.atol if a.atol is None else a.atol,
    )


def exit_for(status: Status) -> int:
    return EXIT_OK if status is Status.COMPLETED else EXIT_STOPPED


def _rows(traj: Trajectory, samples: int | None) -> np.ndarray:
    if not samples:
        return report.trajectory_rows(traj)
    lo, hi = traj.span
    ts = np.linspace(lo, hi, samples)
    return np.column_stack([ts, traj.sample(ts)])


def _status_line(traj: Trajectory) -> dict:
    return {"status": traj.status.value, "t_event": traj.t_event,
            "t_start": traj.t0, "t_final": traj.t_final, "nodes": len(traj)}


# --- subcommands -----------------------------------------------------------------


def cmd_simulate(a: argparse.Namespace) -> int:
    spec = build_system(a)
    st = initial_state(spec, a)
    traj = integrate(spec, st, a.t_end, config_from(a))
    rows = _rows(traj, a.samples)
    out = Path(a.out)
    report.write_csv(out, rows, report.HEADER_1D if rows.shape[1] == 3 else report.HEADER_2D)
    if a.svg:
        report.write_svg(out.with_suffix(".svg"), rows[:, 0], rows[:, 1])
    if a.plot:
        curves = [(rows[:, 0], rows[:, 1], "x")]
        if rows.shape[1] == 5:
            curves.append((rows[:, 0], rows[:, 3], "y"))
        report.plot_curves(out.with_suffix(".png"), curves, "t", "position", f"{a.system}: {traj.status.value}")
    print(report.dumps({"command": "simulate", "system": a.system, **_status_line(traj), "csv": str(out)}))
    return exit_for(traj.status)


def cmd_verify(a: argparse.Namespace) -> int:
    if a.suite not in SUITES:
        raise UsageError(f"unknown suite {a.suite!r}; choose from {', '.join(SUITES)}")
    kw: dict = {}
    if a.suite == "superint-oscillator":
        if (a.n1_given is None) != (a.n2_given is None):
            raise UsageError("give both --n1 and --n2, or neither")
        if a.n1_given is not None:
            kw["pairs"] = ((a.n1_given, a.n2_given),)
        kw["seed"] = seed_from_env()
    elif a.suite == "hamiltonian":
        kw["seed"] = seed_from_env()
    elif a.suite == "superint-dissipative":
        kw.update(k1=a.k1, k2=a.k2, E1=-1.0 if a.E1 is None else a.E1, E2=-5.0 if a.E2 is None else a.E2,
                  T=a.T, config=config_from(a, FIGURE_EIGHT_CONFIG))
    result = run_suite(a.suite, **kw)
    text = report.dumps(result.as_dict())
    print(text)
    if a.out:
        report.write_json(a.out, result.as_dict())
    return EXIT_OK if result.passed else EXIT_STOPPED


def _portrait_seeds(spec, a: argparse.Namespace) -> list[State]:
    if a.energies:
        return [State.one(*_axis_state(spec, E, a.phi, None, None, a.branch)) for E in a.energies]
    n = a.density
    if n <= 0:
        return []
    xs = np.linspace(a.x_min, a.x_max, n)
    vs = np.linspace(a.v_min, a.v_max, n)
    seeds = []
    for x in xs:
        for v in vs:
            if abs(denominator(spec, x, v)) > 1e-6:
                seeds.append(State.one(float(x), float(v)))
    return seeds


def cmd_portrait(a: argparse.Namespace) -> int:
    spec = build_system(a)
    if isinstance(spec, Product2D):
        raise UsageError("portrait needs a one-dimensional system")
    t_end = a.t_end if a.t_end is not None else (
        2 * math.pi / spec.w if isinstance(spec, NonlinearOscillator) else 10.0)
    seeds = _portrait_seeds(spec, a)
    cfg = config_from(a)
    outdir = Path(a.out)
    outdir.mkdir(parents=True, exist_ok=True)

    # trajectories are independent; results are collected in seed order
    with ThreadPoolExecutor(max_workers=max(1, min(8, len(seeds)))) as pool:
        trajs = list(pool.map(lambda s: integrate(spec, s, t_end, cfg), seeds))

    index = []
    curves = []
    for i, (s, tr) in enumerate(zip(seeds, trajs)):
        name = f"seed_{i:04d}.csv"
        rows = _rows(tr, a.samples)
        report.write_csv(outdir / name, rows, report.HEADER_1D)
        gap = float(np.linalg.norm(tr.y[-1] - tr.y[0]))
        index.append([i, s.q[0], s.v[0], tr.status.value, tr.t_final, gap, abs(tr.y[-1][0]), name])
        curves.append((rows[:, 1], rows[:, 2], ""))
    with (outdir / "index.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "x0", "v0", "status", "t_final", "closure_gap", "abs_x_final", "file"])
        for row in index:
            w.writerow([row[0], report.fmt(row[1]), report.fmt(row[2]), row[3], report.fmt(row[4]),
                        report.fmt(row[5]), report.fmt(row[6]), row[7]])
    if a.plot and curves:
        report.plot_curves(outdir / "portrait.png", curves, "x", "v", f"{a.system} phase portrait")
    print(report.dumps({"command": "portrait", "system": a.system, "seeds": len(seeds),
                        "completed": sum(tr.status is Status.COMPLETED for tr in trajs),
                        "index": str(outdir / "index.csv")}))
    return EXIT_OK


def cmd_lissajous(a: argparse.Namespace) -> int:
    spec = build_system(a)
    if not isinstance(spec, Product2D):
        raise UsageError("lissajous needs --system 2d-cubic or 2d-oscillator")
    st = initial_state(spec, a)
    summary: dict = {"command": "lissajous", "system": a.system}
    if a.system == "2d-cubic":
        traj = integrate_window(spec, st, -a.T, a.T, config_from(a, FIGURE_EIGHT_CONFIG))
        summary.update(window=[-a.T, a.T], x_ends=[traj.y[0][0], traj.y[-1][0]],
                       y_ends=[traj.y[0][2], traj.y[-1][2]])
    else:
        period = 2 * math.pi / a.w0
        traj = integrate(spec, st, period, config_from(a))
        summary.update(period=period, closure_gap=float(np.linalg.norm(traj.y[-1] - traj.y[0])))
    rows = _rows(traj, a.samples)
    out = Path(a.out)
    report.write_csv(out, rows, report.HEADER_2D)
    if a.svg:
        report.write_svg(out.with_suffix(".svg"), rows[:, 1], rows[:, 3])
    if a.plot:
        report.plot_curves(out.with_suffix(".png"), [(rows[:, 1], rows[:, 3], "")], "x", "y",
                           f"{a.system} Lissajous curve", equal=True)
    summary.update(_status_line(traj), csv=str(out))
    print(report.dumps(summary))
    return exit_for(traj.status)


# --- parser -------------------------------------------------------------------------


def _system_flags(p: argparse.ArgumentParser, default: str = "cubic") -> None:
    g = p.add_argument_group("system")
    g.add_argument("--system", choices=SYSTEMS, default=default)
    g.add_argument("--k", type=float, default=1.0)
    g.add_argument("--k1", type=float, default=1.0)
    g.add_argument("--k2", type=float, default=1.0)
    g.add_argument("--w", type=float, default=1.0)
    g.add_argument("--w0", type=float, default=1.0)
    g.add_argument("--n1", type=int, default=1)
    g.add_argument("--n2", type=int, default=1)
    g.add_argument("--c0", type=float, default=0.0, help="U = c0 + c1 x + c2 x^2 (general-u)")
    g.add_argument("--c1", type=float, default=0.0)
    g.add_argument("--c2", type=float, default=1.0)
    s = p.add_argument_group("initial data")
    s.add_argument("--E", type=float)
    s.add_argument("--E1", type=float)
    s.add_argument("--E2", type=float)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--phi1", type=float, default=0.0)
    s.add_argument("--phi2", type=float, default=0.0)
    s.add_argument("--x0", type=float)
    s.add_argument("--v0", type=float)
    s.add_argument("--y0", type=float)
    s.add_argument("--vy0", type=float)
    s.add_argument("--branch", choices=("plus", "minus"), default="minus",
                   help="velocity branch used with an energy parametrization")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--samples", type=int, help="resample uniformly with dense output")
    p.add_argument("--svg", action="store_true", help="write an SVG polyline next to the CSV")
    p.add_argument("--plot", action="store_true", help="write a PNG figure next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riccati-dyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory and write a CSV")
    _system_flags(p)
    _run_flags(p)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run a verification suite and print a JSON report")
    p.add_argument("--suite", required=True)
    p.add_argument("--n1", dest="n1_given", type=int)
    p.add_argument("--n2", dest="n2_given", type=int)
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=1.0)
    p.add_argument("--E1", type=float)
    p.add_argument("--E2", type=float)
    p.add_argument("--T", type=float, default=50.0, help="figure-eight half window")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--out", help="also write the JSON report to this path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("portrait", help="grid of (x, v) trajectories, one CSV each plus index.csv")
    _system_flags(p)
    _run_flags(p)
    p.add_argument("--t-end", type=float, help="default: one period (oscillator) or 10")
    p.add_argument("--x-min", type=float, default=-1.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--v-min", type=float, default=-1.0)
    p.add_argument("--v-max", type=float, default=1.0)
    p.add_argument("--density", type=int, default=5, help="grid points per axis")
    p.add_argument("--energies", type=float, nargs="*", help="seed from energy levels instead of a grid")
    p.add_argument("--out", default="portrait")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("lissajous", help="planar (x, y) orbit of a 2D system")
    _system_flags(p, default="2d-oscillator")
    _run_flags(p)
    p.add_argument("--T", type=float, default=50.0, help="half window for 2d-cubic runs")
    p.add_argument("--out", default="lissajous.csv")
    p.set_defaults(func=cmd_lissajous)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"riccati-dyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RiccatiError, ValueError, TypeError) as exc:
        print(f"riccati-dyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
