"""Command-line front end.

Subcommands: ``analyze`` (single-shot collision search), ``sweep`` (1D/2D
parameter grids to CSV), ``census`` (symbolic lattice counts, including a
table mode over every center and schedule layer), and ``fidelity``
(collision-induced gate fidelity bound for one state pair).

Exit codes: 0 when nothing crosses the threshold, 2 when collisions are
found, 1 on error.  Error diagnostics go to stderr, one line each,
prefixed ``error:``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import replace

from . import conditions as cond
from .device import (
    DeviceSpec,
    LatticeSchedule,
    apply_schedule,
    device_to_dict,
    load_device,
)
from .floquet import (
    FloquetState,
    build_subspace,
    computational_states,
    fourier_expand,
    operation_basis,
)
from .perturbation import (
    DEFAULT_DEG_TOL,
    collision_fidelity,
    diagonalize_perturbative,
    gershgorin_bounds,
)
from .search import (
    SPARSE_CUTOFF,
    census_potential,
    find_collisions_general,
    find_collisions_sparse,
)
from .sweep import (
    SweepAxis,
    SweepSpec,
    format_state,
    run_sweep,
    sweep_csv_rows,
)

TWO_PI = 2.0 * math.pi


class CliError(Exception):
    """User-facing failure; rendered as one ``error:`` line, exit 1."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--device", required=True, help="device JSON file")
    p.add_argument("--schedule", help="drive layer name from the file")
    p.add_argument("--order", type=int, default=2, help="perturbative order")
    p.add_argument(
        "--threshold", type=float, default=0.1,
        help="collision-angle threshold in radians",
    )
    p.add_argument(
        "--levels", type=int, help="override the level count of every qubit"
    )
    p.add_argument(
        "--deg-tol", type=float, default=DEFAULT_DEG_TOL,
        help="quasi-degeneracy tolerance in angular units",
    )
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.add_argument("--output", help="structured text report path")
    p.add_argument("--csv", help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcollide",
        description="Floquet frequency-collision analysis for "
        "driven transmon lattices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="single-shot collision search")
    _add_common(p)

    p = sub.add_parser("sweep", help="collision search over a parameter grid")
    _add_common(p)
    p.add_argument(
        "--axis1", required=True, metavar="PATH:START:STOP:POINTS",
        help="first grid axis, e.g. qubits.c.frequency:4.0e9:5.5e9:401",
    )
    p.add_argument(
        "--axis2", metavar="PATH:START:STOP:POINTS", help="second grid axis"
    )
    p.add_argument(
        "--no-retune", action="store_true",
        help="freeze CR tones instead of tracking dressed targets",
    )

    p = sub.add_parser("census", help="symbolic potential-collision counts")
    _add_common(p)
    p.add_argument("--center", help="center qubit id")
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument(
        "--table-iv", action="store_true",
        help="run every (center, schedule) cell declared in the file",
    )

    p = sub.add_parser("fidelity", help="fidelity bound for one state pair")
    _add_common(p)
    p.add_argument(
        "--pair", required=True, metavar="STATE_A/STATE_B",
        help="states as labels;bz (dot-separated), e.g. '1.0;0/0.+;-1'",
    )
    p.add_argument(
        "--gate-time", type=float, required=True, help="gate time in seconds"
    )
    p.add_argument(
        "--dimension", type=int, help="Hilbert-space dimension for the bound"
    )
    return parser


# -- shared plumbing --------------------------------------------------------


def _load(args) -> tuple[DeviceSpec, dict[str, LatticeSchedule]]:
    try:
        device, schedules = load_device(args.device)
    except OSError as exc:
        raise CliError(f"cannot read device file: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"cannot parse device file: {exc}") from exc
    if args.levels is not None:
        if args.levels < 2:
            raise CliError("--levels must be >= 2")
        device = replace(
            device,
            qubits=tuple(replace(q, levels=args.levels) for q in device.qubits),
        )
    return device, schedules


def _pick_schedule(args, schedules) -> LatticeSchedule | None:
    if args.schedule is None:
        if len(schedules) == 1:
            return next(iter(schedules.values()))
        return None
    try:
        return schedules[args.schedule]
    except KeyError:
        raise CliError(
            f"unknown schedule {args.schedule!r}; "
            f"file declares {sorted(schedules)}"
        ) from None


def _ensure_drives(device: DeviceSpec, schedule: LatticeSchedule | None) -> DeviceSpec:
    """Materialize schedule pairs that have no CR drive on the device yet."""
    if schedule is None:
        return device
    have = {
        (d.target, d.cr_target)
        for d in device.drives
        if d.role == "cr_control"
    }
    missing = [p for p in schedule.cr_pairs if p not in have]
    if not missing:
        return device
    return apply_schedule(device, LatticeSchedule(schedule.name, tuple(missing)))


def _device_hash(device: DeviceSpec) -> str:
    blob = json.dumps(device_to_dict(device), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write_text(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def parse_state(text: str) -> FloquetState:
    """Inverse of ``sweep.format_state``: 'l0.l1;b0.b1'."""
    try:
        label_part, _, bz_part = text.partition(";")
        labels = tuple(
            tok if tok in ("+", "-") else int(tok)
            for tok in label_part.split(".")
        )
        bz = tuple(int(tok) for tok in bz_part.split(".")) if bz_part else ()
        return FloquetState(labels, bz)
    except ValueError as exc:
        raise CliError(f"cannot parse state {text!r}: {exc}") from exc


def _report_header(args, device, schedule, command) -> list[str]:
    return [
        f"fcollide {command}",
        f"device_hash: {_device_hash(device)}",
        f"qubits: {' '.join(q.id for q in device.qubits)}",
        f"schedule: {schedule.name if schedule else '(none)'}",
        f"order: {args.order}",
        f"threshold: {_fmt(args.threshold)}",
        f"timing_utc: {time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())}",
    ]


def _maybe_render_figure(csv_path: str | None, kind: str) -> None:
    """Render a companion figure next to the CSV when figkit is installed."""
    if not csv_path or csv_path == "-":
        return
    try:
        from figkit.recipes import render_auto
    except ImportError:
        return
    try:
        render_auto(csv_path, kind)
    except Exception as exc:
        print(f"warning: figure rendering failed: {exc}", file=sys.stderr)


# -- subcommands ------------------------------------------------------------


def cmd_analyze(args) -> int:
    device, schedules = _load(args)
    schedule = _pick_schedule(args, schedules)
    device = _ensure_drives(device, schedule)
    search = (
        find_collisions_sparse
        if len(device.qubits) > SPARSE_CUTOFF
        else find_collisions_general
    )
    records = search(
        device, schedule, k=args.order,
        threshold=args.threshold, deg_tol=args.deg_tol,
    )
    lines = _report_header(args, device, schedule, "analyze")
    lines.append(
        "columns: theta|state_a|state_b|delta_hz|g_abs_hz|condition_type"
    )
    hits = 0
    for r in records:
        flag = r.theta >= args.threshold or r.in_cluster
        hits += bool(flag)
        lines.append(
            "|".join(
                (
                    _fmt(r.theta),
                    format_state(r.state_a.labels, r.state_a.bz),
                    format_state(r.state_b.labels, r.state_b.bz),
                    _fmt(r.delta / TWO_PI),
                    _fmt(abs(r.g) / TWO_PI),
                    "" if r.condition_type is None else str(r.condition_type),
                )
            )
        )
    lines.append(f"collisions: {hits}")
    _write_text(args.output, lines)
    return 2 if hits else 0


def _parse_axis(text: str) -> SweepAxis:
    parts = text.rsplit(":", 3)
    if len(parts) != 4:
        raise CliError(
            f"axis {text!r} must look like PATH:START:STOP:POINTS"
        )
    path, start, stop, points = parts
    try:
        return SweepAxis(path, float(start), float(stop), int(points))
    except ValueError as exc:
        raise CliError(f"bad axis {text!r}: {exc}") from exc


def cmd_sweep(args) -> int:
    device, schedules = _load(args)
    schedule = _pick_schedule(args, schedules)
    device = _ensure_drives(device, schedule)
    spec = SweepSpec(
        axis1=_parse_axis(args.axis1),
        axis2=_parse_axis(args.axis2) if args.axis2 else None,
        order=args.order,
        threshold=0.0,
        retune_cr=not args.no_retune,
    )
    try:
        device.with_value(spec.axis1.path, spec.axis1.start)
        if spec.axis2 is not None:
            device.with_value(spec.axis2.path, spec.axis2.start)
    except KeyError as exc:
        raise CliError(str(exc)) from exc
    points = run_sweep(
        device, schedule, spec, jobs=args.jobs, deg_tol=args.deg_tol
    )
    rows = sweep_csv_rows(points)
    _write_text(args.csv, rows)
    if args.output:
        lines = _report_header(args, device, schedule, "sweep")
        lines.append(f"grid_points: {len(points)}")
        errors = sum(p.error is not None for p in points)
        lines.append(f"point_errors: {errors}")
        _write_text(args.output, lines)
    _maybe_render_figure(args.csv, "map2d" if spec.axis2 else "line_vs_detuning")
    hit = any(
        r is not None and r.theta >= args.threshold
        for p in points
        for r in p.records.values()
    )
    return 2 if hit else 0


def _census_lines(census, max_order: int) -> list[str]:
    lines = []
    for k in range(1, max_order + 1):
        lines.append(
            f"center={census.center} schedule={census.schedule} order={k} "
            f"n_F={census.n_F[k]} n_f={census.n_f[k]}"
        )
    return lines


def cmd_census(args) -> int:
    device, schedules = _load(args)
    if args.max_order < 0:
        raise CliError("--max-order must be >= 0")
    lines = ["fcollide census", f"device_hash: {_device_hash(device)}"]
    if args.table_iv:
        try:
            with open(args.device, "r", encoding="utf-8") as fh:
                centers = json.load(fh).get("centers", {})
        except OSError as exc:
            raise CliError(f"cannot read device file: {exc}") from exc
        if not centers:
            raise CliError(
                "the device file declares no census centers for table mode"
            )
        grid: dict[str, dict[str, object]] = {}
        for frame_name, center in centers.items():
            grid[frame_name] = {}
            for sched_name in sorted(schedules):
                grid[frame_name][sched_name] = census_potential(
                    device, schedules[sched_name], center, args.max_order
                )
        sched_names = sorted(schedules)
        lines.append("columns: frame count " + " ".join(sched_names))
        for frame_name in centers:
            for k in range(1, args.max_order + 1):
                row = [str(grid[frame_name][s].n_F[k]) for s in sched_names]
                lines.append(f"{frame_name} n_F({k}) " + " ".join(row))
            for k in range(1, args.max_order + 1):
                row = [str(grid[frame_name][s].n_f[k]) for s in sched_names]
                lines.append(f"{frame_name} n_f({k}) " + " ".join(row))
        _write_text(args.output, lines)
        return 0
    schedule = _pick_schedule(args, schedules)
    if schedule is None:
        raise CliError("census needs --schedule (or a single-schedule file)")
    if args.center is None:
        raise CliError("census needs --center (or --table-iv)")
    if not any(q.id == args.center for q in device.qubits):
        raise CliError(f"unknown center {args.center!r}")
    if args.max_order == 0:
        lines.append(
            f"center={args.center} schedule={schedule.name} (empty census)"
        )
        _write_text(args.output, lines)
        return 0
    census = census_potential(device, schedule, args.center, args.max_order)
    lines.extend(_census_lines(census, args.max_order))
    _write_text(args.output, lines)
    return 0


def cmd_fidelity(args) -> int:
    device, schedules = _load(args)
    schedule = _pick_schedule(args, schedules)
    device = _ensure_drives(device, schedule)
    a_text, sep, b_text = args.pair.partition("/")
    if not sep:
        raise CliError("--pair must be STATE_A/STATE_B")
    state_a = parse_state(a_text)
    state_b = parse_state(b_text)

    fourier = fourier_expand(device)
    basis = operation_basis(device, schedule)
    for s in (state_a, state_b):
        try:
            basis.validate_state(s)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    seeds = computational_states(basis, len(fourier.axes))
    radius = (3 * args.order) // 2
    sub = build_subspace(
        fourier, seeds + [state_a, state_b], radius, basis=basis
    )
    eff = diagonalize_perturbative(sub, args.order, tol=args.deg_tol)
    i = sub.index(state_a)
    j = sub.index(state_b)
    delta = eff.detuning(i, j)
    g = eff.coupling(i, j)
    if delta == 0.0 and g == 0.0:
        raise CliError("pair is exactly degenerate and uncoupled")
    theta = eff.angle(i, j)
    r = math.hypot(delta, 2.0 * abs(g))
    delta_r = r - abs(delta)
    dbz = tuple(y - x for x, y in zip(state_a.bz, state_b.bz))
    m_wd = sum(n * w for n, w in zip(dbz, fourier.axes))
    dim = args.dimension if args.dimension is not None else len(sub.states)
    cluster = sorted(
        set(eff.split.clusters[eff.split.cluster_of[i]])
        | set(eff.split.clusters[eff.split.cluster_of[j]])
        | {i, j}
    )
    dr_max, theta_max = gershgorin_bounds(eff, cluster, (i, j))
    est = collision_fidelity(
        theta=theta,
        delta_r=delta_r,
        m=1,
        w_d=m_wd,
        T=args.gate_time,
        D=dim,
        r=r,
        delta_r_max=dr_max,
        theta_max=theta_max,
    )
    lines = _report_header(args, device, schedule, "fidelity")
    lines += [
        f"pair: {a_text}/{b_text}",
        f"theta: {_fmt(est.theta)}",
        f"r_hz: {_fmt(est.r / TWO_PI)}",
        f"delta_r_hz: {_fmt(est.delta_r / TWO_PI)}",
        f"f_ab: {_fmt(est.f_ab)}",
        f"fidelity: {_fmt(est.F)}",
        f"gershgorin_delta_r_hz: {_fmt(dr_max / TWO_PI)}",
        f"gershgorin_theta_max: {_fmt(theta_max)}",
    ]
    _write_text(args.output, lines)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    handlers = {
        "analyze": cmd_analyze,
        "sweep": cmd_sweep,
        "census": cmd_census,
        "fidelity": cmd_fidelity,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
