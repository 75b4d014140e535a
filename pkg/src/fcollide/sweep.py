"""Parameter sweeps over collision analyses.

A sweep walks a 1D or 2D grid of device parameters, re-runs the collision
search at every grid point, and reports the worst collision angle per
perturbative order together with the offending state pair.  Grid points
are independent pure computations, so they can be mapped in parallel;
results are assembled in row-major grid order regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .device import DeviceSpec, LatticeSchedule, dressed_frequency
from .search import CollisionRecord, find_collisions_general

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SweepAxis:
    """One linear grid over a scalar device parameter.

    ``path`` resolves through ``DeviceSpec.with_value`` (for example
    ``qubits.c.frequency`` or ``drives.0.amplitude``).  Endpoints are
    inclusive.
    """

    path: str
    start: float
    stop: float
    points: int

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ValueError("a sweep axis needs at least 2 points")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """Grid, search order and options for one sweep.

    When ``retune_cr`` is set, every CR drive frequency is recomputed from
    the dressed target frequency at each grid point, so the gate tones
    stay resonant while the swept parameter moves the spectrum.
    """

    axis1: SweepAxis
    axis2: SweepAxis | None = None
    order: int = 2
    threshold: float = 0.0
    retune_cr: bool = True

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("sweep order must be >= 1")

    def grid(self) -> list[tuple[float, float | None]]:
        """Grid points in row-major order, axis 1 outer."""
        v1 = self.axis1.values()
        if self.axis2 is None:
            return [(x, None) for x in v1]
        v2 = self.axis2.values()
        return [(x, y) for x in v1 for y in v2]


@dataclass(frozen=True)
class SweepPoint:
    """Per-order worst-case collision at one grid point.

    ``records`` maps order k to the argmax CollisionRecord, or to None
    when no pair couples at that order.  ``error`` carries a diagnostic
    when the point could not be evaluated (for example a pole in the
    dressed-frequency retuning); the sweep continues past such points.
    """

    axis1: float
    axis2: float | None
    records: dict[int, CollisionRecord | None]
    error: str | None = None


def retune_cr_drives(device: DeviceSpec) -> DeviceSpec:
    """Reset every CR drive tone onto its dressed target frequency."""
    drives = []
    for d in device.drives:
        if d.role == "cr_control" and d.cr_target is not None:
            freq = dressed_frequency(device, d.target, d.cr_target)
            drives.append(replace(d, frequency=freq))
        else:
            drives.append(d)
    return replace(device, drives=tuple(drives))


def _device_at(
    device: DeviceSpec, spec: SweepSpec, x: float, y: float | None
) -> DeviceSpec:
    dev = device.with_value(spec.axis1.path, x)
    if spec.axis2 is not None:
        dev = dev.with_value(spec.axis2.path, y)
    if spec.retune_cr:
        dev = retune_cr_drives(dev)
    return dev


def _eval_point(args) -> SweepPoint:
    device, schedule, spec, x, y, deg_tol, cap = args
    try:
        dev = _device_at(device, spec, x, y)
        records: dict[int, CollisionRecord | None] = {}
        for k in range(1, spec.order + 1):
            found = find_collisions_general(
                dev,
                schedule,
                k=k,
                threshold=spec.threshold,
                deg_tol=deg_tol,
                cap=cap,
            )
            records[k] = found[0] if found else None
        return SweepPoint(axis1=x, axis2=y, records=records)
    except Exception as exc:  # recorded in-row, sweep continues
        return SweepPoint(
            axis1=x,
            axis2=y,
            records={k: None for k in range(1, spec.order + 1)},
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(
    device: DeviceSpec,
    schedule: LatticeSchedule | None,
    spec: SweepSpec,
    jobs: int = 1,
    deg_tol: float | None = None,
    cap: int | None = None,
) -> list[SweepPoint]:
    """Evaluate the sweep grid, optionally across processes.

    The output order is the row-major grid order of ``spec.grid`` for any
    ``jobs`` value, so parallel runs are byte-identical to sequential
    ones.
    """
    from .perturbation import DEFAULT_DEG_TOL

    tol = DEFAULT_DEG_TOL if deg_tol is None else deg_tol
    tasks = [
        (device, schedule, spec, x, y, tol, cap) for x, y in spec.grid()
    ]
    if jobs <= 1:
        return [_eval_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_eval_point, tasks, chunksize=8))


def format_state(labels, bz) -> str:
    """Compact CSV-safe state string, labels then BZ indices."""
    return ".".join(str(v) for v in labels) + ";" + ".".join(
        str(v) for v in bz
    )


CSV_HEADER = (
    "axis1,axis2,order,theta_max,state_a,state_b,"
    "delta_hz,g_abs_hz,condition_type"
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def sweep_csv_rows(points: list[SweepPoint]) -> list[str]:
    """Render sweep results as CSV lines, one row per (point, order)."""
    rows = [CSV_HEADER]
    for p in points:
        ax2 = "" if p.axis2 is None else _fmt(p.axis2)
        for k in sorted(p.records):
            r = p.records[k]
            if p.error is not None:
                msg = p.error.replace(",", ";").replace("\n", " ")
                rows.append(
                    f"{_fmt(p.axis1)},{ax2},{k},nan,error:{msg},,,,"
                )
            elif r is None:
                rows.append(f"{_fmt(p.axis1)},{ax2},{k},0,,,,,")
            else:
                rows.append(
                    ",".join(
                        (
                            _fmt(p.axis1),
                            ax2,
                            str(k),
                            _fmt(r.theta),
                            format_state(r.state_a.labels, r.state_a.bz),
                            format_state(r.state_b.labels, r.state_b.bz),
                            _fmt(r.delta / TWO_PI),
                            _fmt(abs(r.g) / TWO_PI),
                            "" if r.condition_type is None
                            else str(r.condition_type),
                        )
                    )
                )
    return rows
