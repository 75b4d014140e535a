"""Figure recipes over the collision engine's sweep CSV schema.

A recipe names one or more input CSV files, a figure kind, optional
condition-type overlays and an output path.  Rendering is deterministic
for identical inputs and replaces the output file atomically; nothing
is recomputed from physics, only plotted.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: The named frequency-collision types available as overlays.
NAMED_TYPES = frozenset(range(1, 16)) - {4}

KINDS = ("line_vs_detuning", "map2d", "convergence_map")

REQUIRED_COLUMNS = (
    "axis1",
    "axis2",
    "order",
    "theta_max",
    "state_a",
    "state_b",
    "delta_hz",
    "g_abs_hz",
    "condition_type",
)

#: Fixed overlay style per condition type, for cross-figure consistency.
OVERLAY_STYLES = {
    t: (marker, color)
    for t, (marker, color) in zip(
        sorted(NAMED_TYPES),
        [
            ("o", "#d62728"), ("s", "#1f77b4"), ("^", "#2ca02c"),
            ("v", "#ff7f0e"), ("D", "#9467bd"), ("P", "#8c564b"),
            ("X", "#e377c2"), ("*", "#7f7f7f"), ("h", "#bcbd22"),
            ("p", "#17becf"), ("<", "#aec7e8"), (">", "#ffbb78"),
            ("d", "#98df8a"), ("H", "#ff9896"),
        ],
    )
}

DPI = 150


class RecipeError(ValueError):
    """A recipe is malformed or its inputs cannot be plotted."""


@dataclass(frozen=True)
class FigureRecipe:
    """One figure: inputs, kind, overlays, output path and labels."""

    csv_paths: tuple[str, ...]
    kind: str
    output: str
    overlays: tuple[int, ...] = ()
    xlabel: str = "axis1"
    ylabel: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise RecipeError(f"unknown figure kind {self.kind!r}")
        if not self.csv_paths:
            raise RecipeError("recipe names no input CSV")
        bad = [t for t in self.overlays if t not in NAMED_TYPES]
        if bad:
            raise RecipeError(f"unknown overlay condition types {bad}")


def _load_rows(path: str) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise RecipeError(
                    f"{path}: missing CSV columns {missing}"
                )
            rows = list(reader)
    except OSError as exc:
        raise RecipeError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise RecipeError(f"{path}: CSV has no data rows")
    return rows


def _theta(row: dict[str, str]) -> float:
    if row["state_a"].startswith("error:"):
        return math.nan
    try:
        return float(row["theta_max"])
    except ValueError:
        return math.nan


def _series(rows, key):
    return np.array([float(r[key]) for r in rows])


def _render_line(recipe: FigureRecipe, fig) -> None:
    rows = [r for p in recipe.csv_paths for r in _load_rows(p)]
    orders = sorted({int(r["order"]) for r in rows})
    axes = fig.subplots(1 + len(orders), 1, sharex=True)
    by_order = {
        k: sorted(
            (r for r in rows if int(r["order"]) == k),
            key=lambda r: float(r["axis1"]),
        )
        for k in orders
    }
    top = axes[0]
    for k in orders:
        sel = by_order[k]
        x = _series(sel, "axis1")
        delta = np.array([
            abs(float(r["delta_hz"])) if r["delta_hz"] else math.nan
            for r in sel
        ])
        top.plot(x, delta, lw=1.0, label=f"order {k}")
    top.set_yscale("log")
    top.set_ylabel("|Delta| (Hz)")
    top.legend(loc="upper right", fontsize=7)
    for ax, k in zip(axes[1:], orders):
        sel = by_order[k]
        x = _series(sel, "axis1")
        theta = np.array([_theta(r) for r in sel])
        ax.plot(x, theta, lw=1.0, color="black")
        ax.set_ylim(0.0, 0.5 * math.pi * 1.05)
        ax.set_ylabel(f"theta({k}) (rad)")
    axes[-1].set_xlabel(recipe.xlabel)


def _grid(rows):
    """(xs, ys, index) for a complete 2D grid, or raise RecipeError."""
    for r in rows:
        if not r["axis2"]:
            raise RecipeError("2D figure kinds need a second sweep axis")
    xs = sorted({float(r["axis1"]) for r in rows})
    ys = sorted({float(r["axis2"]) for r in rows})
    index = {}
    for r in rows:
        index[(float(r["axis1"]), float(r["axis2"]))] = r
    if len(index) != len(xs) * len(ys):
        raise RecipeError("ragged sweep grid: missing grid points")
    return xs, ys, index


def _render_map2d(recipe: FigureRecipe, fig) -> None:
    rows = [r for p in recipe.csv_paths for r in _load_rows(p)]
    k = max(int(r["order"]) for r in rows)
    sel = [r for r in rows if int(r["order"]) == k]
    xs, ys, index = _grid(sel)
    Z = np.array([
        [_theta(index[(x, y)]) for x in xs] for y in ys
    ])
    ax = fig.subplots()
    mesh = ax.pcolormesh(
        xs, ys, Z, cmap="gray_r", vmin=0.0, vmax=0.5 * math.pi,
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label=f"theta({k}) (rad)")
    for t in recipe.overlays:
        marker, color = OVERLAY_STYLES[t]
        pts = [
            (x, y)
            for (x, y), r in index.items()
            if r["condition_type"] == str(t)
        ]
        if pts:
            px, py = zip(*sorted(pts))
            ax.plot(
                px, py, linestyle="none", marker=marker, color=color,
                markersize=3, label=f"type {t}",
            )
    if recipe.overlays:
        ax.legend(loc="upper right", fontsize=7)
    ax.set_xlabel(recipe.xlabel)
    ax.set_ylabel(recipe.ylabel or "axis2")


def _render_convergence(recipe: FigureRecipe, fig) -> None:
    """Gray-scale log error map over (sweep value, search distance).

    axis1 is the swept parameter, axis2 the search distance and
    theta_max the angle error at that distance; one dashed line per
    perturbative order marks the distance floor(3k/2) past which the
    error vanishes.
    """
    rows = [r for p in recipe.csv_paths for r in _load_rows(p)]
    orders = sorted({int(r["order"]) for r in rows})
    ax = fig.subplots()
    floor = 1e-16
    sel = [r for r in rows if int(r["order"]) == orders[-1]]
    xs, ys, index = _grid(sel)
    Z = np.array([
        [
            math.log10(max(_theta(index[(x, y)]), floor))
            for x in xs
        ]
        for y in ys
    ])
    mesh = ax.pcolormesh(xs, ys, Z, cmap="gray", shading="nearest")
    fig.colorbar(mesh, ax=ax, label="log10 angle error (rad)")
    for k in orders:
        ax.axhline(
            (3 * k) // 2, color="#d62728", lw=1.0, ls="--",
        )
    ax.set_xlabel(recipe.xlabel)
    ax.set_ylabel(recipe.ylabel or "search distance")


_RENDERERS = {
    "line_vs_detuning": _render_line,
    "map2d": _render_map2d,
    "convergence_map": _render_convergence,
}


def render(recipe: FigureRecipe) -> str:
    """Render the recipe to its output path; returns the path.

    Inputs are validated before any output is touched; the file is
    written to a temporary sibling and atomically moved into place, so
    a failed render never leaves a partial image.
    """
    fig = plt.figure(figsize=(6.0, 4.5))
    try:
        _RENDERERS[recipe.kind](recipe, fig)
        out_dir = os.path.dirname(os.path.abspath(recipe.output)) or "."
        fd, tmp = tempfile.mkstemp(suffix=".png", dir=out_dir)
        try:
            with os.fdopen(fd, "wb") as fh:
                fig.savefig(fh, format="png", dpi=DPI)
            os.replace(tmp, recipe.output)
        except BaseException:
            os.unlink(tmp)
            raise
    finally:
        plt.close(fig)
    return recipe.output


def render_auto(csv_path: str, kind: str) -> str:
    """Render a default recipe for one CSV next to it (<csv>.png)."""
    recipe = FigureRecipe(
        csv_paths=(csv_path,),
        kind=kind,
        output=f"{csv_path}.png",
    )
    return render(recipe)
