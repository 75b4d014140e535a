"""Command-line entry point: ``figkit <recipe.json>``.

The recipe file is JSON with the fields of FigureRecipe:

    {
      "csv": ["sweep.csv"],
      "kind": "map2d",
      "output": "sweep.png",
      "overlays": [1, 3],
      "xlabel": "detuning (Hz)",
      "ylabel": "rotary amplitude (Hz)"
    }
"""

from __future__ import annotations

import argparse
import json
import sys

from .recipes import FigureRecipe, RecipeError, render


def load_recipe(path: str) -> FigureRecipe:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RecipeError(f"cannot read recipe {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise RecipeError(f"{path}: recipe must be a JSON object")
    csv_paths = data.get("csv", ())
    if isinstance(csv_paths, str):
        csv_paths = (csv_paths,)
    unknown = set(data) - {
        "csv", "kind", "output", "overlays", "xlabel", "ylabel"
    }
    if unknown:
        raise RecipeError(f"{path}: unknown recipe fields {sorted(unknown)}")
    try:
        return FigureRecipe(
            csv_paths=tuple(csv_paths),
            kind=data.get("kind", ""),
            output=data.get("output", ""),
            overlays=tuple(data.get("overlays", ())),
            xlabel=data.get("xlabel", "axis1"),
            ylabel=data.get("ylabel", ""),
        )
    except TypeError as exc:
        raise RecipeError(f"{path}: malformed recipe: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figkit",
        description="render a figure from a collision-sweep CSV recipe",
    )
    parser.add_argument("recipe", help="recipe JSON file")
    args = parser.parse_args(argv)
    try:
        recipe = load_recipe(args.recipe)
        if not recipe.output:
            raise RecipeError("recipe sets no output path")
        out = render(recipe)
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
