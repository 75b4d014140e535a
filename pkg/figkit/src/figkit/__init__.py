"""Publication-style figures from fcollide CSV outputs.

The package renders three figure kinds from the collision engine's
sweep CSV files: stacked line plots of detunings and collision angles
versus a swept parameter, 2D gray-scale collision-angle maps with
condition-type overlays, and log-scale convergence-error maps.  It
performs no physics computation of its own; it plots exactly what the
engine emitted.
"""

from .recipes import FigureRecipe, RecipeError, render, render_auto

__version__ = "0.1.0"

__all__ = ["FigureRecipe", "RecipeError", "render", "render_auto"]
