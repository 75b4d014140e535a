"""Floquet collision analysis for driven transmon lattices.

The package models simultaneously driven transmon devices as
time-periodic Hamiltonians, diagonalizes them perturbatively in a
truncated Floquet subspace, and searches the result for collisions:
state pairs whose residual coupling is comparable to their quasi-energy
detuning.  On top of the numeric engine sit symbolic frequency-collision
conditions, lattice-wide censuses of potential collisions, parameter
sweeps, and fidelity bounds.
"""

from .conditions import (
    FrequencyCondition,
    classify_condition,
    condition_between,
    feasible,
)
from .device import (
    CouplingSpec,
    DeviceSpec,
    DriveSpec,
    LatticeSchedule,
    PoleError,
    QubitSpec,
    apply_schedule,
    build_heavy_hexagon,
    dressed_frequency,
    extract_sublattice,
    load_device,
    load_fixture,
)
from .floquet import (
    FloquetState,
    FloquetSubspace,
    FourierHamiltonian,
    OperationBasis,
    build_subspace,
    computational_states,
    fourier_expand,
    operation_basis,
)
from .perturbation import (
    EffectiveHamiltonian,
    FidelityEstimate,
    collision_angle,
    collision_fidelity,
    diagonalize_perturbative,
    gershgorin_bounds,
)
from .search import (
    CollisionCensus,
    CollisionRecord,
    census_potential,
    convergence_error,
    effective_cr_coefficients,
    find_collisions_general,
    find_collisions_sparse,
    max_collision_angle,
)
from .sweep import SweepAxis, SweepPoint, SweepSpec, run_sweep
from .walks import Walk, enumerate_walks, is_valid_walk

__version__ = "0.1.0"

__all__ = [
    "CollisionCensus",
    "CollisionRecord",
    "CouplingSpec",
    "DeviceSpec",
    "DriveSpec",
    "EffectiveHamiltonian",
    "FidelityEstimate",
    "FloquetState",
    "FloquetSubspace",
    "FourierHamiltonian",
    "FrequencyCondition",
    "LatticeSchedule",
    "OperationBasis",
    "PoleError",
    "QubitSpec",
    "SweepAxis",
    "SweepPoint",
    "SweepSpec",
    "Walk",
    "apply_schedule",
    "build_heavy_hexagon",
    "build_subspace",
    "census_potential",
    "classify_condition",
    "collision_angle",
    "collision_fidelity",
    "computational_states",
    "condition_between",
    "convergence_error",
    "diagonalize_perturbative",
    "dressed_frequency",
    "effective_cr_coefficients",
    "enumerate_walks",
    "extract_sublattice",
    "feasible",
    "find_collisions_general",
    "find_collisions_sparse",
    "fourier_expand",
    "gershgorin_bounds",
    "is_valid_walk",
    "load_device",
    "load_fixture",
    "max_collision_angle",
    "operation_basis",
    "run_sweep",
]
