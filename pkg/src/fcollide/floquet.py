"""Floquet Hamiltonian of a driven lattice as a bounded-radius state graph.

The time-periodic Hamiltonian is Fourier expanded over one integer harmonic
axis per distinct drive frequency.  States carry per-qubit labels (bare
level indices, or the dressed +/- labels of CR-target qubits) plus a
Brillouin-zone (BZ) harmonic vector.  The graph over these states, with
matrix elements of the Fourier components as edges, is expanded breadth
first from seed states and truncated by graph radius.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .device import TWO_PI, DeviceSpec, duffing_level_energy

#: Hard cap on subspace size unless overridden by the environment.
DEFAULT_MAX_SUBSPACE = 20000

#: Drives closer in frequency than this (Hz) share one BZ axis.
DEFAULT_MERGE_TOL = 1.0

#: Matrix entries smaller than this fraction of the largest static energy
#: scale are treated as structural zeros.
STRUCTURAL_ZERO = 1e-15

SQRT_HALF = 1.0 / math.sqrt(2.0)

PLUS = "+"
MINUS = "-"


def max_subspace_cap() -> int:
    env = os.environ.get("FCOLLIDE_MAX_SUBSPACE")
    if env:
        return int(env)
    return DEFAULT_MAX_SUBSPACE


class SubspaceCapError(RuntimeError):
    """Graph expansion exceeded the configured state cap."""


class FloquetState(NamedTuple):
    """Per-qubit labels plus a BZ harmonic vector.

    Labels are integers for bare levels; CR-target qubits use "+" and "-"
    for the two dressed computational labels and plain integers >= 2 above.
    """

    labels: tuple
    bz: tuple

    def translated(self, shift: Sequence[int]) -> "FloquetState":
        return FloquetState(self.labels, tuple(n + s for n, s in zip(self.bz, shift)))


class Branch(NamedTuple):
    """One bare product component of an operation-basis state."""

    coeff: float
    levels: tuple
    bz: tuple


@dataclass(frozen=True)
class FourierHamiltonian:
    """Fourier components of the lattice Hamiltonian in angular units.

    ``axes`` holds the distinct drive angular frequencies, one BZ axis per
    entry.  ``couplings`` are (qubit_i, qubit_j, J) static exchange terms;
    ``drives`` are (qubit, axis, amplitude, phase) with the convention that
    the +1 harmonic on the axis carries (amplitude/2) e^{i phase} (a+adag).
    """

    qubit_ids: tuple[str, ...]
    nlevels: tuple[int, ...]
    energies: tuple[tuple[float, ...], ...]
    axes: tuple[float, ...]
    couplings: tuple[tuple[int, int, float], ...]
    drives: tuple[tuple[int, int, float, float], ...]

    def component(self, harmonic: Sequence[int]) -> list[tuple]:
        """Terms of H^(n) for the harmonic vector ``n``.

        Returns a list of term descriptors: ("energy", qubit, level, value)
        and ("coupling", i, j, J) for the static component, and
        ("drive", qubit, value) for the single-harmonic components.
        """
        n = tuple(harmonic)
        if len(n) != len(self.axes):
            raise ValueError("harmonic vector has wrong dimension")
        if all(c == 0 for c in n):
            out: list[tuple] = []
            for q, levels in enumerate(self.energies):
                for l, en in enumerate(levels):
                    out.append(("energy", q, l, en))
            for i, j, val in self.couplings:
                out.append(("coupling", i, j, val))
            return out
        if sum(abs(c) for c in n) != 1:
            return []
        axis = next(i for i, c in enumerate(n) if c != 0)
        sign = n[axis]
        out = []
        for q, ax, amp, phase in self.drives:
            if ax == axis and amp != 0.0:
                out.append(("drive", q, 0.5 * amp * complex(math.cos(sign * phase), math.sin(sign * phase))))
        return out

    def harmonics(self) -> list[tuple[int, ...]]:
        dim = len(self.axes)
        out = [tuple([0] * dim)]
        for axis in sorted({ax for _, ax, amp, _ in self.drives if amp != 0.0}):
            for sign in (1, -1):
                vec = [0] * dim
                vec[axis] = sign
                out.append(tuple(vec))
        return out

    @property
    def static_scale(self) -> float:
        flat = [abs(e) for levels in self.energies for e in levels]
        return max(flat) if flat else 1.0


@dataclass(frozen=True)
class OperationBasis:
    """Dressed-basis assignment: which qubits carry +/- labels on which axis."""

    qubit_ids: tuple[str, ...]
    nlevels: tuple[int, ...]
    dressed_axis: Mapping[int, int]

    def is_dressed(self, qubit: int) -> bool:
        return qubit in self.dressed_axis

    def computational_labels(self, qubit: int) -> tuple:
        if qubit in self.dressed_axis:
            return (PLUS, MINUS)
        return (0, 1)

    def validate_state(self, state: FloquetState) -> None:
        if len(state.labels) != len(self.qubit_ids):
            raise ValueError("label count does not match device")
        for q, label in enumerate(state.labels):
            if label in (PLUS, MINUS):
                if not self.is_dressed(q):
                    raise ValueError(
                        f"dressed label on qubit {self.qubit_ids[q]} which is "
                        "not a CR target"
                    )
            elif not 0 <= label < self.nlevels[q]:
                raise ValueError(f"label {label!r} out of range on qubit {q}")


def fourier_expand(device: DeviceSpec, merge_tol: float = DEFAULT_MERGE_TOL) -> FourierHamiltonian:
    """Fourier components of the device Hamiltonian, angular units.

    Drive frequencies within ``merge_tol`` Hz of each other share a BZ axis.
    """
    ids = tuple(q.id for q in device.qubits)
    nlevels = tuple(q.levels for q in device.qubits)
    energies = tuple(
        tuple(duffing_level_energy(q, l) for l in range(q.levels)) for q in device.qubits
    )
    index = {qid: i for i, qid in enumerate(ids)}
    couplings = tuple(
        (index[c.qubit_a], index[c.qubit_b], TWO_PI * c.strength)
        for c in device.couplings
    )
    axis_freqs: list[float] = []
    drives: list[tuple[int, int, float, float]] = []
    for d in device.resolved_drives():
        axis = None
        for i, f in enumerate(axis_freqs):
            if abs(f - d.frequency) <= merge_tol:
                axis = i
                break
        if axis is None:
            axis_freqs.append(d.frequency)
            axis = len(axis_freqs) - 1
        drives.append((index[d.target], axis, TWO_PI * d.amplitude, d.phase))
    return FourierHamiltonian(
        qubit_ids=ids,
        nlevels=nlevels,
        energies=energies,
        axes=tuple(TWO_PI * f for f in axis_freqs),
        couplings=couplings,
        drives=tuple(drives),
    )


def operation_basis(device: DeviceSpec, schedule=None, merge_tol: float = DEFAULT_MERGE_TOL) -> OperationBasis:
    """Dressed +/- basis for every CR-target qubit of the device.

    When a schedule is given its CR pairs are checked for overlap; Floquet
    analysis of overlapping gates goes through the non-local path instead.
    """
    if schedule is not None:
        seen: set[str] = set()
        for c, t in schedule.cr_pairs:
            if c in seen or t in seen:
                raise ValueError(
                    f"schedule {schedule.name}: overlapping CR pairs require "
                    "the non-local analysis path"
                )
            seen.update((c, t))
    fourier = fourier_expand(device, merge_tol)
    index = {qid: i for i, qid in enumerate(fourier.qubit_ids)}
    dressed: dict[int, int] = {}
    for qid, freq in device.dressed_targets().items():
        axis = None
        for i, f in enumerate(fourier.axes):
            if abs(f - TWO_PI * freq) <= TWO_PI * merge_tol:
                axis = i
                break
        if axis is None:
            raise ValueError(f"no drive axis found for CR target {qid}")
        dressed[index[qid]] = axis
    return OperationBasis(fourier.qubit_ids, fourier.nlevels, dressed)


# -- branch decomposition --------------------------------------------------


def decompose(state: FloquetState, basis: OperationBasis) -> list[Branch]:
    """Bare product components of an operation-basis state.

    A "+" or "-" label on a dressed qubit splits into the level-0 branch at
    the state's BZ vector and the level-1 branch one harmonic down on the
    qubit's axis, with amplitudes (1, +/-1)/sqrt(2).
    """
    branches = [Branch(1.0, (), state.bz)]
    for q, label in enumerate(state.labels):
        if label in (PLUS, MINUS):
            axis = basis.dressed_axis[q]
            sign = 1.0 if label == PLUS else -1.0
            new = []
            for br in branches:
                new.append(Branch(br.coeff * SQRT_HALF, br.levels + (0,), br.bz))
                shifted = tuple(
                    n - 1 if i == axis else n for i, n in enumerate(br.bz)
                )
                new.append(Branch(br.coeff * sign * SQRT_HALF, br.levels + (1,), shifted))
            branches = new
        else:
            branches = [Branch(br.coeff, br.levels + (label,), br.bz) for br in branches]
    return branches


def lift(levels: Sequence[int], bz: Sequence[int], basis: OperationBasis) -> list[tuple[float, FloquetState]]:
    """Operation-basis states overlapping a bare product state."""
    parts: list[tuple[float, tuple, tuple]] = [(1.0, (), tuple(bz))]
    for q, level in enumerate(levels):
        if basis.is_dressed(q) and level in (0, 1):
            axis = basis.dressed_axis[q]
            new = []
            for coeff, labels, b in parts:
                if level == 0:
                    new.append((coeff * SQRT_HALF, labels + (PLUS,), b))
                    new.append((coeff * SQRT_HALF, labels + (MINUS,), b))
                else:
                    up = tuple(n + 1 if i == axis else n for i, n in enumerate(b))
                    new.append((coeff * SQRT_HALF, labels + (PLUS,), up))
                    new.append((-coeff * SQRT_HALF, labels + (MINUS,), up))
            parts = new
        else:
            parts = [(coeff, labels + (level,), b) for coeff, labels, b in parts]
    return [(coeff, FloquetState(labels, b)) for coeff, labels, b in parts]


# -- matrix elements -------------------------------------------------------


def _bare_diag(levels: Sequence[int], bz: Sequence[int], fourier: FourierHamiltonian) -> float:
    total = 0.0
    for q, l in enumerate(levels):
        total += fourier.energies[q][l]
    for n, w in zip(bz, fourier.axes):
        total += n * w
    return total


def _bare_element(bra: Branch, ket: Branch, fourier: FourierHamiltonian) -> list[tuple[Hashable, complex]]:
    """Tagged Hamiltonian terms between two bare product states.

    Tags name the physical interaction: ("diag",), ("coupling", i, j) or
    ("drive", qubit, axis).
    """
    dn = tuple(a - b for a, b in zip(bra.bz, ket.bz))
    moved = [q for q, (a, b) in enumerate(zip(bra.levels, ket.levels)) if a != b]
    nz_axes = [i for i, c in enumerate(dn) if c != 0]
    out: list[tuple[Hashable, complex]] = []
    if not moved and not nz_axes:
        out.append((("diag",), complex(_bare_diag(bra.levels, bra.bz, fourier))))
        return out
    if not nz_axes and len(moved) == 2:
        i, j = moved
        di = bra.levels[i] - ket.levels[i]
        dj = bra.levels[j] - ket.levels[j]
        if abs(di) == 1 and abs(dj) == 1:
            for a, b, val in fourier.couplings:
                if {a, b} == {i, j}:
                    amp = val * math.sqrt(max(bra.levels[i], ket.levels[i]))
                    amp *= math.sqrt(max(bra.levels[j], ket.levels[j]))
                    out.append((("coupling", a, b), complex(amp)))
        return out
    if len(nz_axes) == 1 and len(moved) == 1:
        axis = nz_axes[0]
        q = moved[0]
        if abs(dn[axis]) == 1 and abs(bra.levels[q] - ket.levels[q]) == 1:
            for dq, ax, amp, phase in fourier.drives:
                if dq == q and ax == axis and amp != 0.0:
                    val = 0.5 * amp * math.sqrt(max(bra.levels[q], ket.levels[q]))
                    val = val * complex(math.cos(dn[axis] * phase), math.sin(dn[axis] * phase))
                    out.append((("drive", q, axis), val))
        return out
    return out


def element_terms(
    a: FloquetState, b: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis
) -> dict[Hashable, complex]:
    """Matrix element <a|H|b> broken down by physical interaction.

    The ("diag",) tag collects bare quasi-energy contributions; for a != b
    it captures the residual detuning between the bare branches of dressed
    labels (zero whenever the drive is exactly resonant on its target).
    """
    out: dict[Hashable, complex] = {}
    for bra in decompose(a, basis):
        for ket in decompose(b, basis):
            for tag, val in _bare_element(bra, ket, fourier):
                contrib = bra.coeff * ket.coeff * val
                if contrib != 0.0:
                    out[tag] = out.get(tag, 0.0) + contrib
    if a != b:
        # The diagonal parts of both states cancel in the off-diagonal
        # element except for branch-energy mismatches; drop exact zeros.
        diag = out.get(("diag",))
        if diag is not None and diag == 0.0:
            del out[("diag",)]
    return out


def matrix_element(
    a: FloquetState, b: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis
) -> complex:
    return sum(element_terms(a, b, fourier, basis).values())


def coupling_element(
    a: FloquetState, b: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis
) -> complex:
    """Off-diagonal Hamiltonian element between two distinct states."""
    if a == b:
        raise ValueError("coupling_element requires distinct states")
    return matrix_element(a, b, fourier, basis)


def bare_quasi_energy(state: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis) -> float:
    """Sum of bare level energies plus the BZ harmonic offset n.w.

    Dressed +/- labels evaluate on their level-0 branch at the state's own
    BZ vector; the +/- splitting is drive induced, not bare.
    """
    levels = tuple(0 if l in (PLUS, MINUS) else l for l in state.labels)
    return _bare_diag(levels, state.bz, fourier)


# -- graph expansion -------------------------------------------------------


def _candidate_neighbors(
    state: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis
) -> set[FloquetState]:
    """States possibly linked to ``state`` by one Hamiltonian term."""
    out: set[FloquetState] = set()
    for br in decompose(state, basis):
        levels = br.levels
        bz = br.bz
        images: list[tuple[tuple, tuple]] = []
        for i, j, _ in fourier.couplings:
            for di in (1, -1):
                for dj in (1, -1):
                    li = levels[i] + di
                    lj = levels[j] + dj
                    if 0 <= li < fourier.nlevels[i] and 0 <= lj < fourier.nlevels[j]:
                        new_levels = list(levels)
                        new_levels[i] = li
                        new_levels[j] = lj
                        images.append((tuple(new_levels), bz))
        for q, axis, amp, _ in fourier.drives:
            if amp == 0.0:
                continue
            for dl in (1, -1):
                lq = levels[q] + dl
                if not 0 <= lq < fourier.nlevels[q]:
                    continue
                new_levels = list(levels)
                new_levels[q] = lq
                for dn in (1, -1):
                    new_bz = tuple(
                        n + dn if i == axis else n for i, n in enumerate(bz)
                    )
                    images.append((tuple(new_levels), new_bz))
        # Residual +/- branch mismatch links states sharing bare content.
        images.append((levels, bz))
        for new_levels, new_bz in images:
            for _, cand in lift(new_levels, new_bz, basis):
                if cand != state:
                    out.add(cand)
    return out


@dataclass(frozen=True)
class FloquetSubspace:
    """Finite Hermitian truncation of the Floquet Hamiltonian.

    ``edge_terms`` maps index pairs (i, j) with i < j to the interaction
    tags and values composing that off-diagonal element.
    """

    states: tuple[FloquetState, ...]
    matrix: np.ndarray
    seed_indices: tuple[int, ...]
    distances: tuple[int, ...]
    radius: int
    fourier: FourierHamiltonian
    basis: OperationBasis
    edge_terms: Mapping[tuple[int, int], tuple[tuple[Hashable, complex], ...]] = field(
        default_factory=dict
    )

    def index(self, state: FloquetState) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(state) from None

    def dump(self) -> dict:
        """Debug serialization: states plus COO sparse matrix entries."""
        entries = []
        n = len(self.states)
        for i in range(n):
            for j in range(n):
                v = self.matrix[i, j]
                if v != 0.0:
                    entries.append([i, j, float(v.real), float(v.imag)])
        return {
            "states": [
                {"labels": [str(l) for l in s.labels], "bz": list(s.bz)}
                for s in self.states
            ],
            "matrix": entries,
        }


def build_subspace(
    device_or_fourier,
    seeds: Iterable[FloquetState],
    radius: int,
    basis: OperationBasis | None = None,
    cap: int | None = None,
) -> FloquetSubspace:
    """Breadth-first expansion of the Floquet graph around seed states.

    Every retained state is within ``radius`` nonzero off-diagonal steps of
    some seed.  Matrix entries below the structural-zero floor are dropped.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if isinstance(device_or_fourier, FourierHamiltonian):
        fourier = device_or_fourier
        if basis is None:
            raise ValueError("basis required when passing a FourierHamiltonian")
    else:
        fourier = fourier_expand(device_or_fourier)
        if basis is None:
            basis = operation_basis(device_or_fourier)
    cap = cap if cap is not None else max_subspace_cap()
    floor = STRUCTURAL_ZERO * fourier.static_scale

    seeds = list(seeds)
    for s in seeds:
        basis.validate_state(s)
    order: list[FloquetState] = []
    dist: dict[FloquetState, int] = {}
    for s in seeds:
        if s not in dist:
            dist[s] = 0
            order.append(s)
    candidates: dict[FloquetState, set[FloquetState]] = {}

    def neighbor_set(s: FloquetState) -> set[FloquetState]:
        cached = candidates.get(s)
        if cached is None:
            cached = _candidate_neighbors(s, fourier, basis)
            candidates[s] = cached
        return cached

    frontier = list(order)
    for shell in range(radius):
        new_frontier: list[FloquetState] = []
        for s in frontier:
            for cand in neighbor_set(s):
                if cand in dist:
                    continue
                val = sum(element_terms(s, cand, fourier, basis).values())
                if abs(val) <= floor:
                    continue
                dist[cand] = shell + 1
                order.append(cand)
                new_frontier.append(cand)
                if len(order) > cap:
                    raise SubspaceCapError(
                        f"subspace exceeded cap of {cap} states; raise "
                        "FCOLLIDE_MAX_SUBSPACE to override"
                    )
        frontier = new_frontier
        if not frontier:
            break

    n = len(order)
    index = {s: i for i, s in enumerate(order)}
    matrix = np.zeros((n, n), dtype=complex)
    edge_terms: dict[tuple[int, int], tuple] = {}
    for i, si in enumerate(order):
        matrix[i, i] = sum(element_terms(si, si, fourier, basis).values()).real
        for cand in neighbor_set(si):
            j = index.get(cand)
            if j is None or j <= i:
                continue
            tdict = element_terms(si, cand, fourier, basis)
            val = sum(tdict.values())
            if abs(val) <= floor:
                continue
            matrix[i, j] = val
            matrix[j, i] = val.conjugate()
            edge_terms[(i, j)] = tuple(tdict.items())
    seed_idx = tuple(index[s] for s in seeds)
    return FloquetSubspace(
        states=tuple(order),
        matrix=matrix,
        seed_indices=seed_idx,
        distances=tuple(dist[s] for s in order),
        radius=radius,
        fourier=fourier,
        basis=basis,
        edge_terms=edge_terms,
    )


def computational_states(basis: OperationBasis, bz_dim: int | None = None) -> list[FloquetState]:
    """The 2^n computational operation-basis states at the zero BZ vector."""
    if bz_dim is None:
        bz_dim = 0
    zero = tuple([0] * bz_dim)
    states = [FloquetState((), zero)]
    for q in range(len(basis.qubit_ids)):
        labels = basis.computational_labels(q)
        states = [
            FloquetState(s.labels + (lab,), s.bz) for s in states for lab in labels
        ]
    return states
