"""Collision searches: graph-truncated spectral analysis and censuses.

Numeric path: build a radius-limited Floquet subspace around the
computational states, diagonalize perturbatively, and report state pairs
whose collision angle crosses a threshold.  Symbolic path: count potential
collisions and distinct frequency conditions on a lattice without any
numerics, walking the coupling graph in the operation basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from . import conditions as cond
from .device import DeviceSpec, LatticeSchedule, apply_schedule, extract_sublattice
from .floquet import (
    MINUS,
    PLUS,
    FloquetState,
    FloquetSubspace,
    FourierHamiltonian,
    OperationBasis,
    build_subspace,
    computational_states,
    decompose,
    fourier_expand,
    lift,
    operation_basis,
)
from .perturbation import (
    DEFAULT_DEG_TOL,
    EffectiveHamiltonian,
    collision_angle,
    diagonalize_perturbative,
)
from .walks import Walk, is_valid_walk

DEFAULT_THRESHOLD = 0.1

_MISSING = object()

#: Qubit-count cutoff above which analysis defaults to the sparse path.
SPARSE_CUTOFF = 4


@dataclass(frozen=True)
class CollisionRecord:
    """One detected or potential Floquet collision."""

    state_a: FloquetState
    state_b: FloquetState
    order: int
    delta: float
    g: complex
    theta: float
    condition: cond.FrequencyCondition | None = None
    condition_type: int | None = None
    in_cluster: bool = False

    def sort_key(self):
        return (-self.theta, self.state_a, self.state_b)


def _label_key(label):
    return (isinstance(label, str), label)


def _pair_order_key(key):
    labels_a, labels_b, da = key
    return (
        tuple(_label_key(l) for l in labels_a),
        tuple(_label_key(l) for l in labels_b),
        da,
    )


def canonical_pair(
    a: FloquetState, b: FloquetState
) -> tuple[tuple, tuple, tuple]:
    """Translation-invariant unordered key of a state pair."""
    da = tuple(x - y for x, y in zip(b.bz, a.bz))
    k1 = (a.labels, b.labels, da)
    db = tuple(-x for x in da)
    k2 = (b.labels, a.labels, db)
    return min(k1, k2, key=_pair_order_key)


def _cr_roles(device: DeviceSpec) -> list[tuple[str, str]]:
    pairs = []
    for d in device.resolved_drives():
        if d.role == "cr_control" and d.cr_target is not None:
            pairs.append((d.target, d.cr_target))
    return pairs


def _classify(
    device: DeviceSpec,
    condition: cond.FrequencyCondition | None,
) -> int | None:
    if condition is None:
        return None
    ids = [q.id for q in device.qubits]
    for control, target in _cr_roles(device):
        spectators = [q for q in ids if q not in (control, target)]
        t = cond.classify_condition(condition, control, target, spectators)
        if t is not None:
            return t
    return None


def find_collisions_general(
    device: DeviceSpec,
    schedule: LatticeSchedule | None = None,
    k: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    deg_tol: float = DEFAULT_DEG_TOL,
    states_of_interest: Sequence[FloquetState] | None = None,
    radius: int | None = None,
    cap: int | None = None,
) -> list[CollisionRecord]:
    """Order-k collision search over the full computational basis.

    Pairs are deduplicated modulo Brillouin-zone translation; a record is
    emitted when its collision angle reaches the threshold or the pair
    sits inside one quasi-degenerate cluster.
    """
    if k < 1:
        raise ValueError("order must be >= 1")
    basis = operation_basis(device, schedule)
    fourier = fourier_expand(device)
    if states_of_interest is None:
        seeds = computational_states(basis, len(fourier.axes))
    else:
        seeds = list(states_of_interest)
    r = radius if radius is not None else (3 * k) // 2
    sub = build_subspace(fourier, seeds, r, basis=basis, cap=cap)
    eff = diagonalize_perturbative(sub, k, tol=deg_tol)

    seed_idx = set(sub.seed_indices)
    axis_syms = None
    try:
        axis_syms = cond.axis_symbol_map(fourier, basis)
    except ValueError:
        pass

    best: dict[tuple, CollisionRecord] = {}
    n = len(sub.states)
    for i in sorted(seed_idx):
        for j in range(n):
            if j == i:
                continue
            g = eff.coupling(i, j)
            delta = eff.detuning(i, j)
            if g == 0.0 and delta == 0.0:
                continue
            in_cluster = eff.in_same_cluster(i, j)
            if g == 0.0 and not in_cluster:
                continue
            theta = collision_angle(delta, g) if (delta or g) else 0.0
            if theta < threshold and not in_cluster:
                continue
            a, b = sub.states[i], sub.states[j]
            key = canonical_pair(a, b)
            prev = best.get(key)
            if prev is not None and prev.theta >= theta:
                continue
            condition = None
            if axis_syms is not None:
                condition = cond.condition_between(a, b, basis, axis_syms)
                if condition is None:
                    # Symbolically identical quasi-energies: the +/- pair
                    # of a driven gate, not a frequency collision.
                    continue
            best[key] = CollisionRecord(
                state_a=a,
                state_b=b,
                order=k,
                delta=delta,
                g=g,
                theta=theta,
                condition=condition,
                condition_type=_classify(device, condition),
                in_cluster=in_cluster,
            )
    return sorted(best.values(), key=CollisionRecord.sort_key)


def _record_involves(
    record: CollisionRecord, center_index: int
) -> bool:
    a, b = record.state_a, record.state_b
    return a.labels[center_index] != b.labels[center_index]


def find_collisions_sparse(
    device: DeviceSpec,
    schedule: LatticeSchedule | None = None,
    k: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    deg_tol: float = DEFAULT_DEG_TOL,
    cap: int | None = None,
) -> list[CollisionRecord]:
    """Center-by-center collision search for sparse lattices.

    Each center contributes the records that change the center qubit's
    state; processed centers are removed so no pair is reported twice.
    """
    removed: set[str] = set()
    out: list[CollisionRecord] = []
    for q in device.qubits:
        remaining = _without(device, removed)
        if not any(x.id == q.id for x in remaining.qubits):
            continue
        sub_dev = extract_sublattice(remaining, q.id, (3 * k) // 2)
        sched = (
            schedule.restricted([x.id for x in sub_dev.qubits])
            if schedule is not None
            else None
        )
        records = find_collisions_general(
            sub_dev, sched, k, threshold, deg_tol, cap=cap
        )
        ci = [x.id for x in sub_dev.qubits].index(q.id)
        out.extend(r for r in records if _record_involves(r, ci))
        removed.add(q.id)
    return out


def _without(device: DeviceSpec, removed: set[str]) -> DeviceSpec:
    if not removed:
        return device
    keep = [q.id for q in device.qubits if q.id not in removed]
    qubits = tuple(q for q in device.qubits if q.id in keep)
    couplings = tuple(
        c for c in device.couplings if c.qubit_a in keep and c.qubit_b in keep
    )
    drives = tuple(d for d in device.drives if d.target in keep)
    drives = tuple(
        d if not (d.role == "cr_control" and d.cr_target not in keep) else
        _degrade(d)
        for d in drives
    )
    roles = {q: r for q, r in device.roles.items() if q in keep}
    return DeviceSpec(qubits=qubits, couplings=couplings, drives=drives, roles=roles)


def _degrade(drive):
    from dataclasses import replace

    return replace(drive, role="generic", cr_target=None)


# -- symbolic census -------------------------------------------------------


def _effective_supplements(
    frame: DeviceSpec,
    fourier: FourierHamiltonian,
    basis: OperationBasis,
    axis_syms: Sequence[str],
    center: str,
) -> list[cond.FrequencyCondition]:
    """Second-order conditions invisible to bare quasi-energy algebra.

    The two branches of a driven gate target are symbolically degenerate,
    so no walk yields the zero of their drive-induced splitting; that
    splitting vanishes at w_c - w~_t - a_c, added for every gate whose
    branch pair collides through the center (center is the control, the
    target, or coupled to the target).  When two gates drive directly
    coupled targets and one target is the center, the hybridized target
    pair additionally exposes each control to the other gate, opening the
    three inter-control spectator detunings w_c1 - w_c2 and its two
    anharmonically shifted companions.
    """
    import itertools

    ids = set(fourier.qubit_ids)
    coupled = {
        frozenset((c.qubit_a, c.qubit_b)) for c in frame.couplings
    }
    gates = []
    for d in frame.resolved_drives():
        if d.role != "cr_control" or d.cr_target not in ids:
            continue
        t_idx = fourier.qubit_ids.index(d.cr_target)
        axis = basis.dressed_axis.get(t_idx)
        if axis is not None:
            gates.append((d.target, d.cr_target, axis_syms[axis]))

    out: list[cond.FrequencyCondition | None] = []
    for c, t, tone in gates:
        if center in (c, t) or frozenset((t, center)) in coupled:
            out.append(
                cond.FrequencyCondition.from_coeffs(
                    {("w", c): 1, ("w", tone): -1, ("a", c): -1}
                )
            )
    for (c1, t1, _), (c2, t2, _) in itertools.combinations(gates, 2):
        if center not in (t1, t2) or frozenset((t1, t2)) not in coupled:
            continue
        out += [
            cond.FrequencyCondition.from_coeffs(
                {("w", c1): 1, ("w", c2): -1}
            ),
            cond.FrequencyCondition.from_coeffs(
                {("w", c1): 1, ("a", c1): 1, ("w", c2): -1}
            ),
            cond.FrequencyCondition.from_coeffs(
                {("w", c2): 1, ("a", c2): 1, ("w", c1): -1}
            ),
        ]
    return [c for c in out if c is not None]


@dataclass(frozen=True)
class CollisionCensus:
    """Potential-collision counts for one center and schedule."""

    center: str
    schedule: str
    n_F: Mapping[int, int]
    n_f: Mapping[int, int]
    pairs: Mapping[int, tuple]
    conditions: Mapping[int, tuple]


def _census_steps(
    state: FloquetState, fourier: FourierHamiltonian, basis: OperationBasis
) -> list[tuple[Hashable, FloquetState]]:
    """Tagged single-interaction moves from a state in the operation basis.

    Exchange couplings move both endpoints by one level; drive tones move
    the driven qubit by one level and the tone's BZ index by one.  A
    dressed qubit the step does not touch keeps its +/- label: the
    interaction element is independent of that qubit's branch, so the
    cross element between its + and - states cancels exactly.
    """
    out: dict[tuple[Hashable, FloquetState], None] = {}

    def emit(tag, touched, new_levels, new_bz):
        for _, cand in lift(tuple(new_levels), tuple(new_bz), basis):
            if cand == state:
                continue
            if any(
                cand.labels[q] != state.labels[q]
                for q in basis.dressed_axis
                if q not in touched
            ):
                continue
            out[(tag, cand)] = None

    for br in decompose(state, basis):
        levels = br.levels
        for i, j, val in fourier.couplings:
            if val == 0.0:
                continue
            tag = ("coupling", i, j)
            for di in (1, -1):
                for dj in (1, -1):
                    li, lj = levels[i] + di, levels[j] + dj
                    if not (
                        0 <= li < fourier.nlevels[i]
                        and 0 <= lj < fourier.nlevels[j]
                    ):
                        continue
                    new_levels = list(levels)
                    new_levels[i] = li
                    new_levels[j] = lj
                    emit(tag, (i, j), new_levels, br.bz)
        for q, axis, amp, _ in fourier.drives:
            if amp == 0.0:
                continue
            tag = ("drive", q, axis)
            for dq in (1, -1):
                for dn in (1, -1):
                    lq = levels[q] + dq
                    if not 0 <= lq < fourier.nlevels[q]:
                        continue
                    new_levels = list(levels)
                    new_levels[q] = lq
                    new_bz = list(br.bz)
                    new_bz[axis] += dn
                    emit(tag, (q,), new_levels, new_bz)
    return list(out)


def census_potential(
    device: DeviceSpec,
    schedule: LatticeSchedule,
    center: str,
    max_order: int = 2,
    amplitude: float | None = None,
    feasibility=cond.feasible,
    radius: int | None = None,
) -> CollisionCensus:
    """Count potential collisions around a center under one drive layer.

    The frame is the radius-``max_order`` sublattice of the center
    (``radius`` overrides); its computational states seed every walk.  An order-k potential collision
    is a pair of distinct states joined by a length-k walk over coupling
    and drive edges whose edge union is connected and touches the center,
    counted modulo BZ translation, and whose degeneracy condition can vanish for
    realistic transmon parameters.  Frequency conditions are collected
    from every state pair along every such walk and accumulate over
    orders; from second order on, the effective-splitting conditions of
    symbolically degenerate branch pairs join them (see
    ``_effective_supplements``).
    """
    from dataclasses import replace as _replace

    # The census is symbolic and layer-scoped: the schedule alone defines
    # the drive configuration, so static drives on the device are ignored.
    driven_full = apply_schedule(
        _replace(device, drives=()),
        schedule,
        **({} if amplitude is None else {"amplitude": amplitude}),
        dressed=False,
    )
    frame = extract_sublattice(
        driven_full, center, max_order if radius is None else radius
    )
    # A control whose gate target fell outside the sublattice keeps its
    # tone: the tone is a graph edge on the control, and its frequency
    # symbol is looked up from the cut target on the full lattice.
    fourier = fourier_expand(frame)
    basis = operation_basis(frame)
    axis_syms = cond.axis_symbol_map(fourier, basis, lattice=device)
    center_idx = fourier.qubit_ids.index(center)
    comp = computational_states(basis, len(fourier.axes))
    edge_tags = [
        ("coupling", i, j) for i, j, v in fourier.couplings if v != 0.0
    ]
    edge_tags += [
        ("drive", q, axis) for q, axis, amp, _ in fourier.drives if amp != 0.0
    ]

    step_cache: dict[FloquetState, dict[Hashable, list[FloquetState]]] = {}

    def steps_by_tag(s: FloquetState) -> dict[Hashable, list[FloquetState]]:
        got = step_cache.get(s)
        if got is None:
            got = {}
            for tag, nxt in _census_steps(s, fourier, basis):
                got.setdefault(tag, []).append(nxt)
            step_cache[s] = got
        return got

    supplements = [
        c
        for c in _effective_supplements(frame, fourier, basis, axis_syms, center)
        if feasibility(c)
    ]

    cond_cache: dict[tuple, cond.FrequencyCondition | None] = {}
    feas_cache: dict[cond.FrequencyCondition | None, bool] = {}

    def pair_condition(a: FloquetState, b: FloquetState):
        key = (a, b)
        got = cond_cache.get(key, _MISSING)
        if got is _MISSING:
            got = cond.condition_between(a, b, basis, axis_syms)
            cond_cache[key] = got
            cond_cache[(b, a)] = got
        return got

    def pair_feasible(c) -> bool:
        got = feas_cache.get(c)
        if got is None:
            got = feasibility(c)
            feas_cache[c] = got
        return got

    n_F: dict[int, int] = {}
    n_f: dict[int, int] = {}
    pair_sets: dict[int, tuple] = {}
    cond_sets: dict[int, tuple] = {}
    cumulative_conditions: set = set()
    for k in range(1, max_order + 1):
        pairs: set = set()
        conds: set = set()

        # A walk's real-space graph depends on its tag sequence alone, so
        # enumerate the valid sequences (connected edge union touching
        # the center) up front instead of testing each walk.
        valid_seqs: list[tuple[Hashable, ...]] = []

        def grow_seq(seq: list[Hashable]) -> None:
            if len(seq) == k:
                walk_probe = Walk(
                    (FloquetState((), ()),) * (k + 1), tuple(seq)
                )
                if is_valid_walk(walk_probe, center_idx):
                    valid_seqs.append(tuple(seq))
                return
            for tag in edge_tags:
                seq.append(tag)
                grow_seq(seq)
                seq.pop()

        grow_seq([])

        def visit(path: list[FloquetState], seq: tuple[Hashable, ...]) -> None:
            depth = len(path) - 1
            if depth == k:
                a, b = path[0], path[-1]
                if a == b:
                    return
                if not pair_feasible(pair_condition(a, b)):
                    return
                pairs.add(canonical_pair(a, b))
                for x in range(len(path)):
                    for y in range(x + 1, len(path)):
                        c = pair_condition(path[x], path[y])
                        if c is not None and pair_feasible(c):
                            conds.add(c)
                return
            for nxt in steps_by_tag(path[-1]).get(seq[depth], ()):
                path.append(nxt)
                visit(path, seq)
                path.pop()

        for seq in valid_seqs:
            for a in comp:
                visit([a], seq)

        cumulative_conditions |= conds
        if k >= 2:
            cumulative_conditions.update(supplements)
        n_F[k] = len(pairs)
        n_f[k] = len(cumulative_conditions)
        pair_sets[k] = tuple(sorted(pairs, key=_pair_order_key))
        cond_sets[k] = tuple(sorted(cumulative_conditions, key=str))
    return CollisionCensus(
        center=center,
        schedule=schedule.name,
        n_F=n_F,
        n_f=n_f,
        pairs=pair_sets,
        conditions=cond_sets,
    )


# -- CR-derived metrics ----------------------------------------------------


def effective_cr_coefficients(
    eff: EffectiveHamiltonian,
    rotary_amplitude: float = 0.0,
) -> tuple[float, float, float, float]:
    """(Omega_ZX, Omega_IX, Delta_gpm, Delta_epm) of a CR pair.

    Reads the computational diagonal of an effective Hamiltonian computed
    in the +/- operation basis of a single CR pair; the rotary amplitude
    (angular) shifts both +/- detunings per the dressed-basis relations
    Delta_gpm = Omega_t + Omega_IX + Omega_ZX and
    Delta_epm = Omega_t + Omega_IX - Omega_ZX.
    """
    if eff.states is None:
        raise ValueError("effective Hamiltonian carries no state labels")

    def locate(control_level, sign):
        for i, s in enumerate(eff.states):
            labels = s.labels
            dressed = [l for l in labels if l in (PLUS, MINUS)]
            if len(dressed) != 1:
                continue
            pos = labels.index(dressed[0])
            others = [l for q, l in enumerate(labels) if q != pos]
            if labels[pos] == sign and others == [control_level] + [0] * (
                len(others) - 1
            ) and all(n == 0 for n in s.bz):
                return i
        raise ValueError("basis is not CR-shaped")

    d_g = eff.detuning(locate(0, PLUS), locate(0, MINUS))
    d_e = eff.detuning(locate(1, PLUS), locate(1, MINUS))
    omega_zx = 0.5 * (d_g - d_e)
    omega_ix = 0.5 * (d_g + d_e) - rotary_amplitude
    return omega_zx, omega_ix, d_g, d_e


def max_collision_angle(
    device: DeviceSpec,
    k: int,
    radius: int | None = None,
    schedule: LatticeSchedule | None = None,
    deg_tol: float = DEFAULT_DEG_TOL,
    cap: int | None = None,
) -> float:
    """Largest order-k collision angle touching the computational states."""
    records = find_collisions_general(
        device,
        schedule,
        k,
        threshold=0.0,
        deg_tol=deg_tol,
        radius=radius,
        cap=cap,
    )
    return max((r.theta for r in records), default=0.0)


def convergence_error(
    device: DeviceSpec,
    k: int,
    d: int,
    d_ref: int = 7,
    schedule: LatticeSchedule | None = None,
    deg_tol: float = DEFAULT_DEG_TOL,
    cap: int | None = None,
) -> float:
    """|theta_k(search distance d) - theta_k(reference distance)|."""
    if d > d_ref:
        raise ValueError("d must not exceed the reference distance")
    if d == d_ref:
        return 0.0
    t_d = max_collision_angle(device, k, d, schedule, deg_tol, cap)
    t_ref = max_collision_angle(device, k, d_ref, schedule, deg_tol, cap)
    return abs(t_d - t_ref)
