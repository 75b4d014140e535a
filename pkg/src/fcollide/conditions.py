"""Symbolic frequency-collision conditions.

A condition is an integer-coefficient combination of the device symbols
(one frequency and one anharmonicity per qubit, plus one tone symbol per
drive axis) whose vanishing makes two Floquet quasi-excitation energies
degenerate.  Tone symbols are kept distinct from qubit frequencies so
that conditions reached through different drive axes stay distinguishable;
feasibility and classification fold each tone onto the bare frequency of
the qubit carrying its dressed basis, since a CR tone sits at its target
frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Mapping, Sequence

from .floquet import MINUS, PLUS, FloquetState, FourierHamiltonian, OperationBasis

#: Plausible transmon parameter ranges (Hz) used to decide whether a
#: condition can actually vanish on hardware.
FREQ_RANGE = (4.0e9, 5.5e9)
ANH_RANGE = (-0.4e9, -0.2e9)

#: Prefix marking a drive-tone frequency symbol; the remainder names the
#: qubit whose dressed basis rides the tone.
TONE_PREFIX = "~"


def fold_tones(coeffs: Mapping[tuple[str, str], int]) -> dict[tuple[str, str], int]:
    """Merge each tone symbol onto its carrier qubit's frequency symbol."""
    folded: dict[tuple[str, str], int] = {}
    for (kind, q), c in coeffs.items():
        if q.startswith(TONE_PREFIX):
            q = q[len(TONE_PREFIX):]
        key = (kind, q)
        folded[key] = folded.get(key, 0) + c
    return {k: v for k, v in folded.items() if v != 0}


@dataclass(frozen=True)
class FrequencyCondition:
    """Canonical integer combination of per-qubit frequency symbols.

    ``coefficients`` maps ("w", qubit_id) or ("a", qubit_id) to a nonzero
    integer; the overall gcd is 1 and the first nonzero coefficient in
    symbol order is positive.
    """

    coefficients: tuple[tuple[tuple[str, str], int], ...]

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[tuple[str, str], int]) -> "FrequencyCondition | None":
        items = {s: c for s, c in coeffs.items() if c != 0}
        if not items:
            return None
        g = 0
        for c in items.values():
            g = gcd(g, abs(c))
        ordered = sorted(items.items())
        sign = 1 if ordered[0][1] > 0 else -1
        return cls(tuple((s, sign * c // g) for s, c in ordered))

    def as_dict(self) -> dict[tuple[str, str], int]:
        return dict(self.coefficients)

    @property
    def qubits(self) -> tuple[str, ...]:
        seen = []
        for (kind, q), _ in self.coefficients:
            if q.startswith(TONE_PREFIX):
                q = q[len(TONE_PREFIX):]
            if q not in seen:
                seen.append(q)
        return tuple(seen)

    def value(self, freqs: Mapping[str, float], anhs: Mapping[str, float]) -> float:
        total = 0.0
        for (kind, q), c in self.coefficients:
            if q.startswith(TONE_PREFIX):
                # A CR tone sits at its target's frequency.
                q = q[len(TONE_PREFIX):]
            total += c * (freqs[q] if kind == "w" else anhs[q])
        return total

    def __str__(self) -> str:
        parts = []
        for (kind, q), c in self.coefficients:
            sym = f"w_{q}" if kind == "w" else f"a_{q}"
            if c == 1:
                parts.append(f"+{sym}")
            elif c == -1:
                parts.append(f"-{sym}")
            else:
                parts.append(f"{c:+d}*{sym}")
        return " ".join(parts)


def state_symbol_energy(
    state: FloquetState,
    basis: OperationBasis,
    axis_symbols: Sequence[str],
) -> dict[tuple[str, str], int]:
    """Symbolic quasi-energy of a state, in integer symbol coefficients.

    ``axis_symbols`` gives the tone symbol of each drive axis.  Both
    branch labels of a dressed qubit evaluate on the shared level-0
    rotating-frame energy, so a +/- pair is symbolically degenerate.  An
    integer level of a dressed qubit counts its excitations against the
    tone symbol (rotating-frame bookkeeping); only the anharmonic part
    keeps the qubit's own symbol.  Bare qubits count levels against their
    own frequency symbol.
    """
    coeffs: dict[tuple[str, str], int] = {}

    def add(sym: tuple[str, str], c: int) -> None:
        if c:
            coeffs[sym] = coeffs.get(sym, 0) + c

    for q, label in enumerate(state.labels):
        level = 0 if label in (PLUS, MINUS) else int(label)
        qid = basis.qubit_ids[q]
        axis = basis.dressed_axis.get(q)
        if axis is not None:
            add(("w", axis_symbols[axis]), level)
        else:
            add(("w", qid), level)
        add(("a", qid), level * (level - 1) // 2)
    for axis, n in enumerate(state.bz):
        add(("w", axis_symbols[axis]), n)
    return {s: c for s, c in coeffs.items() if c != 0}


def condition_between(
    a: FloquetState,
    b: FloquetState,
    basis: OperationBasis,
    axis_symbols: Sequence[str],
) -> FrequencyCondition | None:
    """Degeneracy condition for a state pair, or None when the symbolic
    energies coincide identically."""
    ea = state_symbol_energy(a, basis, axis_symbols)
    eb = state_symbol_energy(b, basis, axis_symbols)
    diff = dict(ea)
    for s, c in eb.items():
        diff[s] = diff.get(s, 0) - c
    return FrequencyCondition.from_coeffs(diff)


def axis_symbol_map(
    fourier: FourierHamiltonian,
    basis: OperationBasis,
    lattice=None,
    merge_tol: float = 1.0,
) -> tuple[str, ...]:
    """Tone symbol of each drive axis.

    An axis carrying a dressed qubit is named after that qubit.
    Otherwise, if a wider ``lattice`` is given, the axis is named after
    the lattice qubit whose bare frequency matches the tone: the gate
    target sitting outside the analyzed region still lends the tone its
    name.  Symbols are prefixed with ``~`` so that a tone stays distinct
    from the bare frequency of the qubit it is named after.
    """
    two_pi = 2.0 * math.pi
    out: list[str | None] = [None] * len(fourier.axes)
    for q, axis in basis.dressed_axis.items():
        out[axis] = fourier.qubit_ids[q]
    if lattice is not None:
        for i, freq in enumerate(fourier.axes):
            if out[i] is not None:
                continue
            for q in lattice.qubits:
                if abs(two_pi * q.frequency - freq) <= two_pi * merge_tol:
                    out[i] = q.id
                    break
    missing = [i for i, v in enumerate(out) if v is None]
    if missing:
        raise ValueError(
            f"drive axes {missing} carry no dressed qubit; census conditions "
            "require every axis to map onto a CR target frequency"
        )
    return tuple(TONE_PREFIX + name for name in out)


def feasible(
    condition: FrequencyCondition | None,
    freq_range: tuple[float, float] = FREQ_RANGE,
    anh_range: tuple[float, float] = ANH_RANGE,
) -> bool:
    """Can the condition vanish with every qubit inside the given box?

    Tone symbols fold onto their carrier qubit's frequency first, since a
    CR tone tracks its target.  Qubit parameters vary independently, so
    the reachable interval of the folded linear form is the sum of
    per-symbol extremes; the condition is feasible when that interval
    brackets zero.  A condition whose fold is a pure multiple of one
    qubit's anharmonicity stays feasible: the tone photons absorbed the
    frequency part, leaving a multi-photon sideband onto an anharmonically
    shifted level of the tone's own target, which the tone reaches.
    ``None`` (an identically zero difference) is trivially feasible.
    """
    if condition is None:
        return True
    folded = fold_tones(condition.as_dict())
    lo = hi = 0.0
    for (kind, _), c in folded.items():
        a, b = freq_range if kind == "w" else anh_range
        lo += min(c * a, c * b)
        hi += max(c * a, c * b)
    if lo <= 0.0 <= hi:
        return True
    kinds = {kind for kind, _ in folded}
    qs = {q for _, q in folded}
    return kinds == {"a"} and len(qs) == 1


# -- classification against the named collision types ----------------------


def _pattern_types(control: str, target: str, spectators: Iterable[str]):
    """Canonical coefficient patterns of the named frequency collisions
    for one (control, target, spectator) role assignment."""
    c, t = control, target
    wc, wt = ("w", c), ("w", t)
    ac, at = ("a", c), ("a", t)
    out: list[tuple[int, dict]] = [
        (1, {wc: 1, wt: -1}),
        (2, {wc: 2, wt: -2, ac: 1}),
        (3, {wc: 1, wt: -1, ac: 1}),
        (3, {wt: 1, wc: -1, at: 1}),
        (8, {wc: 1, wt: -1, ac: -1}),
        (9, {wc: 1, wt: -1, ac: 1, at: -1}),
        (10, {wc: 1, wt: -1, ac: 2}),
        (11, {wc: 2, wt: -2, ac: 3}),
    ]
    for s in spectators:
        ws, a_s = ("w", s), ("a", s)
        out += [
            (5, {wc: 1, ws: -1}),
            (6, {wc: 1, ws: -1, ac: 1}),
            (6, {ws: 1, wc: -1, a_s: 1}),
            (7, {wc: 2, wt: -1, ws: -1, ac: 1}),
            (12, {ws: 1, wt: -1}),
            (13, {ws: 1, wt: -1, a_s: 1}),
            (13, {ws: 1, wt: -1, at: -1}),
            (14, {wc: 2, wt: -1, ws: -1, ac: 3}),
            (15, {wc: 1, ws: -1, ac: 2}),
        ]
    return out


def classify_condition(
    condition: FrequencyCondition,
    control: str,
    target: str,
    spectators: Iterable[str] = (),
) -> int | None:
    """Name the collision type of a condition, or None when unclassified.

    Tone symbols fold onto their carrier qubit before matching.  Patterns
    are matched up to an overall sign for one CR role assignment; the
    previously cataloged type 4 is deliberately absent because it does
    not correspond to an actual degeneracy.
    """
    if condition is None:
        return None
    folded = FrequencyCondition.from_coeffs(fold_tones(condition.as_dict()))
    if folded is None:
        return None
    want = folded.as_dict()
    for type_id, pattern in _pattern_types(control, target, spectators):
        canon = FrequencyCondition.from_coeffs(pattern)
        if canon is not None and canon.as_dict() == want:
            return type_id
    return None
