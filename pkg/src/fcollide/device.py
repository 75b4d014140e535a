"""Driven transmon lattices and derived single-qubit quantities.

Configuration values are ordinary frequencies in Hz; every quantity handed
to the numerical layers is converted to angular frequency (multiplied by
2*pi) at the point of use.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable, Mapping

TWO_PI = 2.0 * math.pi

#: Default number of retained oscillator levels per transmon (g, e, f, h, i).
DEFAULT_LEVELS = 5

#: Default CR drive amplitude in Hz applied when a schedule is materialized
#: without an explicit amplitude.
DEFAULT_CR_AMPLITUDE = 30.0e6

VALID_ROLES = {"data", "ancilla", "flag", "control", "target", "spectator"}
DRIVE_ROLES = {"cr_control", "rotary", "generic", "cr_shadow"}


class PoleError(ValueError):
    """A perturbative expression was evaluated at one of its poles."""

    def __init__(self, message: str, condition_type: int):
        super().__init__(message)
        self.condition_type = condition_type


@dataclass(frozen=True)
class QubitSpec:
    """A single Duffing transmon.

    Attributes:
        id: symbolic label.
        frequency: qubit frequency in Hz.
        anharmonicity: anharmonicity in Hz (negative for transmons).
        levels: number of retained oscillator levels.
    """

    id: str
    frequency: float
    anharmonicity: float
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        if self.levels < 2:
            raise ValueError(f"qubit {self.id}: levels must be >= 2")
        if self.frequency <= 0:
            raise ValueError(f"qubit {self.id}: frequency must be positive")
        if self.anharmonicity >= 0:
            warnings.warn(
                f"qubit {self.id}: non-negative anharmonicity "
                f"{self.anharmonicity} Hz is unusual for a transmon",
                stacklevel=2,
            )


@dataclass(frozen=True)
class CouplingSpec:
    """Exchange coupling J (a_i + a_i^dag)(a_j + a_j^dag), strength in Hz."""

    qubit_a: str
    qubit_b: str
    strength: float

    def __post_init__(self) -> None:
        if self.qubit_a == self.qubit_b:
            raise ValueError(f"coupling {self.qubit_a}: endpoints must differ")

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.qubit_a, self.qubit_b))


@dataclass(frozen=True)
class DriveSpec:
    """A continuous-wave drive Omega cos(w_d t + phi)(a + a^dag).

    Attributes:
        target: id of the driven qubit.
        amplitude: drive amplitude in Hz; may be negative.
        frequency: drive frequency in Hz, or None for roles whose frequency
            is derived at resolution time (cr_control tracks the dressed
            frequency of ``cr_target``; rotary tracks the CR drive resonant
            on the driven qubit).
        phase: drive phase in radians.
        role: one of ``cr_control``, ``rotary``, ``generic`` or
            ``cr_shadow``.  A shadow drive carries only a frequency axis and
            a dressed-basis marker for a CR target whose control qubit was
            cut away by sublattice extraction; its amplitude is zero.
        cr_target: gate target qubit id, required for role ``cr_control``.
    """

    target: str
    amplitude: float
    frequency: float | None = None
    phase: float = 0.0
    role: str = "generic"
    cr_target: str | None = None

    def __post_init__(self) -> None:
        if self.role not in DRIVE_ROLES:
            raise ValueError(f"unknown drive role {self.role!r}")
        if self.role == "cr_control" and self.cr_target is None:
            raise ValueError("cr_control drive requires cr_target")
        if self.frequency is not None and self.frequency <= 0:
            raise ValueError("drive frequency must be positive")
        if self.frequency is None and self.role == "generic":
            raise ValueError("generic drive requires an explicit frequency")


@dataclass(frozen=True)
class LatticeSchedule:
    """One layer of simultaneous CR drives, as (control, target) pairs."""

    name: str
    cr_pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "cr_pairs", tuple(map(tuple, self.cr_pairs)))
        seen: set[str] = set()
        for control, target in self.cr_pairs:
            for q in (control, target):
                if q in seen:
                    raise ValueError(
                        f"schedule {self.name}: qubit {q} appears in more "
                        "than one CR pair"
                    )
                seen.add(q)

    def restricted(self, qubit_ids: Iterable[str]) -> LatticeSchedule:
        """Keep pairs with at least one endpoint among ``qubit_ids``."""
        keep = set(qubit_ids)
        pairs = tuple(
            (c, t) for c, t in self.cr_pairs if c in keep or t in keep
        )
        return LatticeSchedule(self.name, pairs)


@dataclass(frozen=True)
class DeviceSpec:
    """A lattice of coupled transmons with optional CW drives."""

    qubits: tuple[QubitSpec, ...]
    couplings: tuple[CouplingSpec, ...] = ()
    drives: tuple[DriveSpec, ...] = ()
    roles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "drives", tuple(self.drives))
        ids = [q.id for q in self.qubits]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate qubit ids")
        known = set(ids)
        pairs: set[frozenset[str]] = set()
        for c in self.couplings:
            if not c.pair <= known:
                raise ValueError(f"coupling references unknown qubit: {c}")
            if c.pair in pairs:
                raise ValueError(f"duplicate coupling on pair {sorted(c.pair)}")
            pairs.add(c.pair)
        for d in self.drives:
            if d.target not in known:
                raise ValueError(f"drive targets unknown qubit {d.target}")
            if d.cr_target is not None and d.cr_target not in known:
                raise ValueError(f"drive references unknown qubit {d.cr_target}")
        for q, role in self.roles.items():
            if q not in known:
                raise ValueError(f"role assigned to unknown qubit {q}")
            if role not in VALID_ROLES:
                raise ValueError(f"unknown role {role!r} for qubit {q}")

    # -- lookups ---------------------------------------------------------

    def qubit(self, qubit_id: str) -> QubitSpec:
        for q in self.qubits:
            if q.id == qubit_id:
                return q
        raise KeyError(qubit_id)

    def index(self, qubit_id: str) -> int:
        for i, q in enumerate(self.qubits):
            if q.id == qubit_id:
                return i
        raise KeyError(qubit_id)

    def coupling(self, a: str, b: str) -> CouplingSpec | None:
        pair = frozenset((a, b))
        for c in self.couplings:
            if c.pair == pair:
                return c
        return None

    def neighbors(self, qubit_id: str) -> list[str]:
        out = []
        for c in self.couplings:
            if qubit_id in c.pair:
                (other,) = c.pair - {qubit_id}
                out.append(other)
        return sorted(out)

    def graph_distances(self, center: str) -> dict[str, int]:
        """Coupling-graph distance from ``center`` to every reachable qubit."""
        self.qubit(center)
        dist = {center: 0}
        queue = deque([center])
        while queue:
            q = queue.popleft()
            for nb in self.neighbors(q):
                if nb not in dist:
                    dist[nb] = dist[q] + 1
                    queue.append(nb)
        return dist

    # -- derived drive data ----------------------------------------------

    def resolved_drives(self) -> tuple[DriveSpec, ...]:
        """Drives with every derived frequency made concrete.

        A ``cr_control`` drive with no explicit frequency is set to the
        dressed frequency of its gate target; a ``rotary`` drive follows the
        CR drive resonant on the same qubit.
        """
        out: list[DriveSpec] = []
        cr_freq: dict[str, float] = {}
        for d in self.drives:
            if d.role == "cr_control" and d.frequency is None:
                freq = dressed_frequency(self, d.target, d.cr_target)
                d = replace(d, frequency=freq)
            if d.role == "cr_control":
                cr_freq[d.cr_target] = d.frequency
            out.append(d)
        for i, d in enumerate(out):
            if d.role == "rotary" and d.frequency is None:
                if d.target not in cr_freq:
                    raise ValueError(
                        f"rotary drive on {d.target} has no CR drive to follow"
                    )
                out[i] = replace(d, frequency=cr_freq[d.target])
        return tuple(out)

    def dressed_targets(self) -> dict[str, float]:
        """Map qubit id -> drive frequency (Hz) for qubits carrying a
        dressed +/- operation basis."""
        out: dict[str, float] = {}
        for d in self.resolved_drives():
            if d.role == "cr_control":
                out[d.cr_target] = d.frequency
            elif d.role == "cr_shadow":
                out[d.target] = d.frequency
        return out

    # -- parameter paths --------------------------------------------------

    def with_value(self, path: str, value: float) -> DeviceSpec:
        """Return a copy with one scalar parameter replaced.

        Paths take the form ``qubits.<id>.<field>``, ``drives.<index>.<field>``
        or ``couplings.<a>-<b>.strength``.
        """
        kind, key, attr = _split_path(path)
        if kind == "qubits":
            if not any(q.id == key for q in self.qubits):
                raise KeyError(f"no qubit {key!r} for path {path!r}")
            qubits = tuple(
                replace(q, **{attr: value}) if q.id == key else q
                for q in self.qubits
            )
            return replace(self, qubits=qubits)
        if kind == "drives":
            idx = int(key)
            if not 0 <= idx < len(self.drives):
                raise KeyError(f"no drive index {idx} for path {path!r}")
            drives = list(self.drives)
            drives[idx] = replace(drives[idx], **{attr: value})
            return replace(self, drives=tuple(drives))
        if kind == "couplings":
            a, _, b = key.partition("-")
            pair = frozenset((a, b))
            if not any(c.pair == pair for c in self.couplings):
                raise KeyError(f"no coupling {key!r} for path {path!r}")
            couplings = tuple(
                replace(c, strength=value) if c.pair == pair else c
                for c in self.couplings
            )
            return replace(self, couplings=couplings)
        raise KeyError(f"unknown parameter path {path!r}")


def _split_path(path: str) -> tuple[str, str, str]:
    parts = path.split(".")
    if len(parts) == 2 and parts[0] == "couplings":
        return parts[0], parts[1], "strength"
    if len(parts) != 3:
        raise KeyError(f"malformed parameter path {path!r}")
    return parts[0], parts[1], parts[2]


# -- single-qubit quantities ----------------------------------------------


def duffing_level_energy(q: QubitSpec, level: int) -> float:
    """Bare energy of oscillator level ``level`` in angular frequency.

    E_l = 2*pi*(frequency*l + anharmonicity*l*(l-1)/2).
    """
    if not 0 <= level < q.levels:
        raise ValueError(f"level {level} out of range for qubit {q.id}")
    return TWO_PI * (q.frequency * level + q.anharmonicity * level * (level - 1) / 2.0)


def dressed_frequency(device: DeviceSpec, control: str, target: str) -> float:
    """Perturbative dressed frequency of ``target`` under its coupling to
    ``control``, in Hz.

    w_t_dressed = w_t - J^2/Delta + (a_c + a_t) J^2 / ((Delta + a_c)(Delta - a_t))
    with Delta = w_c - w_t.
    """
    qc = device.qubit(control)
    qt = device.qubit(target)
    coupling = device.coupling(control, target)
    if coupling is None:
        raise ValueError(f"no coupling between {control} and {target}")
    j = coupling.strength
    if j == 0.0:
        return qt.frequency
    delta = qc.frequency - qt.frequency
    if delta == 0.0:
        raise PoleError(
            f"control-target detuning vanishes for ({control}, {target})",
            condition_type=1,
        )
    for denom, label in (
        (delta + qc.anharmonicity, "Delta_ct + alpha_c"),
        (delta - qt.anharmonicity, "Delta_ct - alpha_t"),
    ):
        if denom == 0.0:
            raise PoleError(
                f"{label} vanishes for ({control}, {target})",
                condition_type=3,
            )
    correction = (qc.anharmonicity + qt.anharmonicity) * j * j / (
        (delta + qc.anharmonicity) * (delta - qt.anharmonicity)
    )
    return qt.frequency - j * j / delta + correction


# -- schedules and sublattices --------------------------------------------


def apply_schedule(
    device: DeviceSpec,
    schedule: LatticeSchedule,
    amplitude: float = DEFAULT_CR_AMPLITUDE,
    dressed: bool = True,
) -> DeviceSpec:
    """Materialize a schedule layer as concrete CR drives on the device.

    Each (control, target) pair adds a drive on the control at the target's
    dressed frequency (or bare frequency when ``dressed`` is False, which is
    the convention of the symbolic census).  Pre-existing drives are kept.
    """
    drives = list(device.drives)
    for control, target in schedule.cr_pairs:
        if dressed:
            freq = dressed_frequency(device, control, target)
        else:
            freq = device.qubit(target).frequency
        drives.append(
            DriveSpec(
                target=control,
                amplitude=amplitude,
                frequency=freq,
                role="cr_control",
                cr_target=target,
            )
        )
    return replace(device, drives=tuple(drives))


def extract_sublattice(device: DeviceSpec, center: str, radius: int) -> DeviceSpec:
    """Induced sub-device on qubits within coupling-graph ``radius`` of
    ``center``.

    Couplings internal to the retained set are kept.  Drives survive when
    their driven qubit is retained; a CR drive whose driven qubit is cut but
    whose gate target is retained degrades to a zero-amplitude shadow drive
    so the target keeps its frequency axis and dressed basis.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dist = device.graph_distances(center)
    keep = {q for q, d in dist.items() if d <= radius}
    qubits = tuple(q for q in device.qubits if q.id in keep)
    couplings = tuple(c for c in device.couplings if c.pair <= keep)
    drives: list[DriveSpec] = []
    for d in device.resolved_drives():
        if d.target in keep:
            if d.role == "cr_control" and d.cr_target not in keep:
                # The gate target is gone; the drive tone itself remains.
                drives.append(replace(d, role="generic", cr_target=None))
            else:
                drives.append(d)
        elif d.role == "cr_control" and d.cr_target in keep:
            drives.append(
                DriveSpec(
                    target=d.cr_target,
                    amplitude=0.0,
                    frequency=d.frequency,
                    phase=0.0,
                    role="cr_shadow",
                )
            )
    roles = {q: r for q, r in self_roles(device).items() if q in keep}
    return DeviceSpec(qubits, couplings, tuple(drives), roles)


def self_roles(device: DeviceSpec) -> dict[str, str]:
    return dict(device.roles)


# -- serialization ---------------------------------------------------------


def device_from_dict(data: Mapping) -> tuple[DeviceSpec, dict[str, LatticeSchedule]]:
    qubits = tuple(
        QubitSpec(
            id=str(q["id"]),
            frequency=float(q["frequency"]),
            anharmonicity=float(q["anharmonicity"]),
            levels=int(q.get("levels", DEFAULT_LEVELS)),
        )
        for q in data.get("qubits", ())
    )
    couplings = tuple(
        CouplingSpec(str(c["qubits"][0]), str(c["qubits"][1]), float(c["strength"]))
        for c in data.get("couplings", ())
    )
    drives = tuple(
        DriveSpec(
            target=str(d["target"]),
            amplitude=float(d["amplitude"]),
            frequency=None if d.get("frequency") is None else float(d["frequency"]),
            phase=float(d.get("phase", 0.0)),
            role=str(d.get("role", "generic")),
            cr_target=None if d.get("cr_target") is None else str(d["cr_target"]),
        )
        for d in data.get("drives", ())
    )
    roles = {str(k): str(v) for k, v in data.get("roles", {}).items()}
    device = DeviceSpec(qubits, couplings, drives, roles)
    schedules = {
        str(name): LatticeSchedule(str(name), tuple((str(c), str(t)) for c, t in pairs))
        for name, pairs in data.get("schedules", {}).items()
    }
    return device, schedules


def device_to_dict(
    device: DeviceSpec, schedules: Mapping[str, LatticeSchedule] | None = None
) -> dict:
    data = {
        "qubits": [
            {
                "id": q.id,
                "frequency": q.frequency,
                "anharmonicity": q.anharmonicity,
                "levels": q.levels,
            }
            for q in device.qubits
        ],
        "couplings": [
            {"qubits": [c.qubit_a, c.qubit_b], "strength": c.strength}
            for c in device.couplings
        ],
        "drives": [
            {
                "target": d.target,
                "amplitude": d.amplitude,
                "frequency": d.frequency,
                "phase": d.phase,
                "role": d.role,
                "cr_target": d.cr_target,
            }
            for d in device.drives
        ],
        "roles": dict(device.roles),
    }
    if schedules:
        data["schedules"] = {
            name: [list(p) for p in sched.cr_pairs]
            for name, sched in schedules.items()
        }
    return data


def load_device(path) -> tuple[DeviceSpec, dict[str, LatticeSchedule]]:
    with open(path, "r", encoding="utf-8") as fh:
        return device_from_dict(json.load(fh))


def load_fixture(name: str) -> tuple[DeviceSpec, dict[str, LatticeSchedule]]:
    """Load a bundled fixture (``cr2``, ``cr3`` or ``hhex_d3``)."""
    ref = resources.files("fcollide") / "fixtures" / f"{name}.json"
    return device_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def build_heavy_hexagon(
    distance: int = 3, schedule: str = "P0"
) -> tuple[DeviceSpec, LatticeSchedule]:
    """Heavy-hexagon code lattice with roles and one named drive layer.

    Only distance 3 ships as a bundled layout fixture.
    """
    if distance != 3:
        raise ValueError("only the distance-3 layout fixture is bundled")
    device, schedules = load_fixture("hhex_d3")
    if schedule not in schedules:
        raise KeyError(f"unknown schedule {schedule!r}")
    return device, schedules[schedule]
