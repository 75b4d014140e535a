import math

import numpy as np
import pytest

from fcollide.device import (
    CouplingSpec,
    DeviceSpec,
    DriveSpec,
    LatticeSchedule,
    PoleError,
    QubitSpec,
    TWO_PI,
    apply_schedule,
    device_from_dict,
    device_to_dict,
    dressed_frequency,
    duffing_level_energy,
    extract_sublattice,
    load_fixture,
)


def make_chain(n=3, freq0=5.0e9, spacing=0.1e9, J=3.0e6):
    """Linear chain of transmons with nearest-neighbor couplings."""
    qubits = tuple(
        QubitSpec(id=f"q{i}", frequency=freq0 + i * spacing, anharmonicity=-330e6)
        for i in range(n)
    )
    couplings = tuple(
        CouplingSpec(f"q{i}", f"q{i+1}", J) for i in range(n - 1)
    )
    return DeviceSpec(qubits=qubits, couplings=couplings, drives=())


class TestQubitSpec:
    def test_rejects_single_level(self):
        with pytest.raises(ValueError):
            QubitSpec("q", 5e9, -330e6, levels=1)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            QubitSpec("q", 0.0, -330e6)

    def test_warns_on_positive_anharmonicity(self):
        with pytest.warns(UserWarning):
            QubitSpec("q", 5e9, 100e6)


class TestDuffingEnergy:
    def test_vacuum_energy_is_zero(self):
        q = QubitSpec("q", 5e9, -330e6)
        assert duffing_level_energy(q, 0) == 0.0

    def test_first_level_has_no_anharmonic_term(self):
        q = QubitSpec("q", 5e9, -330e6)
        assert duffing_level_energy(q, 1) == pytest.approx(TWO_PI * 5e9)

    def test_second_level(self):
        q = QubitSpec("q", 5e9, -330e6)
        assert duffing_level_energy(q, 2) == pytest.approx(TWO_PI * (10e9 - 330e6))

    def test_out_of_range_level(self):
        q = QubitSpec("q", 5e9, -330e6, levels=3)
        with pytest.raises(ValueError):
            duffing_level_energy(q, 3)

    def test_exact_quadratic_in_level(self):
        q = QubitSpec("q", 4.8e9, -290e6, levels=6)
        for l in range(1, 5):
            second_diff = (
                duffing_level_energy(q, l + 1)
                - 2 * duffing_level_energy(q, l)
                + duffing_level_energy(q, l - 1)
            )
            assert second_diff == pytest.approx(TWO_PI * q.anharmonicity)


class TestDressedFrequency:
    def test_zero_coupling_gives_bare_target(self):
        dev, _ = load_fixture("cr2")
        dev = dev.with_value("couplings.c-t.strength", 0.0)
        assert dressed_frequency(dev, "c", "t") == dev.qubit("t").frequency

    def test_against_exact_two_transmon_diagonalization(self):
        """The perturbative dressed frequency must agree with the exact
        single-excitation dressed level to O(J^4 / Delta^3)."""
        J = 3.8e6
        alpha = -330e6
        wt = 5.0e9
        for delta in (100e6, -150e6, 250e6):
            wc = wt + delta
            dev = DeviceSpec(
                qubits=(
                    QubitSpec("c", wc, alpha),
                    QubitSpec("t", wt, alpha),
                ),
                couplings=(CouplingSpec("c", "t", J),),
                drives=(),
            )
            approx = dressed_frequency(dev, "c", "t")
            exact = _exact_dressed_target(wc, wt, alpha, alpha, J)
            # Residual terms: O(J^4/Delta^3) plus counter-rotating shifts
            # of order J^2/(wc+wt) that the perturbative formula drops.
            tol = 50.0 * abs(J**4 / delta**3) + 10.0 * J**2 / (wc + wt)
            assert abs(approx - exact) < tol

    def test_pole_at_zero_detuning(self):
        dev, _ = load_fixture("cr2")
        dev = dev.with_value("qubits.c.frequency", dev.qubit("t").frequency)
        with pytest.raises(PoleError) as err:
            dressed_frequency(dev, "c", "t")
        assert err.value.condition_type == 1

    def test_pole_at_negative_control_anharmonicity(self):
        dev, _ = load_fixture("cr2")
        alpha_c = dev.qubit("c").anharmonicity
        dev = dev.with_value(
            "qubits.c.frequency", dev.qubit("t").frequency - alpha_c
        )
        with pytest.raises(PoleError) as err:
            dressed_frequency(dev, "c", "t")
        assert err.value.condition_type == 3


def _exact_dressed_target(wc, wt, ac, at, J):
    """Control-state-averaged dressed target frequency of two coupled
    Duffing transmons, from dense diagonalization with 5 levels each.

    The CR drive frequency splits the difference between the target
    transition with the control in g and in e, so the oracle averages
    the two dressed transition frequencies.
    """
    nlev = 5

    def energy(q, w, a):
        return w * q + a * q * (q - 1) / 2.0

    states = [(i, j) for i in range(nlev) for j in range(nlev)]
    idx = {s: k for k, s in enumerate(states)}
    H = np.zeros((len(states), len(states)))
    for (i, j), k in idx.items():
        H[k, k] = energy(i, wc, ac) + energy(j, wt, at)
        for di in (1, -1):
            for dj in (1, -1):
                ii, jj = i + di, j + dj
                if 0 <= ii < nlev and 0 <= jj < nlev:
                    amp = J * math.sqrt(max(i, ii)) * math.sqrt(max(j, jj))
                    H[idx[(ii, jj)], k] += amp
    vals, vecs = np.linalg.eigh(H)

    def dressed(bare):
        return vals[np.argmax(np.abs(vecs[idx[bare], :]))]

    with_g = dressed((0, 1)) - dressed((0, 0))
    with_e = dressed((1, 1)) - dressed((1, 0))
    return 0.5 * (with_g + with_e)


class TestSchedules:
    def test_overlapping_pairs_rejected(self):
        with pytest.raises(ValueError):
            LatticeSchedule("P0", (("a", "b"), ("b", "c")))

    def test_restricted_keeps_touching_pairs(self):
        sched = LatticeSchedule("P0", (("a", "b"), ("c", "d")))
        kept = sched.restricted({"a", "x"})
        assert kept.cr_pairs == (("a", "b"),)

    def test_apply_schedule_adds_cr_drives(self):
        dev = make_chain(2)
        sched = LatticeSchedule("P0", (("q0", "q1"),))
        driven = apply_schedule(dev, sched, amplitude=25e6)
        cr = [d for d in driven.drives if d.role == "cr_control"]
        assert len(cr) == 1
        assert cr[0].target == "q0"
        assert cr[0].cr_target == "q1"
        assert cr[0].amplitude == 25e6


class TestExtractSublattice:
    def test_radius_zero_is_single_qubit(self):
        dev = make_chain(4)
        sub = extract_sublattice(dev, "q1", 0)
        assert [q.id for q in sub.qubits] == ["q1"]
        assert sub.couplings == ()

    def test_radius_covers_whole_chain(self):
        dev = make_chain(4)
        sub = extract_sublattice(dev, "q0", 10)
        assert {q.id for q in sub.qubits} == {q.id for q in dev.qubits}
        assert len(sub.couplings) == len(dev.couplings)

    def test_idempotent(self):
        dev = make_chain(5)
        once = extract_sublattice(dev, "q2", 2)
        twice = extract_sublattice(once, "q2", 2)
        assert {q.id for q in once.qubits} == {q.id for q in twice.qubits}
        assert len(once.couplings) == len(twice.couplings)

    def test_nested_in_radius(self):
        dev = make_chain(6)
        small = {q.id for q in extract_sublattice(dev, "q3", 1).qubits}
        large = {q.id for q in extract_sublattice(dev, "q3", 2).qubits}
        assert small <= large

    def test_lost_control_leaves_shadow_drive_on_target(self):
        """Cutting away a CR control must keep the target's basis marker."""
        dev = make_chain(3)
        sched = LatticeSchedule("P", (("q0", "q1"),))
        driven = apply_schedule(dev, sched)
        sub = extract_sublattice(driven, "q2", 1)
        ids = {q.id for q in sub.qubits}
        assert ids == {"q1", "q2"}
        shadows = [d for d in sub.drives if d.role == "cr_shadow"]
        assert len(shadows) == 1
        assert shadows[0].target == "q1"


class TestSerialization:
    def test_roundtrip(self):
        dev, schedules = load_fixture("cr2")
        data = device_to_dict(dev, schedules)
        dev2, schedules2 = device_from_dict(data)
        assert dev2 == dev
        assert schedules2.keys() == schedules.keys()

    def test_fixture_cr2_contents(self):
        dev, schedules = load_fixture("cr2")
        assert {q.id for q in dev.qubits} == {"c", "t"}
        assert dev.coupling("c", "t").strength == pytest.approx(3.8e6)
        assert "CR" in schedules

    def test_fixture_cr3_has_spectator(self):
        dev, _ = load_fixture("cr3")
        assert {q.id for q in dev.qubits} == {"c", "t", "s"}
        assert dev.coupling("c", "s") is not None
        assert dev.coupling("s", "t") is None


class TestParameterPaths:
    def test_qubit_path(self):
        dev, _ = load_fixture("cr2")
        dev2 = dev.with_value("qubits.c.frequency", 4.65e9)
        assert dev2.qubit("c").frequency == 4.65e9
        assert dev.qubit("c").frequency == 4.7e9

    def test_setting_same_value_is_not_an_error(self):
        dev, _ = load_fixture("cr2")
        dev2 = dev.with_value("qubits.t.frequency", dev.qubit("t").frequency)
        assert dev2.qubit("t").frequency == dev.qubit("t").frequency

    def test_coupling_path(self):
        dev, _ = load_fixture("cr2")
        dev2 = dev.with_value("couplings.c-t.strength", 1.0e6)
        assert dev2.coupling("c", "t").strength == 1.0e6

    def test_drive_path(self):
        dev, _ = load_fixture("cr2")
        dev2 = dev.with_value("drives.0.amplitude", 10e6)
        assert dev2.drives[0].amplitude == 10e6

    def test_unknown_path_raises(self):
        dev, _ = load_fixture("cr2")
        with pytest.raises(KeyError):
            dev.with_value("qubits.zz.frequency", 1e9)
