import math

import numpy as np
import pytest

from fcollide.device import (
    CouplingSpec,
    DeviceSpec,
    DriveSpec,
    QubitSpec,
    TWO_PI,
    load_fixture,
)
from fcollide.floquet import (
    FloquetState,
    SubspaceCapError,
    bare_quasi_energy,
    build_subspace,
    computational_states,
    coupling_element,
    decompose,
    element_terms,
    fourier_expand,
    lift,
    matrix_element,
    operation_basis,
)

P, M = "+", "-"


@pytest.fixture(scope="module")
def cr2():
    dev, _ = load_fixture("cr2")
    fourier = fourier_expand(dev)
    basis = operation_basis(dev)
    return dev, fourier, basis


def undriven_pair(J=3.0e6):
    dev = DeviceSpec(
        qubits=(
            QubitSpec("a", 5.0e9, -330e6),
            QubitSpec("b", 5.2e9, -300e6),
        ),
        couplings=(CouplingSpec("a", "b", J),),
        drives=(),
    )
    return dev, fourier_expand(dev), operation_basis(dev)


class TestFourierExpand:
    def test_no_drives_single_static_component(self):
        _, fourier, _ = undriven_pair()
        assert fourier.axes == ()
        assert fourier.drives == ()
        assert len(fourier.couplings) == 1

    def test_drive_amplitude_halved_per_harmonic(self, cr2):
        dev, fourier, basis = cr2
        a = FloquetState((1, 0), (0,))
        b = FloquetState((0, 0), (1,))
        val = matrix_element(a, b, fourier, basis)
        drive = dev.resolved_drives()[0]
        assert val == pytest.approx(TWO_PI * drive.amplitude / 2)

    def test_drives_merge_onto_shared_axis(self):
        dev, _ = load_fixture("cr2")
        fourier = fourier_expand(dev)
        # cr_control plus rotary resolve to the same dressed frequency
        assert len(fourier.axes) == 1
        assert len(dev.resolved_drives()) == 2

    def test_distinct_frequencies_get_distinct_axes(self):
        dev = DeviceSpec(
            qubits=(QubitSpec("a", 5.0e9, -330e6), QubitSpec("b", 5.2e9, -330e6)),
            couplings=(),
            drives=(
                DriveSpec("a", 10e6, 5.0e9, 0.0, "generic"),
                DriveSpec("b", 10e6, 5.2e9, 0.0, "generic"),
            ),
        )
        fourier = fourier_expand(dev)
        assert len(fourier.axes) == 2


class TestOperationBasis:
    def test_cr_target_is_dressed(self, cr2):
        dev, fourier, basis = cr2
        it = fourier.qubit_ids.index("t")
        ic = fourier.qubit_ids.index("c")
        assert basis.is_dressed(it)
        assert not basis.is_dressed(ic)

    def test_computational_states_count(self, cr2):
        _, fourier, basis = cr2
        states = computational_states(basis, len(fourier.axes))
        assert len(states) == 4
        labels = {s.labels for s in states}
        assert labels == {(0, P), (0, M), (1, P), (1, M)}

    def test_rejects_dressed_label_on_bare_qubit(self, cr2):
        _, _, basis = cr2
        with pytest.raises(ValueError):
            basis.validate_state(FloquetState((P, 0), (0,)))

    def test_decompose_plus_state(self, cr2):
        _, _, basis = cr2
        branches = decompose(FloquetState((0, P), (0,)), basis)
        assert len(branches) == 2
        by_level = {br.levels: br for br in branches}
        assert by_level[(0, 0)].coeff == pytest.approx(1 / math.sqrt(2))
        assert by_level[(0, 1)].coeff == pytest.approx(1 / math.sqrt(2))
        assert by_level[(0, 1)].bz == (-1,)

    def test_decompose_minus_sign(self, cr2):
        _, _, basis = cr2
        branches = decompose(FloquetState((0, M), (0,)), basis)
        by_level = {br.levels: br for br in branches}
        assert by_level[(0, 1)].coeff == pytest.approx(-1 / math.sqrt(2))

    def test_lift_inverts_decompose(self, cr2):
        """Lifting the bare components of |+> must reconstruct it."""
        _, _, basis = cr2
        amp = {}
        for br in decompose(FloquetState((1, P), (2,)), basis):
            for coeff, state in lift(br.levels, br.bz, basis):
                amp[state] = amp.get(state, 0.0) + br.coeff * coeff
        amp = {s: a for s, a in amp.items() if abs(a) > 1e-12}
        assert amp == {FloquetState((1, P), (2,)): pytest.approx(1.0)}


class TestMatrixElements:
    def test_exchange_hopping_element(self):
        dev, fourier, basis = undriven_pair(J=3.0e6)
        a = FloquetState((0, 1), ())
        b = FloquetState((1, 0), ())
        assert coupling_element(a, b, fourier, basis) == pytest.approx(
            TWO_PI * 3.0e6
        )

    def test_bosonic_enhancement(self):
        dev, fourier, basis = undriven_pair(J=3.0e6)
        a = FloquetState((1, 1), ())
        b = FloquetState((2, 0), ())
        assert coupling_element(a, b, fourier, basis) == pytest.approx(
            TWO_PI * 3.0e6 * math.sqrt(2)
        )

    def test_counter_rotating_pair_creation_kept(self):
        dev, fourier, basis = undriven_pair(J=3.0e6)
        a = FloquetState((0, 0), ())
        b = FloquetState((1, 1), ())
        assert coupling_element(a, b, fourier, basis) == pytest.approx(
            TWO_PI * 3.0e6
        )

    def test_two_qubit_change_without_coupling_is_zero(self):
        dev = DeviceSpec(
            qubits=(QubitSpec("a", 5.0e9, -330e6), QubitSpec("b", 5.2e9, -330e6)),
            couplings=(),
            drives=(DriveSpec("a", 10e6, 5.0e9, 0.0, "generic"),),
        )
        fourier = fourier_expand(dev)
        basis = operation_basis(dev)
        a = FloquetState((0, 0), (0,))
        b = FloquetState((1, 1), (0,))
        assert coupling_element(a, b, fourier, basis) == 0.0

    def test_hermiticity_on_random_pairs(self, cr2):
        rng = np.random.default_rng(7)
        _, fourier, basis = cr2
        for _ in range(60):
            la = (int(rng.integers(5)), rng.choice([P, M, 2, 3, 4]))
            lb = (int(rng.integers(5)), rng.choice([P, M, 2, 3, 4]))
            la = (la[0], int(la[1]) if la[1] not in (P, M) else la[1])
            lb = (lb[0], int(lb[1]) if lb[1] not in (P, M) else lb[1])
            a = FloquetState(la, (int(rng.integers(-2, 3)),))
            b = FloquetState(lb, (int(rng.integers(-2, 3)),))
            if a == b:
                continue
            ab = matrix_element(a, b, fourier, basis)
            ba = matrix_element(b, a, fourier, basis)
            assert ab == pytest.approx(np.conj(ba))

    def test_plus_minus_drive_splitting(self, cr2):
        """<+|H|+> - <-|H|-> equals the drive amplitude on the target's
        axis when a rotary tone is present; zero at zero rotary amplitude."""
        dev, fourier, basis = cr2
        plus = FloquetState((0, P), (0,))
        minus = FloquetState((0, M), (0,))
        dp = matrix_element(plus, plus, fourier, basis)
        dm = matrix_element(minus, minus, fourier, basis)
        # cr2 ships with a zero-amplitude rotary: no splitting
        assert abs(dp - dm) < 1e-6

    def test_element_terms_tags(self, cr2):
        _, fourier, basis = cr2
        a = FloquetState((0, P), (1,))
        b = FloquetState((1, P), (0,))
        tags = set(element_terms(a, b, fourier, basis))
        assert any(t[0] == "coupling" for t in tags)
        assert any(t[0] == "drive" for t in tags)


class TestBareQuasiEnergy:
    def test_ground_state_zero(self, cr2):
        _, fourier, basis = cr2
        assert bare_quasi_energy(FloquetState((0, M), (0,)), fourier, basis) == 0.0

    def test_pure_harmonic_offset(self, cr2):
        _, fourier, basis = cr2
        e = bare_quasi_energy(FloquetState((0, P), (1,)), fourier, basis)
        assert e == pytest.approx(fourier.axes[0])

    def test_control_excitation(self, cr2):
        dev, fourier, basis = cr2
        e = bare_quasi_energy(FloquetState((1, M), (0,)), fourier, basis)
        assert e == pytest.approx(TWO_PI * dev.qubit("c").frequency)


class TestBuildSubspace:
    def test_radius_zero_diagonal(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub = build_subspace(fourier, seeds, 0, basis=basis)
        assert len(sub.states) == 4
        off = sub.matrix - np.diag(np.diag(sub.matrix))
        # +/- pairs stay linked by the in-cluster drive term even at
        # radius zero; couplings to states outside the seed set are absent
        assert np.all(np.abs(np.diag(sub.matrix, 2)) == 0.0)

    def test_matrix_hermitian(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub = build_subspace(fourier, seeds, 3, basis=basis)
        assert np.allclose(sub.matrix, sub.matrix.conj().T)

    def test_diagonal_is_bare_quasi_energy(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub = build_subspace(fourier, seeds, 2, basis=basis)
        for i, s in enumerate(sub.states):
            # diagonal includes only the bare part for fully bare states;
            # dressed states may carry the branch-mismatch correction
            expected = bare_quasi_energy(s, fourier, basis)
            assert abs(sub.matrix[i, i].real - expected) < TWO_PI * 1e6

    def test_monotone_closure(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        small = build_subspace(fourier, seeds, 1, basis=basis)
        large = build_subspace(fourier, seeds, 2, basis=basis)
        idx = [large.index(s) for s in small.states]
        sub = large.matrix[np.ix_(idx, idx)]
        assert np.allclose(sub, small.matrix)

    def test_distances_within_radius(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub = build_subspace(fourier, seeds, 3, basis=basis)
        assert max(sub.distances) <= 3

    def test_cap_enforced(self, cr2):
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        with pytest.raises(SubspaceCapError):
            build_subspace(fourier, seeds, 3, basis=basis, cap=10)

    def test_bz_translation_covariance(self, cr2):
        """Shifting all seeds by one BZ leaves off-diagonals unchanged and
        offsets every diagonal entry by the drive frequency."""
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub0 = build_subspace(fourier, seeds, 2, basis=basis)
        shifted = [s.translated((1,)) for s in seeds]
        sub1 = build_subspace(fourier, shifted, 2, basis=basis)
        perm = [sub1.index(s.translated((1,))) for s in sub0.states]
        m1 = sub1.matrix[np.ix_(perm, perm)]
        off0 = sub0.matrix - np.diag(np.diag(sub0.matrix))
        off1 = m1 - np.diag(np.diag(m1))
        assert np.allclose(off0, off1)
        d = np.real(np.diag(m1) - np.diag(sub0.matrix))
        assert np.allclose(d, fourier.axes[0])

    def test_fig2_neighborhood_contains_h_levels(self, cr2):
        """Radius-3 expansion from the computational states reaches the
        fourth target level."""
        _, fourier, basis = cr2
        seeds = computational_states(basis, 1)
        sub = build_subspace(fourier, seeds, 3, basis=basis)
        assert any(s.labels[0] == 3 for s in sub.states)

    def test_two_drive_uncoupled_walk_states_present(self):
        """Two uncoupled driven qubits: |1,1;-1,-1> is reachable from the
        ground state in two steps through either single-excitation state."""
        dev = DeviceSpec(
            qubits=(QubitSpec("a", 5.0e9, -330e6), QubitSpec("b", 5.2e9, -330e6)),
            couplings=(),
            drives=(
                DriveSpec("a", 20e6, 4.9e9, 0.0, "generic"),
                DriveSpec("b", 20e6, 5.3e9, 0.0, "generic"),
            ),
        )
        fourier = fourier_expand(dev)
        basis = operation_basis(dev)
        seed = FloquetState((0, 0), (0, 0))
        sub = build_subspace(fourier, [seed], 2, basis=basis)
        assert FloquetState((1, 1), (-1, -1)) in sub.states
        assert FloquetState((1, 0), (-1, 0)) in sub.states
        assert FloquetState((0, 1), (0, -1)) in sub.states
