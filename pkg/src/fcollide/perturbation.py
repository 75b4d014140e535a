"""Order-k generalized perturbative diagonalization of a Floquet subspace.

The subspace matrix is split as H = K + V with K its exact diagonal and V
the off-diagonal remainder.  Anti-Hermitian frame generators G_1..G_{k-1}
are built order by order through the projector and divided-difference
superoperators; the transformed Hamiltonian keeps quasi-degenerate blocks
untouched, surfacing near-degeneracies as residual couplings g with
collision angle theta = arctan|2g/Delta|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .floquet import FloquetState, FloquetSubspace

TWO_PI = 2.0 * math.pi

#: Default absolute quasi-degeneracy tolerance (angular frequency).
DEFAULT_DEG_TOL = TWO_PI * 10.0e3


class DegenerateUncoupledError(ValueError):
    """A state pair is exactly degenerate with zero coupling."""


class DegeneracyContractError(ValueError):
    """The divided-difference superoperator met an in-cluster entry."""


@dataclass(frozen=True)
class SpectralSplit:
    """H = K + V with K diagonal; indices grouped into quasi-degenerate
    clusters under an absolute tolerance."""

    kappa: np.ndarray
    V: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    cluster_of: np.ndarray
    tol: float

    @classmethod
    def from_matrix(cls, H: np.ndarray, tol: float = DEFAULT_DEG_TOL) -> "SpectralSplit":
        H = np.asarray(H, dtype=complex)
        kappa = np.real(np.diag(H)).copy()
        V = H - np.diag(np.diag(H))
        order = np.argsort(kappa, kind="stable")
        clusters: list[list[int]] = []
        for idx in order:
            if clusters and kappa[idx] - kappa[clusters[-1][-1]] <= tol:
                clusters[-1].append(int(idx))
            else:
                clusters.append([int(idx)])
        cluster_of = np.empty(len(kappa), dtype=int)
        for ci, members in enumerate(clusters):
            for idx in members:
                cluster_of[idx] = ci
        return cls(
            kappa=kappa,
            V=V,
            clusters=tuple(tuple(c) for c in clusters),
            cluster_of=cluster_of,
            tol=tol,
        )

    @property
    def K(self) -> np.ndarray:
        return np.diag(self.kappa)

    def same_cluster(self, i: int, j: int) -> bool:
        return self.cluster_of[i] == self.cluster_of[j]

    def intercluster_mask(self) -> np.ndarray:
        c = self.cluster_of
        return c[:, None] != c[None, :]


def superop_P(split: SpectralSplit, X: np.ndarray) -> np.ndarray:
    """Remove every block of X internal to a quasi-degenerate cluster."""
    return np.where(split.intercluster_mask(), X, 0.0)


def superop_D(split: SpectralSplit, X: np.ndarray) -> np.ndarray:
    """Divide inter-cluster entries of X by their bare energy differences.

    X must vanish inside clusters (compose after superop_P); an in-cluster
    entry above numerical noise violates the contract.
    """
    kappa = split.kappa
    denom = kappa[:, None] - kappa[None, :]
    mask = split.intercluster_mask()
    scale = float(np.max(np.abs(X))) if X.size else 0.0
    bad = (~mask) & (np.abs(X) > 1e-12 * max(scale, 1.0))
    np.fill_diagonal(bad, False)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DegeneracyContractError(
            f"entry ({i}, {j}) lies inside a quasi-degenerate cluster "
            f"(|kappa_i - kappa_j| <= {split.tol:g})"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mask, X / np.where(mask, denom, 1.0), 0.0)
    return out


@dataclass(frozen=True)
class FrameOperators:
    """Anti-Hermitian generators of the perturbative frame, one per order."""

    G: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Result of order-k perturbative diagonalization."""

    order: int
    matrix: np.ndarray
    split: SpectralSplit
    frames: FrameOperators
    states: tuple[FloquetState, ...] | None = None

    def detuning(self, i: int, j: int) -> float:
        return float(np.real(self.matrix[i, i] - self.matrix[j, j]))

    def coupling(self, i: int, j: int) -> complex:
        return complex(self.matrix[i, j])

    def angle(self, i: int, j: int) -> float:
        return collision_angle(self.detuning(i, j), self.coupling(i, j))

    def in_same_cluster(self, i: int, j: int) -> bool:
        return self.split.same_cluster(i, j)

    def index(self, state: FloquetState) -> int:
        if self.states is None:
            raise ValueError("no state labels attached")
        return self.states.index(state)


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if parts == 0:
        return ((),) if total == 0 else ()
    out = []
    for first in range(1, min(largest, total - parts + 1) + 1):
        for rest in _compositions(total - first, parts - 1, largest):
            out.append((first,) + rest)
    return tuple(out)


def diagonalize_perturbative(
    subspace: FloquetSubspace | np.ndarray,
    k: int,
    tol: float = DEFAULT_DEG_TOL,
) -> EffectiveHamiltonian:
    """Perturbative diagonalization read out at order ``k``.

    Generators G_1..G_{k-1} are derived sequentially; the returned matrix
    is K plus the in-cluster parts of orders 1..k-1 plus the full order-k
    term, so order-k detunings and residual couplings can be read off
    directly.  Entries inside quasi-degenerate clusters are never divided
    by their vanishing denominators.
    """
    if k < 1:
        raise ValueError("order must be >= 1")
    states = None
    if isinstance(subspace, FloquetSubspace):
        states = subspace.states
        H = subspace.matrix
    else:
        H = np.asarray(subspace, dtype=complex)
    split = SpectralSplit.from_matrix(H, tol)
    K = split.K.astype(complex)
    V = split.V

    G: list[np.ndarray] = []

    def g_apply(n: int, X: np.ndarray) -> np.ndarray:
        return G[n - 1] @ X - X @ G[n - 1]

    def order_term(i: int) -> np.ndarray:
        """A_i: the full order-i contribution before block projection."""
        if i == 1:
            return V.copy()
        acc = np.zeros_like(V)
        # Nested commutators of K; the single-commutator term [G_i, K] is
        # the one solved for and therefore excluded.
        for j in range(2, i + 1):
            fact = 1.0 / math.factorial(j)
            for comp in _compositions(i, j, len(G)):
                term = K
                for n in reversed(comp):
                    term = g_apply(n, term)
                acc = acc + fact * term
        for j in range(1, i):
            fact = 1.0 / math.factorial(j)
            for comp in _compositions(i - 1, j, len(G)):
                term = V
                for n in reversed(comp):
                    term = g_apply(n, term)
                acc = acc + fact * term
        return acc

    H_eff = K.copy()
    for i in range(1, k):
        A = order_term(i)
        A = 0.5 * (A + A.conj().T)
        H_eff += A - superop_P(split, A)
        Gi = superop_D(split, superop_P(split, A))
        Gi = 0.5 * (Gi - Gi.conj().T)
        G.append(Gi)
    A_k = order_term(k)
    A_k = 0.5 * (A_k + A_k.conj().T)
    H_eff = H_eff + A_k
    H_eff = 0.5 * (H_eff + H_eff.conj().T)
    return EffectiveHamiltonian(
        order=k,
        matrix=H_eff,
        split=split,
        frames=FrameOperators(tuple(G)),
        states=states,
    )


def collision_angle(delta: float, g: complex) -> float:
    """theta = arctan|2g/Delta| in [0, pi/2]; pi/2 at exact degeneracy."""
    gabs = abs(g)
    if delta == 0.0:
        if gabs == 0.0:
            raise DegenerateUncoupledError(
                "state pair is exactly degenerate and uncoupled"
            )
        return 0.5 * math.pi
    return math.atan2(2.0 * gabs, abs(delta))


def gershgorin_bounds(
    H_eff: EffectiveHamiltonian | np.ndarray,
    cluster: Sequence[int],
    pair: tuple[int, int],
) -> tuple[float, float]:
    """Worst-case detuning shift and collision angle for a cluster.

    delta_r_max = sum over cluster members of |g_ik| + |g_jk| (diagonal
    couplings taken as zero); theta_max = arctan|delta_r_max / Delta_ij|.
    """
    M = H_eff.matrix if isinstance(H_eff, EffectiveHamiltonian) else np.asarray(H_eff)
    i, j = pair
    if i not in cluster or j not in cluster:
        raise ValueError("pair must lie inside the cluster")
    dr_max = 0.0
    for k in cluster:
        if k != i:
            dr_max += abs(M[i, k])
        if k != j:
            dr_max += abs(M[j, k])
    delta = float(np.real(M[i, i] - M[j, j]))
    if delta == 0.0:
        theta_max = 0.5 * math.pi if dr_max > 0.0 else 0.0
    else:
        theta_max = math.atan2(dr_max, abs(delta))
    return dr_max, theta_max


# -- closed-form subspace propagators and fidelity -------------------------


def _rz(phi: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]], dtype=complex
    )


def _ry(theta: float) -> np.ndarray:
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def subspace_propagator(theta: float, r: float, m: int, w_d: float, T: float) -> np.ndarray:
    """U_AB(T;0) = R_Z(rT) R_Y(theta) R_Z(m w_d T) R_Y(-theta)."""
    if T < 0:
        raise ValueError("gate time must be >= 0")
    return _rz(r * T) @ _ry(theta) @ _rz(m * w_d * T) @ _ry(-theta)


def ideal_propagator(
    delta: float, g: complex, m: int, w_d: float, T: float
) -> tuple[np.ndarray, bool]:
    """Linearized ideal propagator V_AB(T;0) and its validity flag.

    The flag is False outside the strong-dispersive regime |2g/Delta| < 1.
    """
    if delta == 0.0:
        raise ValueError("linearization undefined at Delta = 0")
    x = 2.0 * abs(g) / abs(delta)
    phase = np.exp(1j * m * w_d * T)
    v0 = delta * T * (1.0 + 0.5 * x * x)
    v1 = 1.0 + phase * x * x
    v2 = phase + x * x
    v3 = (1.0 - phase) * x
    mat = _rz(v0) @ np.array([[v1, v3], [v3, v2]], dtype=complex)
    return mat, bool(x < 1.0)


@dataclass(frozen=True)
class FidelityEstimate:
    """Collision-induced fidelity bound for one state pair."""

    theta: float
    r: float
    delta_r: float
    m: int
    w_d: float
    T: float
    D: int
    f_ab: float
    f: float
    F: float
    delta_r_max: float | None = None
    theta_max: float | None = None


def collision_fidelity(
    theta: float,
    delta_r: float,
    m: int,
    w_d: float,
    T: float,
    D: int,
    r: float = 0.0,
    delta_r_max: float | None = None,
    theta_max: float | None = None,
) -> FidelityEstimate:
    """Lower bound on the entangling fidelity from one Floquet collision.

    f_AB >= cos^2(theta/2) cos(delta_r T / 2)
            + sin^2(theta/2) cos((delta_r/2 + m w_d) T),
    f = (D-2)/D + (2/D) f_AB, F = |f|^2.
    """
    if D < 2:
        raise ValueError("Hilbert space dimension must be >= 2")
    if T <= 0:
        raise ValueError("gate time must be positive")
    c = math.cos(0.5 * theta) ** 2
    s = math.sin(0.5 * theta) ** 2
    f_ab = c * math.cos(0.5 * delta_r * T) + s * math.cos((0.5 * delta_r + m * w_d) * T)
    f = (D - 2.0) / D + (2.0 / D) * f_ab
    return FidelityEstimate(
        theta=theta,
        r=r,
        delta_r=delta_r,
        m=m,
        w_d=w_d,
        T=T,
        D=D,
        f_ab=f_ab,
        f=f,
        F=abs(f) ** 2,
        delta_r_max=delta_r_max,
        theta_max=theta_max,
    )
