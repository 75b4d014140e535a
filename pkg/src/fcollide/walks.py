"""Walk enumeration on a Floquet subspace and real-space validity.

A length-k walk is a sequence of k+1 states whose consecutive pairs are
linked by a nonzero off-diagonal element, with each step attributed to one
physical interaction (an exchange coupling, a drive tone, or the residual
branch mismatch of a dressed label).  A walk is valid when the union of
the real-space supports of its steps forms a connected graph; effective
couplings generated by invalid walks cancel exactly and never produce
collisions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .floquet import FloquetState, FloquetSubspace

DEFAULT_WALK_CAP = 2_000_000


class WalkCapError(RuntimeError):
    """Walk enumeration exceeded its combinatorial budget."""

    def __init__(self, message: str, partial_count: int):
        super().__init__(message)
        self.partial_count = partial_count


@dataclass(frozen=True)
class Walk:
    """A tagged walk through the Floquet graph."""

    states: tuple[FloquetState, ...]
    edges: tuple[Hashable, ...]

    def __post_init__(self) -> None:
        if len(self.states) != len(self.edges) + 1:
            raise ValueError("a length-k walk has k+1 states and k edges")

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def closed(self) -> bool:
        return self.states[0] == self.states[-1]


@dataclass(frozen=True)
class RealSpaceGraph:
    """Qubits touched by a walk's interactions, one hyperedge per step."""

    nodes: frozenset[int]
    edges: tuple[frozenset[int], ...]

    @property
    def connected(self) -> bool:
        if not self.nodes:
            return False
        groups = {q: {q} for q in self.nodes}
        for edge in self.edges:
            merged = set()
            for q in edge:
                merged |= groups[q]
            for q in merged:
                groups[q] = merged
        return len(next(iter(groups.values()))) == len(self.nodes)


def step_support(tag: Hashable, a: FloquetState, b: FloquetState) -> frozenset[int]:
    """Qubits involved in one walk step.

    Couplings touch both endpoints, drives touch the driven qubit, and a
    residual branch-mismatch step touches the dressed qubits whose labels
    differ between the two states.
    """
    kind = tag[0]
    if kind == "coupling":
        return frozenset((tag[1], tag[2]))
    if kind == "drive":
        return frozenset((tag[1],))
    if kind == "diag":
        return frozenset(
            q for q, (la, lb) in enumerate(zip(a.labels, b.labels)) if la != lb
        )
    raise ValueError(f"unknown interaction tag {tag!r}")


def real_space_graph(walk: Walk) -> RealSpaceGraph:
    edges = []
    nodes: set[int] = set()
    for step, tag in enumerate(walk.edges):
        support = step_support(tag, walk.states[step], walk.states[step + 1])
        nodes |= support
        edges.append(support)
    return RealSpaceGraph(frozenset(nodes), tuple(edges))


def is_valid_walk(walk: Walk, center: int | None = None) -> bool:
    """True when the walk's real-space graph is connected and, if a center
    qubit is given, includes it."""
    graph = real_space_graph(walk)
    if center is not None and center not in graph.nodes:
        return False
    return graph.connected


def _tagged_adjacency(
    subspace: FloquetSubspace,
) -> dict[int, list[tuple[int, Hashable]]]:
    adj: dict[int, list[tuple[int, Hashable]]] = {
        i: [] for i in range(len(subspace.states))
    }
    for (i, j), terms in subspace.edge_terms.items():
        for tag, val in terms:
            if val != 0.0:
                adj[i].append((j, tag))
                adj[j].append((i, tag))
    return adj


def enumerate_walks(
    subspace: FloquetSubspace,
    a: FloquetState | int,
    b: FloquetState | int,
    k: int,
    cap: int = DEFAULT_WALK_CAP,
) -> list[Walk]:
    """All tagged walks of length exactly k from a to b.

    States may be revisited; an element composed of several interaction
    terms yields one walk per term.
    """
    if k < 1:
        raise ValueError("walk length must be >= 1")
    ia = a if isinstance(a, int) else subspace.index(a)
    ib = b if isinstance(b, int) else subspace.index(b)
    adj = _tagged_adjacency(subspace)
    out: list[Walk] = []
    budget = cap

    def extend(path: list[int], tags: list[Hashable]) -> None:
        nonlocal budget
        remaining = k - len(tags)
        if remaining == 0:
            if path[-1] == ib:
                out.append(
                    Walk(
                        tuple(subspace.states[i] for i in path),
                        tuple(tags),
                    )
                )
            return
        for nxt, tag in adj[path[-1]]:
            budget -= 1
            if budget < 0:
                raise WalkCapError(
                    f"walk enumeration exceeded {cap} steps", len(out)
                )
            path.append(nxt)
            tags.append(tag)
            extend(path, tags)
            path.pop()
            tags.pop()

    extend([ia], [])
    return out
