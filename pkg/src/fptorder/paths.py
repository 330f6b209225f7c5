"""The killing-configuration graph and enumeration of time-ordered killing paths.

Each node of the graph is an alive/dead configuration of the N coordinates
(rendered as strings like ``"ADA"``: A alive, D dead).  Edges point from a
configuration to any configuration whose dead set strictly contains it, so a
single edge may kill several coordinates at once (simultaneous kills are a
feature of the cross-intensity models).  A killing path is a chain from the
all-alive root; the set of paths ending in states with exactly ``n_alive``
survivors indexes the additive contributions to the n-th survival function.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["GammaNode", "KillPath", "GammaGraph", "build_gamma", "enumerate_paths"]

_MAX_N = 16


@dataclass(frozen=True, order=True)
class GammaNode:
    """One alive/dead configuration; ``alive[i]`` is True while coordinate i lives."""

    alive: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.alive)

    @property
    def n_alive(self) -> int:
        return sum(self.alive)

    @property
    def dead_set(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.alive) if not a)

    @property
    def label(self) -> str:
        return "".join("A" if a else "D" for a in self.alive)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class KillPath:
    """A chain of configurations from the root, each step killing >= 1 coordinate."""

    nodes: tuple[GammaNode, ...]

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("path must contain at least the root node")
        if self.nodes[0].n_alive != self.nodes[0].n:
            raise ValueError("path must start at the all-alive root")
        for u, v in zip(self.nodes, self.nodes[1:]):
            if not u.dead_set < v.dead_set:
                raise ValueError(f"dead sets must strictly grow along the path ({u} -> {v})")

    @property
    def n_kill_events(self) -> int:
        return len(self.nodes) - 1

    def __str__(self) -> str:
        return "→".join(node.label for node in self.nodes)


class GammaGraph:
    """Directed graph on all 2^N configurations, u -> v iff dead(u) is a strict
    subset of dead(v).

    The edge relation is implicit (subset tests) rather than materialized: the
    number of edges grows like 3^N and storing them eagerly would dwarf the
    node set for larger N.
    """

    def __init__(self, n: int):
        if not 1 <= n <= _MAX_N:
            raise ValueError(f"basket size must be in 1..{_MAX_N}, got {n}")
        self.n = n
        self.nodes = tuple(
            sorted(
                GammaNode(tuple(mask & (1 << i) == 0 for i in range(n)))
                for mask in range(2**n)
            )
        )
        self.root = GammaNode((True,) * n)

    def is_edge(self, u: GammaNode, v: GammaNode) -> bool:
        return u.dead_set < v.dead_set

    def successors(self, u: GammaNode) -> list[GammaNode]:
        """All strict-superset configurations, in label order."""
        return [v for v in self.nodes if u.dead_set < v.dead_set]

    def iter_edges(self):
        for u in self.nodes:
            for v in self.successors(u):
                yield (u, v)

    @property
    def edge_count(self) -> int:
        # node with k dead coordinates has 2^(n-k) - 1 strict supersets
        return sum(2 ** (self.n - len(u.dead_set)) - 1 for u in self.nodes)


def build_gamma(n: int) -> GammaGraph:
    """Build the configuration graph for an N-coordinate system."""
    return GammaGraph(n)


def enumerate_paths(graph: GammaGraph, n_alive: int) -> list[KillPath]:
    """All chains from the root to configurations with exactly ``n_alive`` survivors.

    Ordering is deterministic: depth-first with successors visited in label
    order, which yields paths sorted lexicographically by their node sequence.
    """
    if not 0 <= n_alive < graph.n:
        raise ValueError(f"n_alive must be in 0..{graph.n - 1}, got {n_alive}")
    paths: list[KillPath] = []
    stack: list[GammaNode] = [graph.root]

    def descend(node: GammaNode) -> None:
        for nxt in graph.successors(node):
            if nxt.n_alive < n_alive:
                continue
            stack.append(nxt)
            if nxt.n_alive == n_alive:
                paths.append(KillPath(tuple(stack)))
            else:
                descend(nxt)
            stack.pop()

    descend(graph.root)
    return paths
