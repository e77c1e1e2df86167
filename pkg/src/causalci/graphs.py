"""Directed and partially directed graphs: d-separation and equivalence-class
(CPDAG) machinery shared by the ground-truth models and the learner."""

from __future__ import annotations

from collections import deque
from typing import Iterable


class UnknownNodeError(KeyError):
    pass


def _check_nodes(nodes, *queried) -> None:
    known = set(nodes)
    for q in queried:
        if q not in known:
            raise UnknownNodeError(q)


class Dag:
    """Directed acyclic graph over named nodes."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        self.nodes = tuple(nodes)
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("duplicate node names")
        self.edges: set[tuple[str, str]] = set()
        self._parents: dict[str, set[str]] = {n: set() for n in self.nodes}
        self._children: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in edges:
            if u not in node_set or v not in node_set:
                raise UnknownNodeError(f"edge ({u}, {v}) uses unknown node")
            if u == v:
                raise ValueError(f"self loop on {u}")
            self.edges.add((u, v))
            self._parents[v].add(u)
            self._children[u].add(v)
        if self._has_cycle():
            raise ValueError("graph contains a directed cycle")

    def _has_cycle(self) -> bool:
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        queue = deque(n for n in self.nodes if indeg[n] == 0)
        seen = 0
        while queue:
            n = queue.popleft()
            seen += 1
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        return seen != len(self.nodes)

    def parents(self, node: str) -> set[str]:
        _check_nodes(self.nodes, node)
        return set(self._parents[node])

    def children(self, node: str) -> set[str]:
        _check_nodes(self.nodes, node)
        return set(self._children[node])

    def topological_order(self) -> list[str]:
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        queue = deque(n for n in self.nodes if indeg[n] == 0)
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in sorted(self._children[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        return order

    def max_in_degree(self) -> int:
        return max((len(p) for p in self._parents.values()), default=0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Dag) and set(self.nodes) == set(other.nodes)
                and self.edges == other.edges)

    def __repr__(self) -> str:
        return f"Dag(nodes={len(self.nodes)}, edges={len(self.edges)})"


class Cpdag:
    """Partially directed graph standing for a Markov equivalence class:
    compelled edges directed, reversible edges undirected."""

    def __init__(self, nodes: Iterable[str],
                 directed: Iterable[tuple[str, str]],
                 undirected: Iterable[tuple[str, str]]):
        self.nodes = tuple(nodes)
        node_set = set(self.nodes)
        self.directed: set[tuple[str, str]] = set()
        self.undirected: set[frozenset[str]] = set()
        for u, v in directed:
            if u == v or u not in node_set or v not in node_set:
                raise ValueError(f"bad directed edge ({u}, {v})")
            self.directed.add((u, v))
        for u, v in undirected:
            if u == v or u not in node_set or v not in node_set:
                raise ValueError(f"bad undirected edge ({u}, {v})")
            self.undirected.add(frozenset((u, v)))
        for u, v in self.directed:
            if frozenset((u, v)) in self.undirected:
                raise ValueError(f"edge ({u}, {v}) both directed and undirected")
            if (v, u) in self.directed:
                raise ValueError(f"two-cycle between {u} and {v}")

    def adjacent(self, u: str, v: str) -> bool:
        return ((u, v) in self.directed or (v, u) in self.directed
                or frozenset((u, v)) in self.undirected)

    def edge_mark(self, u: str, v: str) -> str | None:
        """'->', '<-', '--', or None when non-adjacent."""
        if (u, v) in self.directed:
            return "->"
        if (v, u) in self.directed:
            return "<-"
        if frozenset((u, v)) in self.undirected:
            return "--"
        return None

    def __eq__(self, other) -> bool:
        return (isinstance(other, Cpdag)
                and set(self.nodes) == set(other.nodes)
                and self.directed == other.directed
                and self.undirected == other.undirected)

    def __repr__(self) -> str:
        return (f"Cpdag(nodes={len(self.nodes)}, directed={len(self.directed)},"
                f" undirected={len(self.undirected)})")


def d_separated(dag: Dag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True when every path between x and y is blocked given z.

    Reachability over (node, incoming-direction) states: a collider passes
    the ball only if it or one of its descendants is conditioned on, a
    non-collider only if it is not.
    """
    z = set(z)
    _check_nodes(dag.nodes, x, y, *z)
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("x and y cannot be conditioned on")

    # Nodes with a conditioned descendant (including themselves).
    has_cond_desc = set(z)
    frontier = deque(z)
    while frontier:
        n = frontier.popleft()
        for p in dag._parents[n]:
            if p not in has_cond_desc:
                has_cond_desc.add(p)
                frontier.append(p)

    # State: (node, arrived_via_edge_pointing_at_node)
    start = [(x, False), (x, True)]
    visited = set(start)
    queue = deque(start)
    while queue:
        node, came_in = queue.popleft()
        if node == y:
            return False
        if came_in:
            # Arrow into node: continue as collider (needs conditioned
            # descendant) or pass through if node unobserved.
            if node in has_cond_desc:
                for p in dag._parents[node]:
                    if (p, True) not in visited:
                        visited.add((p, True))
                        queue.append((p, True))
            if node not in z:
                for c in dag._children[node]:
                    if (c, True) not in visited:
                        visited.add((c, True))
                        queue.append((c, True))
        else:
            # Arrow out of node: blocked entirely if node observed.
            if node not in z:
                for p in dag._parents[node]:
                    if (p, False) not in visited:
                        visited.add((p, False))
                        queue.append((p, False))
                for c in dag._children[node]:
                    if (c, True) not in visited:
                        visited.add((c, True))
                        queue.append((c, True))
    return True


class PartiallyDirectedGraph:
    """Mutable mixed graph used during orientation. Directed edges are kept
    as ordered pairs, undirected as unordered; orientation helpers refuse to
    create two-cycles or directed cycles."""

    def __init__(self, nodes: Iterable[str]):
        self.nodes = tuple(nodes)
        self.directed: set[tuple[str, str]] = set()
        self.undirected: set[frozenset[str]] = set()
        self._adj: dict[str, set[str]] = {n: set() for n in self.nodes}

    @classmethod
    def from_skeleton(cls, nodes: Iterable[str],
                      edges: Iterable[tuple[str, str]]) -> "PartiallyDirectedGraph":
        g = cls(nodes)
        for u, v in edges:
            g.add_undirected(u, v)
        return g

    def add_undirected(self, u: str, v: str) -> None:
        if u == v:
            raise ValueError("self loop")
        self.undirected.add(frozenset((u, v)))
        self._adj[u].add(v)
        self._adj[v].add(u)

    def adjacent(self, u: str, v: str) -> bool:
        return v in self._adj[u]

    def neighbors(self, u: str) -> set[str]:
        return set(self._adj[u])

    def is_undirected(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.undirected

    def has_directed(self, u: str, v: str) -> bool:
        return (u, v) in self.directed

    def _creates_directed_cycle(self, u: str, v: str) -> bool:
        # Would u -> v close a cycle? Check for a directed path v ~> u.
        stack = [v]
        seen = {v}
        while stack:
            n = stack.pop()
            if n == u:
                return True
            for a, b in self.directed:
                if a == n and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return False

    def orient(self, u: str, v: str) -> bool:
        """Turn the undirected edge u - v into u -> v; returns False when the
        edge is no longer undirected or the orientation would close a
        directed cycle."""
        if not self.is_undirected(u, v):
            return False
        if self._creates_directed_cycle(u, v):
            return False
        self.undirected.discard(frozenset((u, v)))
        self.directed.add((u, v))
        return True

    def to_cpdag(self) -> Cpdag:
        return Cpdag(self.nodes, self.directed,
                     (tuple(sorted(e)) for e in self.undirected))


def meek_closure(pdag: PartiallyDirectedGraph) -> None:
    """Apply the four orientation-propagation rules in place until no rule
    fires. Orientations that would create a directed cycle are skipped."""
    changed = True
    while changed:
        changed = False
        for edge in sorted(pdag.undirected, key=sorted):
            b, c = sorted(edge)
            for u, v in ((b, c), (c, b)):
                if _meek_applies(pdag, u, v) and pdag.orient(u, v):
                    changed = True
                    break


def _meek_applies(pdag: PartiallyDirectedGraph, u: str, v: str) -> bool:
    # R1: a -> u, u - v, a and v non-adjacent  =>  u -> v
    for a, b in pdag.directed:
        if b == u and not pdag.adjacent(a, v) and a != v:
            return True
    # R2: u -> w -> v with u - v  =>  u -> v
    for w in pdag.neighbors(u):
        if pdag.has_directed(u, w) and pdag.has_directed(w, v):
            return True
    # R3: u - w1, u - w2, w1 -> v, w2 -> v, w1 and w2 non-adjacent  =>  u -> v
    spouses = [w for w in pdag.neighbors(u)
               if pdag.is_undirected(u, w) and pdag.has_directed(w, v)]
    for i, w1 in enumerate(spouses):
        for w2 in spouses[i + 1:]:
            if not pdag.adjacent(w1, w2):
                return True
    # R4: u - w, w -> t, t -> v, w and v non-adjacent  =>  u -> v
    for w in pdag.neighbors(u):
        if not pdag.is_undirected(u, w) or pdag.adjacent(w, v) or w == v:
            continue
        for a, t in pdag.directed:
            if a == w and pdag.has_directed(t, v):
                return True
    return False


def dag_to_cpdag(dag: Dag) -> Cpdag:
    """Canonical representative of the DAG's Markov equivalence class:
    v-structure arrows are kept, everything else starts undirected, and the
    orientation rules are run to closure."""
    pdag = PartiallyDirectedGraph.from_skeleton(
        dag.nodes, ((u, v) for u, v in dag.edges))
    for node in dag.nodes:
        parents = sorted(dag._parents[node])
        for i, p1 in enumerate(parents):
            for p2 in parents[i + 1:]:
                if not (p1 in dag._parents[p2] or p2 in dag._parents[p1]
                        or p1 in dag._children[p2] or p2 in dag._children[p1]):
                    pdag.orient(p1, node)
                    pdag.orient(p2, node)
    meek_closure(pdag)
    return pdag.to_cpdag()
