"""Order-independent (stable) PC structure learning with a pluggable
conditional-independence test.

The skeleton phase freezes adjacency sets at the start of every level, so the
learned skeleton does not depend on variable order as long as the CI verdicts
are deterministic. Orientation applies the collider rule with conflict
detection, then propagates with the standard closure rules.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .citest import CiDecision, TestConfig, conditional_test
from .graphs import Cpdag, Dag, PartiallyDirectedGraph, d_separated, meek_closure

log = logging.getLogger("causalci.discovery")

DISCOVERY_METHODS = ("mi_mle", "mi_eb", "g", "bf_threshold", "bf_chi2",
                     "dsep_oracle")

# A CI tester maps (x, y, conditioning set) over column indices to a decision.
CiTestFn = Callable[[int, int, tuple[int, ...]], CiDecision]


@dataclass
class DiscoveryStats:
    """Accounting for one discovery run."""

    ci_test_count: int = 0
    tests_by_order: dict[int, int] = field(default_factory=dict)
    elapsed: float = 0.0

    def record(self, order: int) -> None:
        self.ci_test_count += 1
        self.tests_by_order[order] = self.tests_by_order.get(order, 0) + 1


def make_data_tester(dataset, method: str, config: TestConfig) -> CiTestFn:
    """CI tester backed by the dataset and one of the citest methods."""

    def tester(x: int, y: int, z: tuple[int, ...]) -> CiDecision:
        return conditional_test(dataset, x, y, z, method=method, config=config)

    return tester


def make_oracle_tester(dag: Dag, names: Iterable[str] | None = None) -> CiTestFn:
    """Perfect CI tester answering from d-separation in a known DAG."""
    names = tuple(names) if names is not None else tuple(dag.nodes)

    def tester(x: int, y: int, z: tuple[int, ...]) -> CiDecision:
        sep = d_separated(dag, names[x], names[y], [names[c] for c in z])
        return CiDecision(statistic=1.0 if sep else 0.0, p_value=None,
                          df=None, independent=sep, method="dsep_oracle",
                          strata_used=1)

    return tester


def learn_skeleton(dataset, test: CiTestFn, config: TestConfig
                   ) -> tuple[dict[int, set[int]], dict[tuple[int, int], tuple[int, ...]], DiscoveryStats]:
    """Level-wise edge elimination over a complete graph.

    At level l the adjacency sets are frozen; candidate conditioning sets of
    size l are enumerated in lexicographic order from adj(x) without y, then
    from adj(y) without x (duplicates skipped). The first independence
    removes the edge and records the separating set.
    """
    p = len(dataset.names)
    if p < 2:
        raise ValueError("need at least two variables")
    adj: dict[int, set[int]] = {i: set(range(p)) - {i} for i in range(p)}
    sepsets: dict[tuple[int, int], tuple[int, ...]] = {}
    stats = DiscoveryStats()
    started = time.perf_counter()

    level = 0
    while level <= config.max_cond_set:
        frozen = {i: sorted(adj[i]) for i in range(p)}
        if all(len(frozen[i]) - 1 < level for i in range(p)):
            break
        edges = sorted((i, j) for i in range(p) for j in adj[i] if i < j)
        for i, j in edges:
            if j not in adj[i]:
                continue  # removed earlier in this level
            tested: set[tuple[int, ...]] = set()
            removed = False
            for base, other in ((frozen[i], j), (frozen[j], i)):
                pool = [v for v in base if v != other]
                if len(pool) < level:
                    continue
                for cond in itertools.combinations(pool, level):
                    if cond in tested:
                        continue
                    tested.add(cond)
                    decision = test(i, j, cond)
                    stats.record(level)
                    if decision.independent:
                        adj[i].discard(j)
                        adj[j].discard(i)
                        sepsets[(i, j)] = cond
                        removed = True
                        break
                if removed:
                    break
        level += 1

    stats.elapsed = time.perf_counter() - started
    return adj, sepsets, stats


def orient_v_structures(adj: Mapping[int, set[int]],
                        sepsets: Mapping[tuple[int, int], tuple[int, ...]]
                        ) -> tuple[PartiallyDirectedGraph, int]:
    """Collider orientation: for every unshielded triple x - z - y whose
    separating set excludes z, demand x -> z <- y. Edges demanded in both
    directions are left undirected; each contested edge counts as one
    conflict."""
    nodes = sorted(adj)
    pdag = PartiallyDirectedGraph(nodes)
    for i in nodes:
        for j in adj[i]:
            if i < j:
                pdag.add_undirected(i, j)

    demands: set[tuple[int, int]] = set()
    for z in nodes:
        neigh = sorted(adj[z])
        for x, y in itertools.combinations(neigh, 2):
            if y in adj[x]:
                continue  # shielded
            sep = sepsets.get((min(x, y), max(x, y)))
            if sep is None or z in sep:
                continue
            demands.add((x, z))
            demands.add((y, z))

    conflicts = 0
    contested = {tuple(sorted(e)) for e in demands if (e[1], e[0]) in demands}
    conflicts += len(contested)
    for u, v in sorted(demands):
        if (min(u, v), max(u, v)) in contested:
            continue
        if pdag.is_undirected(u, v) and not pdag.orient(u, v):
            # Orientation refused to close a directed cycle.
            conflicts += 1
    if conflicts:
        log.debug("v-structure orientation left %d contested edge(s) undirected",
                  conflicts)
    return pdag, conflicts


def apply_meek_rules(pdag: PartiallyDirectedGraph) -> Cpdag:
    """Propagate orientations to a fixed point and freeze the result."""
    meek_closure(pdag)
    return pdag.to_cpdag()


def learn_cpdag(dataset, method: str, config: TestConfig | None = None,
                truth: Dag | None = None) -> tuple[Cpdag, DiscoveryStats]:
    """Full pipeline: skeleton, collider orientation, closure.

    ``method`` selects the CI test; ``dsep_oracle`` answers from ``truth``
    instead of the data and is used for sanity and benchmark baselines.
    """
    if config is None:
        config = TestConfig()
    if method not in DISCOVERY_METHODS:
        raise ValueError(f"unknown discovery method {method!r}")
    if method == "dsep_oracle":
        if truth is None:
            raise ValueError("dsep_oracle requires the ground-truth DAG")
        tester = make_oracle_tester(truth, dataset.names)
    else:
        tester = make_data_tester(dataset, method, config)

    adj, sepsets, stats = learn_skeleton(dataset, tester, config)
    pdag, _conflicts = orient_v_structures(adj, sepsets)
    cpdag_idx = apply_meek_rules(pdag)

    names = tuple(dataset.names)
    cpdag = Cpdag(
        names,
        ((names[u], names[v]) for u, v in cpdag_idx.directed),
        (tuple(sorted((names[a], names[b]))) for a, b in
         (tuple(e) for e in cpdag_idx.undirected)),
    )
    return cpdag, stats
