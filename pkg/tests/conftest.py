"""Shared fixtures and independent oracles.

The oracles here intentionally re-derive everything from first
principles (explicit resource sets, exhaustive subset enumeration,
plain backtracking coloring) rather than reusing the package's
predicates, so they can catch errors in the fast paths.
"""

from __future__ import annotations

import itertools

import pytest

from ladderbus import (
    build_topology,
    generate_synthetic,
    group_greedy,
    group_max_clique,
    place_anneal,
)
from ladderbus.routing import RoutedPath, extract_paths

# (n_clusters, n_edges, number of seeds): 200 instances shaped like the
# evaluated applications, spanning n 11..96 and density 0.10..0.23.
CORPUS_SHAPES = [
    (11, 18, 30),
    (14, 41, 30),
    (24, 128, 30),
    (26, 141, 30),
    (30, 161, 30),
    (40, 160, 15),
    (40, 292, 15),
    (60, 348, 10),
    (60, 772, 5),
    (96, 1068, 5),
]

CORPUS_SPECS = [
    (n, e, seed) for (n, e, n_seeds) in CORPUS_SHAPES for seed in range(n_seeds)
]

assert len(CORPUS_SPECS) == 200


# ---------------------------------------------------------------------------
# independent oracles


def oracle_path_resources(path: RoutedPath, topo) -> set[tuple]:
    """Explicit resource set, re-derived from tile geometry."""
    col_src = path.src_tile // 2
    col_dst = path.dst_tile // 2
    lo, hi = min(col_src, col_dst), max(col_src, col_dst)
    res = {("rung", col_src), ("rung", col_dst)}
    for c in range(lo, hi + 1):
        res.add(("sw", path.lane, c))
    for c in range(lo, hi):
        res.add(("seg", path.lane, c))
    return res


def oracle_intersect(a: RoutedPath, b: RoutedPath, topo) -> bool:
    return bool(oracle_path_resources(a, topo) & oracle_path_resources(b, topo))


def oracle_max_clique_size(n: int, edges: set[frozenset]) -> int:
    """Exhaustive subset enumeration; n <= 14."""
    best = 0
    for bits in range(1, 1 << n):
        members = [v for v in range(n) if (bits >> v) & 1]
        if len(members) <= best:
            continue
        if all(frozenset((u, v)) in edges for u, v in itertools.combinations(members, 2)):
            best = len(members)
    return best


def oracle_chromatic_number(n: int, edges: set[frozenset]) -> int:
    """Plain backtracking over color counts; no ordering tricks."""
    if n == 0:
        return 0
    neighbors = [set() for _ in range(n)]
    for e in edges:
        u, v = tuple(e)
        neighbors[u].add(v)
        neighbors[v].add(u)
    colors = [-1] * n

    def backtrack(v: int, k: int) -> bool:
        if v == n:
            return True
        for c in range(k):
            if all(colors[u] != c for u in neighbors[v]):
                colors[v] = c
                if backtrack(v + 1, k):
                    return True
                colors[v] = -1
        return False

    for k in range(1, n + 1):
        if backtrack(0, k):
            return k
    return n


def conflict_edges_from_oracle(paths, topo) -> set[frozenset]:
    edges = set()
    for i, j in itertools.combinations(range(len(paths)), 2):
        if oracle_intersect(paths[i], paths[j], topo):
            edges.add(frozenset((i, j)))
    return edges


# ---------------------------------------------------------------------------
# corpus pipeline products (computed once per session)


class CorpusInstance:
    def __init__(self, n, n_edges, seed):
        self.n = n
        self.n_edges = n_edges
        self.seed = seed
        self.graph = generate_synthetic(n, n_edges, seed)
        self.topo = build_topology(n)
        self.placement = place_anneal(self.graph, self.topo, seed=seed + 1)
        self.paths = extract_paths(self.graph, self.topo, self.placement)
        self.sset_greedy = group_greedy(self.paths, self.topo)
        self.sset_maxclique = group_max_clique(self.paths, self.topo)

    @property
    def key(self):
        return (self.n, self.n_edges, self.seed)


class Corpus(list):
    build_seconds: float = 0.0


@pytest.fixture(scope="session")
def corpus():
    import time

    start = time.perf_counter()
    out = Corpus(CorpusInstance(n, e, seed) for n, e, seed in CORPUS_SPECS)
    out.build_seconds = time.perf_counter() - start
    return out
