"""Partitioning routed paths into non-intersecting switching scenarios.

Vertices of the conflict graph are routed paths; an edge marks resource
contention, so a scenario is an independent set and a full grouping is
a coloring. Two algorithms are provided: first-fit greedy over paths in
edge-id order, and iterated maximum-clique extraction (each clique
member must land in a distinct scenario, which pins the lower bound
omega(G) in the first round). A branch-and-bound exact coloring serves
as the optimality oracle for small instances.

Adjacency is kept as per-vertex bitmasks (Python ints), which makes
first-fit membership tests and Bron-Kerbosch set algebra cheap enough
for thousand-path instances.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .appgraph import ClusterGraph
from .routing import RoutedPath, path_switch_states, paths_intersect
from .topology import LadderTopology, SwitchState

log = logging.getLogger(__name__)

DEFAULT_CLIQUE_BUDGET_S = 10.0
EXACT_GROUPING_MAX_PATHS = 15


@dataclass(frozen=True)
class ConflictGraph:
    """Symmetric intersection relation over paths (vertex i = edge id i)."""

    n: int
    m: int
    adj: tuple[int, ...]  # bitmask of neighbors per vertex

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and bool((self.adj[i] >> j) & 1)

    def degree(self, i: int) -> int:
        return self.adj[i].bit_count()


@dataclass(frozen=True)
class GroupingStats:
    algorithm: str
    clique_calls: int = 0
    clique_fallbacks: int = 0
    elapsed_s: float = 0.0


@dataclass(frozen=True)
class ScenarioSet:
    """Ordered partition of path ids plus one switch vector per scenario."""

    scenarios: tuple[tuple[int, ...], ...]
    switch_vectors: tuple[tuple[int, ...], ...]  # SwitchState value per switch index
    algorithm: str = ""
    stats: GroupingStats | None = None

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)


def _check_vertex_ids(paths: list[RoutedPath]) -> None:
    for i, p in enumerate(paths):
        if p.edge_id != i:
            raise ValueError(f"path at position {i} has edge id {p.edge_id}; pass paths in edge-id order")


def build_conflict_graph(paths: list[RoutedPath]) -> ConflictGraph:
    """Pairwise intersection graph; edge iff paths_intersect."""
    _check_vertex_ids(paths)
    n = len(paths)
    if n == 0:
        return ConflictGraph(n=0, m=0, adj=())
    cmin = np.fromiter((p.cmin for p in paths), dtype=np.int32, count=n)
    cmax = np.fromiter((p.cmax for p in paths), dtype=np.int32, count=n)
    lane = np.fromiter((p.lane for p in paths), dtype=np.int32, count=n)
    share_rung = (
        (cmin[:, None] == cmin[None, :])
        | (cmin[:, None] == cmax[None, :])
        | (cmax[:, None] == cmin[None, :])
        | (cmax[:, None] == cmax[None, :])
    )
    overlap = (cmin[:, None] <= cmax[None, :]) & (cmin[None, :] <= cmax[:, None])
    mat = share_rung | ((lane[:, None] == lane[None, :]) & overlap)
    np.fill_diagonal(mat, False)
    adj = tuple(
        int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little") for row in mat
    )
    return ConflictGraph(n=n, m=int(mat.sum()) // 2, adj=adj)


# ---------------------------------------------------------------------------
# scenario assembly


def scenario_switch_vector(
    path_ids, paths: list[RoutedPath], topo: LadderTopology
) -> tuple[int, ...]:
    """Full switch-state vector realizing every path of one scenario.

    Raises if two paths demand one switch in different states (cannot
    happen for a conflict-free scenario).
    """
    vec = [int(SwitchState.IDLE)] * topo.n_switches
    for pid in path_ids:
        for idx, state in path_switch_states(paths[pid], topo).items():
            if vec[idx] != SwitchState.IDLE and vec[idx] != state:
                lane, col = topo.switch_id(idx)
                raise ValueError(
                    f"switch ({lane},{col}) demanded in states {vec[idx]} and {int(state)}"
                )
            vec[idx] = int(state)
    return tuple(vec)


def _make_scenario_set(
    scenario_ids: list[list[int]],
    paths: list[RoutedPath],
    topo: LadderTopology,
    algorithm: str,
    stats: GroupingStats | None = None,
) -> ScenarioSet:
    scenarios = tuple(tuple(sorted(s)) for s in scenario_ids)
    vectors = tuple(scenario_switch_vector(s, paths, topo) for s in scenarios)
    return ScenarioSet(scenarios=scenarios, switch_vectors=vectors, algorithm=algorithm, stats=stats)


def validate_scenario_set(sset: ScenarioSet, paths: list[RoutedPath], topo: LadderTopology) -> None:
    """Raise ValueError unless sset is a conflict-free partition with consistent vectors."""
    flat = [pid for s in sset.scenarios for pid in s]
    if sorted(flat) != list(range(len(paths))):
        raise ValueError("scenarios do not partition the path set")
    for k, s in enumerate(sset.scenarios):
        for i, a in enumerate(s):
            for b in s[i + 1:]:
                if paths_intersect(paths[a], paths[b]):
                    raise ValueError(f"scenario {k}: paths {a} and {b} intersect")
    if len(sset.switch_vectors) != len(sset.scenarios):
        raise ValueError("one switch vector required per scenario")
    for k, s in enumerate(sset.scenarios):
        if tuple(sset.switch_vectors[k]) != scenario_switch_vector(s, paths, topo):
            raise ValueError(f"scenario {k}: switch vector does not realize its paths")


# ---------------------------------------------------------------------------
# grouping algorithms


def group_greedy(paths: list[RoutedPath], topo: LadderTopology) -> ScenarioSet:
    """First-fit: each path joins the first scenario it does not intersect."""
    t0 = time.perf_counter()
    g = build_conflict_graph(paths)
    scenario_ids: list[list[int]] = []
    conflict_masks: list[int] = []  # OR of members' adjacency; bit v set = v conflicts
    for v in range(g.n):
        for s, mask in enumerate(conflict_masks):
            if not (mask >> v) & 1:
                scenario_ids[s].append(v)
                conflict_masks[s] |= g.adj[v]
                break
        else:
            scenario_ids.append([v])
            conflict_masks.append(g.adj[v])
    stats = GroupingStats(algorithm="greedy", elapsed_s=time.perf_counter() - t0)
    return _make_scenario_set(scenario_ids, paths, topo, "greedy", stats)


def _greedy_clique(adj: tuple[int, ...], alive: int) -> list[int]:
    """Fast large clique to seed the branch-and-bound size bound."""
    best_v, best_deg = -1, -1
    m = alive
    while m:
        v = (m & -m).bit_length() - 1
        m &= m - 1
        d = (adj[v] & alive).bit_count()
        if d > best_deg:
            best_v, best_deg = v, d
    clique = [best_v]
    cand = adj[best_v] & alive
    while cand:
        pick, pick_deg = -1, -1
        m = cand
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            d = (adj[u] & cand).bit_count()
            if d > pick_deg:
                pick, pick_deg = u, d
        clique.append(pick)
        cand &= adj[pick]
    return sorted(clique)


class _BudgetExpired(Exception):
    pass


class _CliqueSearch:
    """Bron-Kerbosch with pivoting, pruned to maximum-clique search.

    Enumerates every maximal clique whose size can still reach the
    current best, so the lexicographically smallest maximum clique is
    selected exactly (unless the time budget expires, in which case the
    best clique found so far is returned and marked non-exact).
    """

    def __init__(self, adj, budget_s):
        self.adj = adj
        self.deadline = time.monotonic() + budget_s if budget_s is not None else None
        self.ticks = 0
        self.best: tuple[int, ...] = ()

    def _tick(self):
        self.ticks += 1
        if self.deadline is not None and self.ticks % 256 == 0:
            if time.monotonic() > self.deadline:
                raise _BudgetExpired

    def _consider(self, r: list[int]):
        cand = tuple(sorted(r))
        if len(cand) > len(self.best) or (len(cand) == len(self.best) and cand < self.best):
            self.best = cand

    def _expand(self, r: list[int], p: int, x: int):
        self._tick()
        if p == 0 and x == 0:
            self._consider(r)
            return
        if len(r) + p.bit_count() < len(self.best):
            return
        # pivot: vertex of P|X covering most of P
        pivot, cover = -1, -1
        m = p | x
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            c = (self.adj[u] & p).bit_count()
            if c > cover:
                pivot, cover = u, c
        m = p & ~self.adj[pivot]
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            bit = 1 << v
            r.append(v)
            self._expand(r, p & self.adj[v], x & self.adj[v])
            r.pop()
            p &= ~bit
            x |= bit

    def run(self, alive: int) -> tuple[tuple[int, ...], bool]:
        self.best = tuple(_greedy_clique(self.adj, alive))
        order = _degeneracy_order(self.adj, alive)
        p, x = alive, 0
        try:
            for v in order:
                bit = 1 << v
                self._expand([v], p & self.adj[v], x & self.adj[v])
                p &= ~bit
                x |= bit
            return self.best, True
        except _BudgetExpired:
            return self.best, False


def _degeneracy_order(adj: tuple[int, ...], alive: int) -> list[int]:
    """Repeatedly peel a minimum-degree vertex (ties to lowest id)."""
    remaining = alive
    degs = {}
    m = alive
    while m:
        v = (m & -m).bit_length() - 1
        m &= m - 1
        degs[v] = (adj[v] & alive).bit_count()
    order = []
    while remaining:
        v = min(degs, key=lambda u: (degs[u], u))
        order.append(v)
        del degs[v]
        remaining &= ~(1 << v)
        nb = adj[v] & remaining
        while nb:
            u = (nb & -nb).bit_length() - 1
            nb &= nb - 1
            degs[u] -= 1
    return order


def max_clique(
    g: ConflictGraph,
    budget_s: float | None = DEFAULT_CLIQUE_BUDGET_S,
) -> list[int]:
    """Maximum clique, lexicographically smallest among ties.

    Falls back to the largest clique found so far when the time budget
    expires (logged); the fallback is still a valid clique.
    """
    clique, exact = _max_clique_masked(g.adj, (1 << g.n) - 1 if g.n else 0, budget_s)
    return list(clique)


def _max_clique_masked(
    adj: tuple[int, ...], alive: int, budget_s: float | None
) -> tuple[tuple[int, ...], bool]:
    if alive == 0:
        raise ValueError("max_clique on an empty graph")
    clique, exact = _CliqueSearch(adj, budget_s).run(alive)
    if not exact:
        log.warning("clique budget expired; using best clique found (size %d)", len(clique))
    return clique, exact


def group_max_clique(
    paths: list[RoutedPath],
    topo: LadderTopology,
    clique_budget_s: float | None = DEFAULT_CLIQUE_BUDGET_S,
) -> ScenarioSet:
    """Iterated clique extraction: peel a maximum clique, spread its members
    over distinct scenarios, repeat until no path is left.

    Members (visited in descending conflict-degree order) prefer the
    compatible scenario whose conflict set grows least against the
    still-unassigned graph; members left over are fitted by augmenting-path
    matching, so a new scenario is created only when the clique genuinely
    cannot be accommodated in the existing ones.
    """
    t0 = time.perf_counter()
    g = build_conflict_graph(paths)
    scenario_ids: list[list[int]] = []
    conflict_masks: list[int] = []
    alive = (1 << g.n) - 1 if g.n else 0
    calls = fallbacks = 0
    while alive:
        clique, exact = _max_clique_masked(g.adj, alive, clique_budget_s)
        calls += 1
        fallbacks += 0 if exact else 1
        clique_mask = 0
        for v in clique:
            clique_mask |= 1 << v
        remaining = alive & ~clique_mask
        members = sorted(clique, key=lambda v: (-(g.adj[v] & alive).bit_count(), v))
        n_s = len(scenario_ids)

        owner: dict[int, int] = {}  # scenario -> member
        for v in members:
            best_s, best_grow = None, None
            for s in range(n_s):
                if s in owner or (conflict_masks[s] >> v) & 1:
                    continue
                grow = (g.adj[v] & ~conflict_masks[s] & remaining).bit_count()
                if best_grow is None or grow < best_grow:
                    best_s, best_grow = s, grow
            if best_s is not None:
                owner[best_s] = v

        def augment(v: int, seen: set[int]) -> bool:
            for s in range(n_s):
                if s in seen or (conflict_masks[s] >> v) & 1:
                    continue
                seen.add(s)
                if s not in owner or augment(owner[s], seen):
                    owner[s] = v
                    return True
            return False

        placed = set(owner.values())
        for v in members:
            if v not in placed and augment(v, set()):
                placed = set(owner.values())
        assigned = {v: s for s, v in owner.items()}
        for v in members:
            if v in assigned:
                scenario_ids[assigned[v]].append(v)
                conflict_masks[assigned[v]] |= g.adj[v]
            else:
                scenario_ids.append([v])
                conflict_masks.append(g.adj[v])
        alive = remaining
    stats = GroupingStats(
        algorithm="maxclique",
        clique_calls=calls,
        clique_fallbacks=fallbacks,
        elapsed_s=time.perf_counter() - t0,
    )
    return _make_scenario_set(scenario_ids, paths, topo, "maxclique", stats)


def scenario_lower_bound(g: ClusterGraph) -> int:
    """Max total cluster degree: all connections touching one cluster share
    its rung, so they pairwise conflict and force that many scenarios."""
    return max(g.total_degrees(), default=0)


# ---------------------------------------------------------------------------
# exact oracle (minimum scenario count = chromatic number of the conflict graph)


def optimal_grouping_exact(paths: list[RoutedPath], topo: LadderTopology) -> ScenarioSet:
    """Minimum-cardinality grouping by branch-and-bound coloring; small inputs only."""
    t0 = time.perf_counter()
    if len(paths) > EXACT_GROUPING_MAX_PATHS:
        raise ValueError(
            f"exact grouping limited to {EXACT_GROUPING_MAX_PATHS} paths, got {len(paths)}"
        )
    g = build_conflict_graph(paths)
    if g.n == 0:
        return ScenarioSet(scenarios=(), switch_vectors=(), algorithm="exact")
    alive = (1 << g.n) - 1
    lower = len(_max_clique_masked(g.adj, alive, None)[0])
    order = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    coloring = [-1] * g.n

    def feasible(k: int) -> bool:
        def assign(pos: int, used: int) -> bool:
            if pos == g.n:
                return True
            v = order[pos]
            banned = 0
            for u in range(g.n):
                if coloring[u] >= 0 and g.has_edge(u, v):
                    banned |= 1 << coloring[u]
            limit = min(used + 1, k)  # new color allowed only once (symmetry)
            for c in range(limit):
                if (banned >> c) & 1:
                    continue
                coloring[v] = c
                if assign(pos + 1, max(used, c + 1)):
                    return True
                coloring[v] = -1
            return False

        for i in range(g.n):
            coloring[i] = -1
        return assign(0, 0)

    k = lower
    while not feasible(k):
        k += 1
    scenario_ids: list[list[int]] = [[] for _ in range(k)]
    for v, c in enumerate(coloring):
        scenario_ids[c].append(v)
    scenario_ids = [s for s in scenario_ids if s]
    scenario_ids.sort(key=lambda s: min(s))
    stats = GroupingStats(algorithm="exact", elapsed_s=time.perf_counter() - t0)
    return _make_scenario_set(scenario_ids, paths, topo, "exact", stats)


# ---------------------------------------------------------------------------
# serialization (run-length encoded switch vectors)


def rle_encode(vec) -> list[list[int]]:
    """[[state, run], ...] covering the vector in order."""
    runs: list[list[int]] = []
    for v in vec:
        if runs and runs[-1][0] == v:
            runs[-1][1] += 1
        else:
            runs.append([int(v), 1])
    return runs


def rle_decode(runs) -> tuple[int, ...]:
    out: list[int] = []
    for state, count in runs:
        out.extend([state] * count)
    return tuple(out)


def raw_scenario_bits(sset: ScenarioSet, topo: LadderTopology) -> int:
    """Uncompressed control memory: 2 bits per switch per scenario."""
    return sset.n_scenarios * 2 * topo.n_switches


def compressed_scenario_bits(sset: ScenarioSet, topo: LadderTopology) -> int:
    """Run-length encoded size: each run costs 2 state bits plus a length
    field wide enough to span the whole vector."""
    if topo.n_switches <= 1:
        length_bits = 1
    else:
        length_bits = (topo.n_switches - 1).bit_length()
    total = 0
    for vec in sset.switch_vectors:
        total += len(rle_encode(vec)) * (2 + length_bits)
    return total


def scenario_set_record(sset: ScenarioSet) -> dict:
    """Serialized pipeline-state form."""
    rec = {
        "algorithm": sset.algorithm,
        "scenarios": [
            {"paths": list(s), "switches_rle": rle_encode(vec)}
            for s, vec in zip(sset.scenarios, sset.switch_vectors)
        ],
    }
    if sset.stats is not None:
        rec["stats"] = {
            "clique_calls": sset.stats.clique_calls,
            "clique_fallbacks": sset.stats.clique_fallbacks,
        }
    return rec


def scenario_set_from_record(rec: dict) -> ScenarioSet:
    scenarios = tuple(tuple(s["paths"]) for s in rec["scenarios"])
    vectors = tuple(rle_decode(s["switches_rle"]) for s in rec["scenarios"])
    return ScenarioSet(scenarios=scenarios, switch_vectors=vectors, algorithm=rec.get("algorithm", ""))
