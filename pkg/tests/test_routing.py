import itertools
import random

import pytest

from conftest import conflict_edges_from_oracle, oracle_intersect, oracle_path_resources

from ladderbus.appgraph import generate_synthetic, make_cluster_graph
from ladderbus.placement import place_anneal
from ladderbus.routing import (
    RoutedPath,
    extract_paths,
    path_from_record,
    path_record,
    path_resources,
    path_switch_states,
    paths_intersect,
    route_connection,
)
from ladderbus.topology import SwitchState, build_topology


def fresh_load(topo):
    return [[0] * (topo.n_columns - 1) for _ in range(topo.n_lanes)]


def test_route_same_column_ties_to_lane_zero():
    topo = build_topology(8, 3)
    p = route_connection(topo, 0, 1, fresh_load(topo))
    assert (p.lane, p.cmin, p.cmax) == (0, 0, 0)
    assert p.rung_columns == frozenset({0})


def test_route_prefers_least_loaded_lane():
    topo = build_topology(12, 3)
    load = fresh_load(topo)
    for i in range(1, 4):  # saturate lane 0 on columns [1,4]
        load[0][i] = 1
    p = route_connection(topo, 2, 8, load)  # columns 1 -> 4
    assert p.lane == 1
    assert (p.cmin, p.cmax) == (1, 4)


def test_route_rejects_self_connection():
    topo = build_topology(4, 2)
    with pytest.raises(ValueError):
        route_connection(topo, 1, 1, fresh_load(topo))


def test_route_updates_load_and_interval():
    topo = build_topology(10, 2)
    load = fresh_load(topo)
    p = route_connection(topo, 8, 0, load)  # columns 4 -> 0
    assert (p.cmin, p.cmax) == (0, 4)
    assert load[p.lane][0:4] == [1, 1, 1, 1]


def test_extract_paths_one_per_edge():
    g = make_cluster_graph(2, [(0, 1, 1)])
    topo = build_topology(4, 2)
    p = place_anneal(g, topo, seed=0)
    assert len(extract_paths(g, topo, p)) == 1

    g40 = generate_synthetic(40, 160, seed=1)
    topo40 = build_topology(40)
    p40 = place_anneal(g40, topo40, seed=1)
    paths = extract_paths(g40, topo40, p40)
    assert len(paths) == 160
    assert [p.edge_id for p in paths] == list(range(160))


def test_extract_lane_choices_match_independent_replay():
    # re-simulate least-loaded accounting from scratch and compare lane picks
    g = generate_synthetic(20, 90, seed=4)
    topo = build_topology(20)
    placement = place_anneal(g, topo, seed=2)
    paths = extract_paths(g, topo, placement)

    load = [[0] * (topo.n_columns - 1) for _ in range(topo.n_lanes)]
    for path, (src, dst, _w) in zip(paths, g.edges):
        ca = placement.tile_of(src) // 2
        cb = placement.tile_of(dst) // 2
        lo, hi = min(ca, cb), max(ca, cb)
        best = min(range(topo.n_lanes), key=lambda lane: (sum(load[lane][lo:hi]), lane))
        assert path.lane == best
        assert (path.cmin, path.cmax) == (lo, hi)
        for i in range(lo, hi):
            load[best][i] += 1


def test_intersect_shared_source_any_lanes():
    a = RoutedPath(0, 0, 4, lane=0, cmin=0, cmax=2)
    b = RoutedPath(1, 0, 6, lane=1, cmin=0, cmax=3)
    assert paths_intersect(a, b) and paths_intersect(b, a)


def test_intersect_disjoint_resources_false():
    a = RoutedPath(0, 0, 4, lane=0, cmin=0, cmax=2)
    b = RoutedPath(1, 2, 7, lane=1, cmin=1, cmax=3)
    assert not paths_intersect(a, b)
    assert not paths_intersect(b, a)


def test_intersect_same_lane_touching_intervals():
    a = RoutedPath(0, 0, 6, lane=0, cmin=0, cmax=3)
    b = RoutedPath(1, 6, 10, lane=0, cmin=3, cmax=5)
    assert paths_intersect(a, b)  # share the switch and rung at column 3


def test_intersect_matches_resource_set_oracle():
    topo = build_topology(20)
    g = generate_synthetic(20, 90, seed=8)
    placement = place_anneal(g, topo, seed=3)
    paths = extract_paths(g, topo, placement)
    for a, b in itertools.combinations(paths, 2):
        assert paths_intersect(a, b) == oracle_intersect(a, b, topo), (a, b)


def test_intersect_symmetric_random():
    rng = random.Random(17)
    cols = 8
    for _ in range(300):
        def rand_path(eid):
            ca, cb = rng.randrange(cols), rng.randrange(cols)
            return RoutedPath(eid, 2 * ca, 2 * cb + 1, lane=rng.randrange(3),
                              cmin=min(ca, cb), cmax=max(ca, cb))
        a, b = rand_path(0), rand_path(1)
        assert paths_intersect(a, b) == paths_intersect(b, a)


def test_connections_sharing_a_cluster_always_intersect():
    rng = random.Random(23)
    for _ in range(20):
        n = rng.randint(4, 16)
        g = generate_synthetic(n, rng.randint(2, n * (n - 1)), seed=rng.randint(0, 10**6))
        topo = build_topology(max(n, 2))
        placement = place_anneal(g, topo, seed=rng.randint(0, 10**6))
        paths = extract_paths(g, topo, placement)
        for (i, ei), (j, ej) in itertools.combinations(enumerate(g.edges), 2):
            if {ei[0], ei[1]} & {ej[0], ej[1]}:
                assert paths_intersect(paths[i], paths[j])


def test_path_resources_match_oracle():
    topo = build_topology(16)
    g = generate_synthetic(16, 60, seed=5)
    placement = place_anneal(g, topo, seed=5)
    for p in extract_paths(g, topo, placement):
        assert path_resources(p, topo) == oracle_path_resources(p, topo)


def test_conflict_edges_oracle_is_consistent():
    topo = build_topology(12)
    g = generate_synthetic(12, 40, seed=6)
    placement = place_anneal(g, topo, seed=6)
    paths = extract_paths(g, topo, placement)
    edges = conflict_edges_from_oracle(paths, topo)
    for i, j in itertools.combinations(range(len(paths)), 2):
        assert (frozenset((i, j)) in edges) == paths_intersect(paths[i], paths[j])


def test_switch_states_for_span_path():
    topo = build_topology(12, 2)
    p = RoutedPath(0, 2, 9, lane=1, cmin=1, cmax=4)
    states = path_switch_states(p, topo)
    assert states[topo.switch_index(1, 1)] == SwitchState.RIGHT_RUNG
    assert states[topo.switch_index(1, 4)] == SwitchState.LEFT_RUNG
    assert states[topo.switch_index(1, 2)] == SwitchState.LEFT_RIGHT
    assert states[topo.switch_index(1, 3)] == SwitchState.LEFT_RIGHT
    assert len(states) == 4


def test_switch_states_same_column_empty():
    topo = build_topology(6, 2)
    assert path_switch_states(RoutedPath(0, 2, 3, lane=0, cmin=1, cmax=1), topo) == {}


def test_path_record_round_trip():
    p = RoutedPath(3, 2, 9, lane=1, cmin=1, cmax=4)
    assert path_from_record(path_record(p)) == p
