"""Connection routing on the ladder and the path-intersection predicate.

On a ladder the geometry of a connection is forced: it occupies the
column interval between its endpoint tiles, entering and leaving
through the shared rung of each endpoint column. The only routing
freedom is the lane, chosen least-loaded at routing time so that
intersection becomes a pairwise-decidable predicate.

Two paths intersect iff they touch a common rung column, or run on the
same lane with overlapping column intervals (which shares a switch or
a segment). Rungs are shared across lanes, so rung contention is
lane-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .appgraph import ClusterGraph
from .placement import TilePlacement
from .topology import LadderTopology, SwitchState, tile_column


@dataclass(frozen=True)
class RoutedPath:
    """One connection realized on the ladder."""

    edge_id: int
    src_tile: int
    dst_tile: int
    lane: int
    cmin: int  # interval [cmin, cmax] of traversed columns, inclusive
    cmax: int

    @property
    def rung_columns(self) -> frozenset[int]:
        return frozenset((self.cmin, self.cmax))


def route_connection(
    topo: LadderTopology,
    src_tile: int,
    dst_tile: int,
    lane_load: list[list[int]],
    edge_id: int = 0,
) -> RoutedPath:
    """Route one connection on the least-loaded lane; updates lane_load.

    lane_load[lane][i] counts paths already using the horizontal segment
    between columns i and i+1 on that lane. The chosen lane minimizes
    the summed load over the connection's interval, ties to the lowest
    lane id. Same-column connections use only the rung and add no load.
    """
    if src_tile == dst_tile:
        raise ValueError(f"connection from tile {src_tile} to itself")
    c1 = tile_column(topo, src_tile)
    c2 = tile_column(topo, dst_tile)
    cmin, cmax = min(c1, c2), max(c1, c2)
    best_lane, best_load = 0, None
    for lane in range(topo.n_lanes):
        load = sum(lane_load[lane][cmin:cmax])
        if best_load is None or load < best_load:
            best_lane, best_load = lane, load
    for i in range(cmin, cmax):
        lane_load[best_lane][i] += 1
    return RoutedPath(
        edge_id=edge_id, src_tile=src_tile, dst_tile=dst_tile,
        lane=best_lane, cmin=cmin, cmax=cmax,
    )


def extract_paths(g: ClusterGraph, topo: LadderTopology, p: TilePlacement) -> list[RoutedPath]:
    """One RoutedPath per cluster-graph edge, in edge-id order."""
    p.validate(g, topo)
    lane_load = [[0] * max(topo.n_columns - 1, 0) for _ in range(topo.n_lanes)]
    paths = []
    for edge_id, (src, dst, _w) in enumerate(g.edges):
        paths.append(
            route_connection(topo, p.tile_of(src), p.tile_of(dst), lane_load, edge_id=edge_id)
        )
    return paths


def paths_intersect(a: RoutedPath, b: RoutedPath) -> bool:
    """True iff the two paths contend for any switch, segment or rung."""
    if a.cmin == b.cmin or a.cmin == b.cmax or a.cmax == b.cmin or a.cmax == b.cmax:
        return True
    return a.lane == b.lane and a.cmin <= b.cmax and b.cmin <= a.cmax


def path_switch_states(path: RoutedPath, topo: LadderTopology) -> dict[int, SwitchState]:
    """Non-IDLE switch settings realizing a path, keyed by switch index.

    A same-column connection travels tile-to-tile over the rung alone
    and needs no switch; its lane switch is reserved but left IDLE.
    """
    if path.cmin == path.cmax:
        return {}
    states: dict[int, SwitchState] = {}
    lane = path.lane
    states[topo.switch_index(lane, path.cmin)] = SwitchState.RIGHT_RUNG
    states[topo.switch_index(lane, path.cmax)] = SwitchState.LEFT_RUNG
    for c in range(path.cmin + 1, path.cmax):
        states[topo.switch_index(lane, c)] = SwitchState.LEFT_RIGHT
    return states


def path_resources(path: RoutedPath, topo: LadderTopology) -> set[tuple]:
    """Explicit resource footprint: rungs, switches and segments claimed.

    Switch claims cover the whole interval (including the reserved
    switch of a same-column path): bufferless switches cannot be
    time-multiplexed within a scenario.
    """
    res: set[tuple] = {("rung", c) for c in path.rung_columns}
    for c in range(path.cmin, path.cmax + 1):
        res.add(("sw", path.lane, c))
    for i in range(path.cmin, path.cmax):
        res.add(("seg", path.lane, i))
    return res


def path_record(path: RoutedPath) -> dict:
    """Serialized pipeline-state form of a path."""
    return {
        "edge": path.edge_id,
        "src": path.src_tile,
        "dst": path.dst_tile,
        "lane": path.lane,
        "cmin": path.cmin,
        "cmax": path.cmax,
    }


def path_from_record(rec: dict) -> RoutedPath:
    return RoutedPath(
        edge_id=rec["edge"], src_tile=rec["src"], dst_tile=rec["dst"],
        lane=rec["lane"], cmin=rec["cmin"], cmax=rec["cmax"],
    )
