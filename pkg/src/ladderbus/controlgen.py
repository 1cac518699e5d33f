"""Distributed controller programs: scenario memories plus a loop schedule.

The switch fabric is split into regions of contiguous columns, one
local controller each. A controller stores, per scenario, one memory
word holding the 2-bit states of exactly its switches, and steps
through a loop-nest schedule replicated identically on every
controller (global lockstep): an infinite outer loop over (scenario,
repeat) entries, plus at most one guarded entry appended to the frame
when a runtime flag is raised.

Word layout: the region's switches sorted by (lane, column); switch j
of that order occupies bits [2j, 2j+1] (LSB first).

Program text format (byte-stable, one file per controller)::

    ladderbus-ctrl v1
    region 0
    columns 0 2
    n_lanes 3
    word_bits 18
    scenarios 4
    mem 00000 3a824 00108 20004
    step 0 1
    step 1 1
    cond 0 2        # optional: flag id, scenario id
    end
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .grouping import ScenarioSet
from .topology import LadderTopology, round_half_up_sqrt


@dataclass(frozen=True)
class ControllerRegion:
    controller_id: int
    col_start: int  # columns [col_start, col_end] inclusive
    col_end: int
    n_lanes: int

    @property
    def n_columns(self) -> int:
        return self.col_end - self.col_start + 1

    @property
    def n_switches(self) -> int:
        return self.n_lanes * self.n_columns

    @property
    def word_bits(self) -> int:
        return 2 * self.n_switches

    def switches(self) -> list[tuple[int, int]]:
        """(lane, column) pairs in word order."""
        return [
            (lane, col)
            for lane in range(self.n_lanes)
            for col in range(self.col_start, self.col_end + 1)
        ]


@dataclass(frozen=True)
class Schedule:
    """(scenario, repeat) entries per frame plus an optional guarded entry."""

    entries: tuple[tuple[int, int], ...]
    conditional: tuple[int, int] | None = None  # (flag id, scenario id)

    @property
    def frame_length(self) -> int:
        """Steps per frame with the guard down."""
        return sum(rep for _, rep in self.entries)

    def steps(self, flag_raised: bool = False) -> list[int]:
        """Scenario index sequence for one frame."""
        out = []
        for idx, rep in self.entries:
            out.extend([idx] * rep)
        if self.conditional is not None and flag_raised:
            out.append(self.conditional[1])
        return out


@dataclass(frozen=True)
class ControllerProgram:
    region: ControllerRegion
    memory: tuple[int, ...]  # one word per scenario
    schedule: Schedule


def default_controller_count(topo: LadderTopology) -> int:
    return max(1, round_half_up_sqrt(topo.n_columns))


def partition_regions(topo: LadderTopology, n_controllers: int) -> list[ControllerRegion]:
    """Split columns into contiguous blocks with sizes differing by at most 1."""
    cols = topo.n_columns
    if not (1 <= n_controllers <= cols):
        raise ValueError(f"n_controllers must be in 1..{cols}, got {n_controllers}")
    base, extra = divmod(cols, n_controllers)
    regions = []
    start = 0
    for i in range(n_controllers):
        size = base + (1 if i < extra else 0)
        regions.append(
            ControllerRegion(controller_id=i, col_start=start, col_end=start + size - 1,
                             n_lanes=topo.n_lanes)
        )
        start += size
    return regions


def encode_word(region: ControllerRegion, global_vector, topo: LadderTopology) -> int:
    word = 0
    for j, (lane, col) in enumerate(region.switches()):
        word |= (global_vector[topo.switch_index(lane, col)] & 0b11) << (2 * j)
    return word


def decode_word(region: ControllerRegion, word: int) -> dict[tuple[int, int], int]:
    """(lane, column) -> state for one region word."""
    return {
        (lane, col): (word >> (2 * j)) & 0b11
        for j, (lane, col) in enumerate(region.switches())
    }


def encode_scenarios(
    sset: ScenarioSet,
    regions: list[ControllerRegion],
    topo: LadderTopology,
    schedule: Schedule | None = None,
) -> list[ControllerProgram]:
    """Project every scenario's switch vector onto each region's memory."""
    for vec in sset.switch_vectors:
        if len(vec) != topo.n_switches:
            raise ValueError("switch vector length does not match topology")
    covered = sorted((r.col_start, r.col_end) for r in regions)
    expect = 0
    for lo, hi in covered:
        if lo != expect:
            raise ValueError("regions do not partition the columns")
        expect = hi + 1
    if expect != topo.n_columns:
        raise ValueError("regions do not partition the columns")
    if schedule is None:
        schedule = build_schedule(sset)
    programs = []
    for region in regions:
        memory = tuple(encode_word(region, vec, topo) for vec in sset.switch_vectors)
        programs.append(ControllerProgram(region=region, memory=memory, schedule=schedule))
    return programs


def decode_programs(programs: list[ControllerProgram], topo: LadderTopology) -> list[tuple[int, ...]]:
    """Reassemble global switch vectors from all regions' memories."""
    if not programs:
        return []
    n_scen = len(programs[0].memory)
    vectors = []
    for k in range(n_scen):
        vec = [0] * topo.n_switches
        for prog in programs:
            if len(prog.memory) != n_scen:
                raise ValueError("programs disagree on scenario count")
            for (lane, col), state in decode_word(prog.region, prog.memory[k]).items():
                vec[topo.switch_index(lane, col)] = state
        vectors.append(tuple(vec))
    return vectors


def build_schedule(
    sset: ScenarioSet,
    frame_order: list[int] | None = None,
    conditional: tuple[int, int] | None = None,
) -> Schedule:
    """One pass over all scenarios per frame, repeat 1 each, outer loop infinite."""
    n = sset.n_scenarios
    if frame_order is None:
        frame_order = list(range(n))
    if sorted(frame_order) != list(range(n)):
        raise ValueError(f"frame_order must be a permutation of 0..{n - 1}")
    if conditional is not None and not (0 <= conditional[1] < n):
        raise ValueError(f"conditional scenario {conditional[1]} out of range")
    return Schedule(entries=tuple((idx, 1) for idx in frame_order), conditional=conditional)


def control_memory_bits(programs: list[ControllerProgram]) -> int:
    """Total scenario-memory bits across all controllers."""
    return sum(len(p.memory) * p.region.word_bits for p in programs)


# ---------------------------------------------------------------------------
# program files


def format_program(prog: ControllerProgram) -> str:
    r = prog.region
    digits = max(1, math.ceil(r.word_bits / 4))
    lines = [
        "ladderbus-ctrl v1",
        f"region {r.controller_id}",
        f"columns {r.col_start} {r.col_end}",
        f"n_lanes {r.n_lanes}",
        f"word_bits {r.word_bits}",
        f"scenarios {len(prog.memory)}",
        "mem" + "".join(f" {w:0{digits}x}" for w in prog.memory),
    ]
    for idx, rep in prog.schedule.entries:
        lines.append(f"step {idx} {rep}")
    if prog.schedule.conditional is not None:
        flag, idx = prog.schedule.conditional
        lines.append(f"cond {flag} {idx}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_program(text: str) -> ControllerProgram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "ladderbus-ctrl v1":
        raise ValueError("not a ladderbus-ctrl v1 program")
    fields: dict[str, list[str]] = {}
    entries: list[tuple[int, int]] = []
    conditional = None
    for ln in lines[1:]:
        parts = ln.split()
        key = parts[0]
        if key == "step":
            entries.append((int(parts[1]), int(parts[2])))
        elif key == "cond":
            conditional = (int(parts[1]), int(parts[2]))
        elif key == "end":
            break
        else:
            fields[key] = parts[1:]
    region = ControllerRegion(
        controller_id=int(fields["region"][0]),
        col_start=int(fields["columns"][0]),
        col_end=int(fields["columns"][1]),
        n_lanes=int(fields["n_lanes"][0]),
    )
    memory = tuple(int(w, 16) for w in fields["mem"]) if "mem" in fields else ()
    n_scen = int(fields["scenarios"][0])
    if len(memory) != n_scen:
        raise ValueError(f"expected {n_scen} memory words, found {len(memory)}")
    return ControllerProgram(
        region=region, memory=memory,
        schedule=Schedule(entries=tuple(entries), conditional=conditional),
    )
