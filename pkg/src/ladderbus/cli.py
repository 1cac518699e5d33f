"""Pipeline driver: gen -> place -> route -> group -> emit-ctrl -> sim -> cost.

Every stage persists its output as one document in the run directory,
so any stage can be re-run from the persisted state of its
predecessors and a finished directory is a complete, reproducible
record. All randomness derives from the single root seed in the
config. Exit codes: 0 success, 2 config error, 3 stage failure,
4 invariant violation (e.g. simulated collision).

Usage:
    ladderbus run --config cfg.json --rundir out/
    ladderbus group --rundir out/            # re-run one stage
    ladderbus report --rundir out/ --format json
    ladderbus sweep --sizes 20,40 --densities 0.15 --seeds 0,1,2 --rundir out/

Config (JSON; any subset, defaults shown in DEFAULT_CONFIG):
    {"seed": 1,
     "graph": {"synthetic": {"n_clusters": 24, "n_edges": 128}},
     "topology": {"n_lanes": null, "lane_width_bits": 32},
     "placement": {"anneal": true, "cooling": 0.97, "iters": null},
     "grouping": {"algorithm": "maxclique", "compare": true},
     "controllers": {"count": null},
     "sim": {"frames": 1}}
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

from . import controlgen, costmodel, grouping, sim
from .appgraph import (
    GraphFormatError,
    dump_cluster_graph,
    generate_synthetic,
    graph_metrics,
    parse_cluster_graph,
)
from .placement import TilePlacement, place_anneal, place_greedy, placement_cost
from .routing import extract_paths, path_from_record, path_record
from .topology import build_topology

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_INVARIANT = 4

STAGE_ORDER = ["gen", "metrics", "place", "route", "group", "emit-ctrl", "sim", "cost"]

DEFAULT_CONFIG = {
    "name": "",
    "seed": 0,
    "graph": {},
    "topology": {"n_tiles": None, "n_lanes": None, "lane_width_bits": 32},
    "placement": {"anneal": True, "t0": None, "cooling": 0.97, "iters": None},
    "grouping": {"algorithm": "maxclique", "clique_budget_s": 10.0, "compare": True},
    "controllers": {"count": None},
    "sim": {"frames": 1, "trace": False},
}


class ConfigError(Exception):
    pass


class InvariantViolation(Exception):
    pass


# ---------------------------------------------------------------------------
# config and state helpers


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path: str | None, overrides: list[str] | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _deep_merge(cfg, loaded)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not key=value")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override '{key}' crosses a non-object value")
        node[parts[-1]] = value
    return cfg


def _save_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_json(path: Path, stage: str):
    if not path.exists():
        raise ConfigError(f"missing state file {path.name}; run the '{stage}' stage first")
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# stages


def stage_gen(cfg: dict, rundir: Path) -> None:
    spec = cfg.get("graph") or {}
    if "file" in spec:
        try:
            text = Path(spec["file"]).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read graph file: {exc}") from exc
        g = parse_cluster_graph(text)
    elif "synthetic" in spec:
        syn = spec["synthetic"]
        n = syn.get("n_clusters")
        if n is None:
            raise ConfigError("graph.synthetic.n_clusters is required")
        if "n_edges" in syn:
            n_edges = syn["n_edges"]
        elif "density" in syn:
            n_edges = round(syn["density"] * n * (n - 1))
        else:
            raise ConfigError("graph.synthetic needs n_edges or density")
        seed = syn.get("seed", cfg["seed"])
        g = generate_synthetic(n, n_edges, seed, name=cfg.get("name") or "")
    else:
        raise ConfigError("config needs graph.file or graph.synthetic")
    (rundir / "graph.json").write_text(dump_cluster_graph(g))


def stage_metrics(cfg: dict, rundir: Path) -> None:
    g = parse_cluster_graph(_read_state_text(rundir, "graph.json", "gen"))
    m = graph_metrics(g)
    _save_json(rundir / "metrics.json", {
        "name": g.name,
        "n_clusters": g.n_clusters,
        "n_edges": g.n_edges,
        "avg_degree": m.avg_degree,
        "density": m.density,
        "max_total_degree": m.max_total_degree,
    })


def _read_state_text(rundir: Path, name: str, stage: str) -> str:
    path = rundir / name
    if not path.exists():
        raise ConfigError(f"missing state file {name}; run the '{stage}' stage first")
    return path.read_text()


def _topology_from_state(rundir: Path):
    rec = _load_json(rundir / "topology.json", "place")
    return build_topology(rec["n_tiles"], rec["n_lanes"], rec["lane_width_bits"])


def stage_place(cfg: dict, rundir: Path) -> None:
    g = parse_cluster_graph(_read_state_text(rundir, "graph.json", "gen"))
    tcfg = cfg["topology"]
    n_tiles = tcfg.get("n_tiles") or max(g.n_clusters, 2)
    topo = build_topology(n_tiles, tcfg.get("n_lanes"), tcfg.get("lane_width_bits", 32))
    _save_json(rundir / "topology.json", topo.summary())

    pcfg = cfg["placement"]
    greedy = place_greedy(g, topo)
    greedy_cost = placement_cost(g, topo, greedy)
    if pcfg.get("anneal", True):
        final = place_anneal(
            g, topo, seed=cfg["seed"] + 1, t0=pcfg.get("t0"),
            cooling=pcfg.get("cooling", 0.97), iters=pcfg.get("iters"), initial=greedy,
        )
    else:
        final = greedy
    _save_json(rundir / "placement.json", {
        "assignment": list(final.assignment),
        "greedy_cost": greedy_cost,
        "final_cost": placement_cost(g, topo, final),
    })


def stage_route(cfg: dict, rundir: Path) -> None:
    g = parse_cluster_graph(_read_state_text(rundir, "graph.json", "gen"))
    topo = _topology_from_state(rundir)
    rec = _load_json(rundir / "placement.json", "place")
    placement = TilePlacement(assignment=tuple(rec["assignment"]))
    paths = extract_paths(g, topo, placement)
    _save_json(rundir / "paths.json", {"paths": [path_record(p) for p in paths]})


def _paths_from_state(rundir: Path):
    rec = _load_json(rundir / "paths.json", "route")
    return [path_from_record(r) for r in rec["paths"]]


def stage_group(cfg: dict, rundir: Path) -> None:
    g = parse_cluster_graph(_read_state_text(rundir, "graph.json", "gen"))
    topo = _topology_from_state(rundir)
    paths = _paths_from_state(rundir)
    gcfg = cfg["grouping"]
    algo = gcfg.get("algorithm", "maxclique")
    budget = gcfg.get("clique_budget_s", 10.0)

    def run_algo(name):
        if name == "greedy":
            return grouping.group_greedy(paths, topo)
        if name == "maxclique":
            return grouping.group_max_clique(paths, topo, clique_budget_s=budget)
        raise ConfigError(f"unknown grouping algorithm '{name}'")

    sset = run_algo(algo)
    try:
        grouping.validate_scenario_set(sset, paths, topo)
    except ValueError as exc:
        raise InvariantViolation(f"grouping produced an invalid scenario set: {exc}") from exc
    counts = {algo: sset.n_scenarios}
    if gcfg.get("compare", True):
        other = "greedy" if algo == "maxclique" else "maxclique"
        counts[other] = run_algo(other).n_scenarios
    doc = grouping.scenario_set_record(sset)
    doc["counts"] = counts
    doc["lower_bound"] = grouping.scenario_lower_bound(g)
    doc["raw_bits"] = grouping.raw_scenario_bits(sset, topo)
    doc["compressed_bits"] = grouping.compressed_scenario_bits(sset, topo)
    _save_json(rundir / "scenarios.json", doc)


def _scenarios_from_state(rundir: Path):
    return grouping.scenario_set_from_record(_load_json(rundir / "scenarios.json", "group"))


def _controller_count(cfg: dict, topo) -> int:
    return cfg["controllers"].get("count") or controlgen.default_controller_count(topo)


def stage_emit_ctrl(cfg: dict, rundir: Path) -> None:
    topo = _topology_from_state(rundir)
    sset = _scenarios_from_state(rundir)
    regions = controlgen.partition_regions(topo, _controller_count(cfg, topo))
    programs = controlgen.encode_scenarios(sset, regions, topo)
    progdir = rundir / "programs"
    progdir.mkdir(exist_ok=True)
    for prog in programs:
        (progdir / f"ctrl_{prog.region.controller_id:03d}.txt").write_text(controlgen.format_program(prog))
    _save_json(rundir / "controllers.json", {
        "count": len(programs),
        "memory_bits": controlgen.control_memory_bits(programs),
        "regions": [
            {"id": r.controller_id, "col_start": r.col_start, "col_end": r.col_end,
             "word_bits": r.word_bits}
            for r in (p.region for p in programs)
        ],
    })


def _programs_from_state(rundir: Path):
    meta = _load_json(rundir / "controllers.json", "emit-ctrl")
    programs = []
    for i in range(meta["count"]):
        text = _read_state_text(rundir, f"programs/ctrl_{i:03d}.txt", "emit-ctrl")
        programs.append(controlgen.parse_program(text))
    return programs


def stage_sim(cfg: dict, rundir: Path) -> None:
    topo = _topology_from_state(rundir)
    paths = _paths_from_state(rundir)
    sset = _scenarios_from_state(rundir)
    programs = _programs_from_state(rundir)
    n_frames = cfg["sim"].get("frames", 1)
    if cfg["sim"].get("trace"):
        with open(rundir / "trace.log", "w") as trace:
            report = sim.run_frames(topo, programs, paths, sset, n_frames, trace=trace)
    else:
        report = sim.run_frames(topo, programs, paths, sset, n_frames)
    _save_json(rundir / "sim_report.json", {
        "steps": report.steps,
        "n_frames": report.n_frames,
        "frame_length": report.frame_length,
        "delivered": {str(k): v for k, v in sorted(report.delivered.items())},
        "collisions": report.collisions,
        "collision_events": report.collision_events,
        "per_step_active": report.per_step_active,
        "energy": report.energy,
    })
    if report.collisions > 0:
        raise InvariantViolation(f"simulation detected {report.collisions} collision(s)")


def stage_cost(cfg: dict, rundir: Path) -> None:
    topo = _topology_from_state(rundir)
    scen = _load_json(rundir / "scenarios.json", "group")
    model = costmodel.calibrate(costmodel.reference_observations())
    n_ctrl = _controller_count(cfg, topo)
    rep = costmodel.cost_report(topo, scen["raw_bits"], n_ctrl, model)
    _save_json(rundir / "cost_report.json", {
        "data_plane_units": rep.data_plane_units,
        "control_plane_units": rep.control_plane_units,
        "control_fraction": rep.control_fraction,
        "coefficients": {"a": model.a, "b": model.b, "c": model.c, "d": model.d},
        "raw_bits": scen["raw_bits"],
        "compressed_bits": scen["compressed_bits"],
        "n_controllers": n_ctrl,
    })


STAGES = {
    "gen": stage_gen,
    "metrics": stage_metrics,
    "place": stage_place,
    "route": stage_route,
    "group": stage_group,
    "emit-ctrl": stage_emit_ctrl,
    "sim": stage_sim,
    "cost": stage_cost,
}


# ---------------------------------------------------------------------------
# report


def build_report(rundir: Path) -> dict:
    out: dict = {}
    if (rundir / "metrics.json").exists():
        out["metrics"] = json.loads((rundir / "metrics.json").read_text())
    if (rundir / "topology.json").exists():
        out["topology"] = json.loads((rundir / "topology.json").read_text())
    if (rundir / "placement.json").exists():
        rec = json.loads((rundir / "placement.json").read_text())
        out["placement"] = {"greedy_cost": rec["greedy_cost"], "final_cost": rec["final_cost"]}
    if (rundir / "scenarios.json").exists():
        rec = json.loads((rundir / "scenarios.json").read_text())
        section = {"lower_bound": rec["lower_bound"], "raw_bits": rec["raw_bits"],
                   "compressed_bits": rec["compressed_bits"], "algorithm": rec["algorithm"]}
        for algo, count in rec["counts"].items():
            section[f"scenarios_{algo}"] = count
        out["grouping"] = section
    if (rundir / "sim_report.json").exists():
        rec = json.loads((rundir / "sim_report.json").read_text())
        out["sim"] = {k: rec[k] for k in ("steps", "frame_length", "collisions", "energy")}
    if (rundir / "cost_report.json").exists():
        rec = json.loads((rundir / "cost_report.json").read_text())
        out["cost"] = {k: rec[k] for k in
                       ("data_plane_units", "control_plane_units", "control_fraction")}
    if (rundir / "sweep.json").exists():
        out["sweep_rows"] = json.loads((rundir / "sweep.json").read_text())
    return out


def render_report_text(report: dict) -> str:
    lines = []
    for section, content in report.items():
        if section == "sweep_rows":
            lines.append(f"[sweep] {len(content)} rows (use --format csv)")
            continue
        lines.append(f"[{section}]")
        for key, val in content.items():
            if isinstance(val, float):
                val = f"{val:.6g}"
            lines.append(f"  {key} = {val}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--rundir", required=True, help="run directory for state files")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="config override, dotted path (repeatable)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ladderbus",
                                     description="Segmented ladder bus mapping/scheduling flow")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_ORDER + ["run"]:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "run" else "run all stages")
        _add_common(p)

    p_rep = sub.add_parser("report", help="summarize a run directory")
    p_rep.add_argument("--rundir", required=True)
    p_rep.add_argument("--format", choices=["text", "json", "csv"], default="text")

    p_sw = sub.add_parser("sweep", help="scaling sweep over synthetic instances")
    p_sw.add_argument("--rundir", required=True)
    p_sw.add_argument("--sizes", required=True, help="comma-separated cluster counts")
    p_sw.add_argument("--densities", required=True, help="comma-separated densities")
    p_sw.add_argument("--seeds", required=True, help="comma-separated seeds")
    p_sw.add_argument("--algorithms", default="greedy,maxclique")
    p_sw.add_argument("--jobs", type=int, default=1)

    args = parser.parse_args(argv)

    try:
        if args.command == "report":
            rundir = Path(args.rundir)
            if not rundir.is_dir():
                raise ConfigError(f"run directory {rundir} does not exist")
            report = build_report(rundir)
            if args.format == "json":
                sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
            elif args.format == "csv":
                rows = report.get("sweep_rows")
                if rows is None:
                    raise ConfigError("no sweep state in run directory")
                sys.stdout.write(costmodel.sweep_to_csv(rows))
            else:
                sys.stdout.write(render_report_text(report))
            return EXIT_OK

        if args.command == "sweep":
            rundir = Path(args.rundir)
            rundir.mkdir(parents=True, exist_ok=True)
            try:
                sizes = [int(v) for v in args.sizes.split(",")]
                densities = [float(v) for v in args.densities.split(",")]
                seeds = [int(v) for v in args.seeds.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad sweep parameter: {exc}") from exc
            algos = args.algorithms.split(",")
            rows = costmodel.scaling_sweep(sizes, densities, seeds, algos, jobs=args.jobs)
            _save_json(rundir / "sweep.json", rows)
            (rundir / "sweep.csv").write_text(costmodel.sweep_to_csv(rows))
            sys.stdout.write(f"sweep: {len(rows)} rows -> {rundir / 'sweep.csv'}\n")
            return EXIT_OK

        # pipeline stages
        cfg = load_config(args.config, args.overrides)
        rundir = Path(args.rundir)
        rundir.mkdir(parents=True, exist_ok=True)
        _save_json(rundir / "config.json", cfg)
        stages = STAGE_ORDER if args.command == "run" else [args.command]
        for name in stages:
            try:
                STAGES[name](cfg, rundir)
            except (ConfigError, InvariantViolation):
                raise
            except (ValueError, GraphFormatError, OSError, KeyError) as exc:
                print(f"stage {name} failed: {exc}", file=sys.stderr)
                return EXIT_STAGE
            print(f"stage {name}: ok")
        return EXIT_OK

    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
