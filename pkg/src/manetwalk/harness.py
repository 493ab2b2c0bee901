"""Experiment orchestration: sweeps, replicates, CSV emission, figure-data extraction."""

import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (MOBILITY_MODELS, WALK_STRATEGIES, ConfigError, SimConfig,
                   geometry_for, parse_config_lines, rng_stream, validate_config)
from .graphs import DiskGraph
from .metrics import RunRecord
from .mobility import init_deployment
from .walk import Clock, TraceEntry, VisitTable, World, run_walk

_U64 = (1 << 64) - 1

# The reference experiment grid the default sweep covers.
DEFAULT_N_NODES = (100, 300, 500, 1000)
DEFAULT_SPEEDS = (3.0, 7.0, 11.0, 15.0)


@dataclass
class SweepSpec:
    """A grid of sweep points over a base config, with replicates per point."""

    base: SimConfig
    n_nodes: Sequence[int] = DEFAULT_N_NODES
    speeds: Sequence[float] = DEFAULT_SPEEDS
    models: Sequence[str] = ("random_direction", "random_waypoint")
    strategies: Sequence[str] = WALK_STRATEGIES
    replicates: int = 10
    seed_base: int = 1


Point = Tuple[int, float, str, str]  # (n_nodes, speed_avg, mobility_model, walk_strategy)


def sweep_points(spec: SweepSpec) -> List[Point]:
    return [(int(n), float(v), m, s)
            for n in spec.n_nodes for v in spec.speeds
            for m in spec.models for s in spec.strategies]


def derive_seed(seed_base: int, point: Point, replicate: int) -> int:
    """Stable per-run seed: seed_base xor a hash of the sweep coordinates."""
    key = f"{point[0]}|{point[1]!r}|{point[2]}|{point[3]}|{replicate}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return (seed_base ^ int.from_bytes(digest[:8], "big")) & _U64


def validate_spec(spec: SweepSpec) -> SweepSpec:
    """Check axes and replicates, and that derived seeds never collide."""
    if spec.replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {spec.replicates}")
    if not spec.n_nodes or not spec.speeds or not spec.models or not spec.strategies:
        raise ConfigError("every sweep axis needs at least one value")
    for m in spec.models:
        if m not in MOBILITY_MODELS:
            raise ConfigError(f"unknown mobility_model in sweep axis: {m!r}")
    for s in spec.strategies:
        if s not in WALK_STRATEGIES:
            raise ConfigError(f"unknown walk_strategy in sweep axis: {s!r}")
    points = sweep_points(spec)
    seeds = {derive_seed(spec.seed_base, p, r) for p in points for r in range(spec.replicates)}
    if len(seeds) != len(points) * spec.replicates:
        raise ConfigError("seed derivation collided across the sweep grid")
    validate_config(point_config(spec, points[0], 0))
    return spec


def point_config(spec: SweepSpec, point: Point, replicate: int) -> SimConfig:
    n, speed, model, strategy = point
    return replace(spec.base, n_nodes=n, speed_avg=speed, mobility_model=model,
                   walk_strategy=strategy,
                   seed=derive_seed(spec.seed_base, point, replicate))


def build_run(config: SimConfig):
    """Wire up one run: validated config, disk-graph provider, world, walk stream."""
    cfg = validate_config(config)
    geometry = geometry_for(cfg)
    state = init_deployment(cfg, geometry, rng_stream(cfg.seed, "deployment"),
                            motion_rng=rng_stream(cfg.seed, "mobility"))
    provider = DiskGraph(state.positions, geometry.comm_range)
    world = World(clock=Clock(cfg.tick), visits=VisitTable(cfg.n_nodes),
                  mobility=state, geometry=geometry)
    return cfg, provider, world, rng_stream(cfg.seed, "walk")


def run_single(config: SimConfig, trace: Optional[List[TraceEntry]] = None) -> RunRecord:
    """Build the world for one config and run its walk to completion."""
    cfg, provider, world, walk_rng = build_run(config)
    return run_walk(cfg, provider, world, walk_rng, trace=trace)


def _run_task(args) -> RunRecord:
    config, replicate = args
    try:
        record = run_single(config)
    except Exception as exc:  # a failed run is data, not a sweep abort
        record = RunRecord(config=config, seed=config.seed, error=str(exc))
    record.replicate = replicate
    return record


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[RunRecord]:
    """One record per (point, replicate), in canonical order whatever the schedule."""
    spec = validate_spec(spec)
    tasks = [(point_config(spec, p, r), r)
             for p in sweep_points(spec) for r in range(spec.replicates)]
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


# --- summaries ---------------------------------------------------------------

POINT_COLUMNS = ("n_nodes", "density", "mobility_model", "speed_avg", "walk_strategy")

RUNS_COLUMNS = POINT_COLUMNS + (
    "replicate", "seed", "timed_out", "waiting_ticks", "churn_rate",
    "milestone", "achieved_coverage", "sim_time", "hops", "unique_visited",
    "overhead", "visit_variance")

HIST_COLUMNS = POINT_COLUMNS + (
    "replicate", "seed", "milestone", "visits", "node_count", "node_fraction")

SUMMARY_COLUMNS = POINT_COLUMNS + (
    "milestone", "runs", "completed", "timed_out", "failed",
    "mean_overhead", "std_overhead", "mean_hops", "mean_sim_time", "mean_churn_rate")


@dataclass
class SummaryRow:
    """Aggregate over the completed replicates of one sweep point at one milestone."""

    n_nodes: int
    density: float
    mobility_model: str
    speed_avg: float
    walk_strategy: str
    milestone: float
    runs: int
    completed: int
    timed_out: int
    failed: int
    mean_overhead: Optional[float]
    std_overhead: Optional[float]
    mean_hops: Optional[float]
    mean_sim_time: Optional[float]
    mean_churn_rate: Optional[float]


def _point_of(config: SimConfig) -> Tuple:
    return (config.n_nodes, config.density, config.mobility_model,
            config.speed_avg, config.walk_strategy)


def summarize(records: Iterable[RunRecord]) -> List[SummaryRow]:
    """Means and standard deviations per sweep point per milestone.

    Aggregates use completed (non-timed-out, non-failed) runs only; timed-out
    and failed counts are reported alongside. Standard deviations are
    population deviations, so a single run reports 0.
    """
    groups: Dict[Tuple, List[RunRecord]] = {}
    order: List[Tuple] = []
    for rec in records:
        key = _point_of(rec.config)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)

    rows: List[SummaryRow] = []
    for key in order:
        group = groups[key]
        complete = [r for r in group if not r.timed_out and r.error is None]
        timed_out = sum(1 for r in group if r.timed_out)
        failed = sum(1 for r in group if r.error is not None)
        targets = group[0].config.milestones
        for target in targets:
            snaps = [s for r in complete for s in r.milestones
                     if s.target_coverage == target]
            if snaps:
                overheads = np.array([s.overhead for s in snaps])
                mean_ov = float(overheads.mean())
                std_ov = float(overheads.std())
                mean_hops = float(np.mean([s.hops for s in snaps]))
                mean_time = float(np.mean([s.sim_time for s in snaps]))
                mean_churn = float(np.mean([r.churn_rate for r in complete]))
            else:
                mean_ov = std_ov = mean_hops = mean_time = mean_churn = None
            rows.append(SummaryRow(*key, milestone=target, runs=len(group),
                                   completed=len(complete), timed_out=timed_out,
                                   failed=failed, mean_overhead=mean_ov,
                                   std_overhead=std_ov, mean_hops=mean_hops,
                                   mean_sim_time=mean_time, mean_churn_rate=mean_churn))
    return rows


# --- CSV emission ------------------------------------------------------------

def fmt(value) -> str:
    """Canonical cell format: floats at 9 significant digits, bools as 0/1."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def run_rows(records: Iterable[RunRecord]) -> List[List[str]]:
    rows = []
    for rec in records:
        c = rec.config
        head = [fmt(c.n_nodes), fmt(c.density), c.mobility_model, fmt(c.speed_avg),
                c.walk_strategy, fmt(rec.replicate), fmt(rec.seed), fmt(rec.timed_out),
                fmt(rec.waiting_ticks), fmt(rec.churn_rate)]
        for snap in rec.milestones:
            rows.append(head + [fmt(snap.target_coverage), fmt(snap.achieved_coverage),
                                fmt(snap.sim_time), fmt(snap.hops),
                                fmt(snap.unique_visited), fmt(snap.overhead),
                                fmt(snap.visit_variance)])
    return rows


def histogram_rows(records: Iterable[RunRecord]) -> List[List[str]]:
    rows = []
    for rec in records:
        c = rec.config
        head = [fmt(c.n_nodes), fmt(c.density), c.mobility_model, fmt(c.speed_avg),
                c.walk_strategy, fmt(rec.replicate), fmt(rec.seed)]
        for snap in rec.milestones:
            for visits in sorted(snap.histogram):
                count = snap.histogram[visits]
                rows.append(head + [fmt(snap.target_coverage), fmt(visits),
                                    fmt(count), fmt(count / c.n_nodes)])
    return rows


def summary_rows(summary: Iterable[SummaryRow]) -> List[List[str]]:
    rows = []
    for s in summary:
        rows.append([fmt(s.n_nodes), fmt(s.density), s.mobility_model, fmt(s.speed_avg),
                     s.walk_strategy, fmt(s.milestone), fmt(s.runs), fmt(s.completed),
                     fmt(s.timed_out), fmt(s.failed), fmt(s.mean_overhead),
                     fmt(s.std_overhead), fmt(s.mean_hops), fmt(s.mean_sim_time),
                     fmt(s.mean_churn_rate)])
    return rows


def _write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_csv(records: Sequence[RunRecord], out_dir) -> Dict[str, str]:
    """Write runs.csv, summary.csv and histograms.csv; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "runs": os.path.join(out_dir, "runs.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
        "histograms": os.path.join(out_dir, "histograms.csv"),
    }
    _write_csv(paths["runs"], RUNS_COLUMNS, run_rows(records))
    _write_csv(paths["summary"], SUMMARY_COLUMNS, summary_rows(summarize(records)))
    _write_csv(paths["histograms"], HIST_COLUMNS, histogram_rows(records))
    return paths


def emit_trace(trace: Sequence[TraceEntry], path, n_nodes: int, seed: int,
               start_node: int) -> None:
    """One line per hop attempt; the header carries what replay needs."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# n_nodes={n_nodes} seed={seed} start={start_node}\n")
            fh.write("# tick node neighbors(id:visits,...) decision outcome\n")
            for e in trace:
                nbrs = ",".join(f"{i}:{c}" for i, c in zip(e.neighbor_ids, e.visit_counts))
                fh.write(f"{e.tick_index} {e.node} {nbrs or '-'} "
                         f"{e.decision if e.moved else '-'} "
                         f"{'moved' if e.moved else 'stranded'}\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def parse_trace(path) -> Tuple[Dict[str, int], List[TraceEntry]]:
    """Read a trace file back into entries (the replay side of emit_trace)."""
    meta: Dict[str, int] = {}
    entries: List[TraceEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for part in line[1:].split():
                    if "=" in part:
                        k, v = part.split("=", 1)
                        meta[k] = int(v)
                continue
            tick, node, nbrs, decision, outcome = line.split()
            if nbrs == "-":
                ids, counts = (), ()
            else:
                pairs = [p.split(":") for p in nbrs.split(",")]
                ids = tuple(int(a) for a, _ in pairs)
                counts = tuple(int(b) for _, b in pairs)
            entries.append(TraceEntry(int(tick), int(node), ids, counts,
                                      -1 if decision == "-" else int(decision),
                                      outcome == "moved"))
    return meta, entries


def summarize_runs_csv(out_dir) -> str:
    """Rebuild summary.csv from an existing runs.csv.

    Works purely from the file, so milestones no run reached and failed runs
    (which emit no rows) cannot be reconstructed; the sweep command's in-memory
    summary is authoritative for those.
    """
    rows = _read_csv(os.path.join(out_dir, "runs.csv"))
    groups: Dict[Tuple, List[Dict[str, str]]] = {}
    order: List[Tuple] = []
    for row in rows:
        key = tuple(row[c] for c in POINT_COLUMNS)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    summary: List[SummaryRow] = []
    for key in order:
        group = groups[key]
        runs = {(r["replicate"], r["seed"]): r for r in group}
        complete = {k: r for k, r in runs.items() if r["timed_out"] == "0"}
        timed_out = len(runs) - len(complete)
        targets = sorted({float(r["milestone"]) for r in group})
        for target in targets:
            snaps = [r for r in group
                     if float(r["milestone"]) == target and r["timed_out"] == "0"]
            if snaps:
                overheads = np.array([float(r["overhead"]) for r in snaps])
                mean_ov = float(overheads.mean())
                std_ov = float(overheads.std())
                mean_hops = float(np.mean([float(r["hops"]) for r in snaps]))
                mean_time = float(np.mean([float(r["sim_time"]) for r in snaps]))
                mean_churn = float(np.mean([float(r["churn_rate"])
                                            for r in complete.values()]))
            else:
                mean_ov = std_ov = mean_hops = mean_time = mean_churn = None
            summary.append(SummaryRow(
                int(key[0]), float(key[1]), key[2], float(key[3]), key[4],
                milestone=target, runs=len(runs), completed=len(complete),
                timed_out=timed_out, failed=0, mean_overhead=mean_ov,
                std_overhead=std_ov, mean_hops=mean_hops, mean_sim_time=mean_time,
                mean_churn_rate=mean_churn))
    path = os.path.join(out_dir, "summary.csv")
    _write_csv(path, SUMMARY_COLUMNS, summary_rows(summary))
    return path


# --- sweep spec files --------------------------------------------------------

def _parse_int_list(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


def _parse_float_list(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _parse_str_list(text):
    return tuple(x for x in text.replace(",", " ").split())


SWEEP_PARSERS = {
    "sweep_n_nodes": _parse_int_list,
    "sweep_speed_avg": _parse_float_list,
    "sweep_mobility_model": _parse_str_list,
    "sweep_walk_strategy": _parse_str_list,
    "replicates": int,
    "seed_base": int,
}


def read_sweep_file(path) -> SweepSpec:
    """A sweep file is a flat config file plus sweep_* axis keys."""
    from .core import CONFIG_PARSERS
    parsers = dict(CONFIG_PARSERS)
    parsers.update(SWEEP_PARSERS)
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_lines(fh, source=str(path), parsers=parsers)
    sweep_kwargs = {}
    base_kwargs = {}
    for key, value in values.items():
        if key == "sweep_n_nodes":
            sweep_kwargs["n_nodes"] = value
        elif key == "sweep_speed_avg":
            sweep_kwargs["speeds"] = value
        elif key == "sweep_mobility_model":
            sweep_kwargs["models"] = value
        elif key == "sweep_walk_strategy":
            sweep_kwargs["strategies"] = value
        elif key in ("replicates", "seed_base"):
            sweep_kwargs[key] = value
        else:
            base_kwargs[key] = value
    base = SimConfig(**base_kwargs)
    return SweepSpec(base=base, **sweep_kwargs)


# --- figure data -------------------------------------------------------------

FIGURES = ("fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5")


def _read_csv(path) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _group_mean(rows, keys, value_key):
    groups: Dict[Tuple, List[float]] = {}
    for row in rows:
        if row[value_key] == "":
            continue
        key = tuple(row[k] for k in keys)
        groups.setdefault(key, []).append(float(row[value_key]))
    return {k: sum(v) / len(v) for k, v in groups.items()}


def figdata(fig_id: str, out_dir) -> str:
    """Extract gnuplot-ready plot columns for one named figure layout."""
    if fig_id not in FIGURES:
        raise ConfigError(f"unknown figure id {fig_id!r}, expected one of {FIGURES}")
    dest = os.path.join(out_dir, f"{fig_id}.dat")
    full = fmt(1.0)
    if fig_id in ("fig1", "fig4"):
        rows = _read_csv(os.path.join(out_dir, "histograms.csv"))
        rows = [r for r in rows if r["visits"] != "0"]  # zero bin is a plot-layer exclusion
        if fig_id == "fig1":
            rows = [r for r in rows if r["walk_strategy"] == "self_repelling"]
            keys = ("milestone", "n_nodes", "visits")
            header = "milestone n_nodes visits mean_node_count mean_node_fraction"
        else:
            rows = [r for r in rows if r["milestone"] == full]
            keys = ("walk_strategy", "n_nodes", "visits")
            header = "walk_strategy n_nodes visits mean_node_count mean_node_fraction"
        counts = _group_mean(rows, keys, "node_count")
        fracs = _group_mean(rows, keys, "node_fraction")
        out_rows = [list(k) + [fmt(counts[k]), fmt(fracs[k])]
                    for k in sorted(counts, key=_numeric_key)]
    else:
        rows = _read_csv(os.path.join(out_dir, "summary.csv"))
        rows = [r for r in rows if r["mean_overhead"] != ""]
        if fig_id == "fig2a":
            rows = [r for r in rows if r["walk_strategy"] == "self_repelling"]
            cols = ("n_nodes", "milestone", "mean_overhead", "std_overhead")
            header = " ".join(cols)
        elif fig_id == "fig2b":
            rows = [r for r in rows
                    if r["walk_strategy"] == "self_repelling" and r["milestone"] == full]
            cols = ("n_nodes", "mean_overhead", "std_overhead")
            header = " ".join(cols)
        elif fig_id == "fig3a":
            rows = [r for r in rows
                    if r["walk_strategy"] == "self_repelling" and r["milestone"] == full]
            cols = ("mobility_model", "n_nodes", "speed_avg", "mean_overhead")
            header = " ".join(cols)
        elif fig_id == "fig3b":
            rows = [r for r in rows
                    if r["walk_strategy"] == "self_repelling" and r["milestone"] == full]
            cols = ("speed_avg", "n_nodes", "mobility_model", "mean_overhead")
            header = " ".join(cols)
        else:  # fig5
            cols = ("walk_strategy", "n_nodes", "milestone", "mean_overhead")
            header = " ".join(cols)
        out_rows = sorted(([r[c] for c in cols] for r in rows), key=_numeric_key)
    try:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(f"# {header}\n")
            for row in out_rows:
                fh.write(" ".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {dest}: {exc}") from exc
    return dest


def _numeric_key(values):
    key = []
    for v in values:
        try:
            key.append((0, float(v), ""))
        except (TypeError, ValueError):
            key.append((1, 0.0, str(v)))
    return key
