"""Experiment orchestration: run cells, records, aggregate reports, dataset collection."""
from __future__ import annotations

import csv
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .colgen import CgConfig, CgResult, StabPolicy, run_colgen
from .colgen import ADAPTIVE_REFERENCE, CLASSIC, FIXED_REFERENCE, PREVIOUS_ITERATE
from .features import compute_features, predict_degree_baseline
from .graph import Graph, generate_random_graph, parse_dimacs, warm_start_columns
from .labels import LabelError, collect_labels
from .models import Model, load_model, predict_duals

log = logging.getLogger("stabcg")

METHODS = ("classic", "scg", "scg-deg", "scg-ffnn", "scg-gcn", "ascg-deg", "ascg-ffnn", "ascg-gcn")
RECORD_FIELDS = ("instance", "method", "seed", "status", "iterations", "objective", "wall_s", "pricing_s")

DEFAULT_EPSILON0 = {"scg": 1.0, "scg-deg": 0.1, "scg-ffnn": 0.1, "scg-gcn": 0.1,
                    "ascg-deg": 0.5, "ascg-ffnn": 0.5, "ascg-gcn": 0.5}


class AggregationError(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    instance: str
    method: str
    seed: int
    status: str
    iterations: int
    objective: float
    wall_s: float
    pricing_s: float


@dataclass
class BenchmarkConfig:
    instances: list[str]
    methods: list[str]
    seeds: list[int] | None = None
    time_limit: float = 3600.0
    max_iterations: int = 100_000
    pricing_mode: str = "exact"
    model_path: str | None = None
    epsilon0: float | None = None
    floor: float = 0.01
    out_dir: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.instances:
            raise ValueError("instance list is empty")
        if not self.methods:
            raise ValueError("method list is empty")
        if self.seeds is None:
            self.seeds = list(range(1, 11))
        if not self.seeds:
            raise ValueError("seed list is empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


def emit_dimacs(g: Graph, comment: str | None = None) -> str:
    """Render a graph in DIMACS .col text (1-based vertices)."""
    lines = []
    if comment:
        lines.append(f"c {comment}")
    lines.append(f"p edge {g.n} {len(g.edges)}")
    for u, v in g.edges:
        lines.append(f"e {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"


def resolve_instance(spec: str) -> tuple[str, Graph]:
    """Instance spec: a .col file path or `gen:<n>,<p>,<seed>`."""
    if spec.startswith("gen:"):
        parts = spec[4:].split(",")
        if len(parts) != 3:
            raise ValueError(f"generator spec {spec!r} must be gen:<n>,<p>,<seed>")
        n, p, seed = int(parts[0]), float(parts[1]), int(parts[2])
        return f"gen-{n}-{p:g}-{seed}", generate_random_graph(n, p, seed)
    path = Path(spec)
    return path.stem, parse_dimacs(path.read_text())


def method_needs_model(method: str) -> bool:
    return method.endswith("-ffnn") or method.endswith("-gcn")


def build_policy(method: str, epsilon0: float | None = None, floor: float = 0.01) -> StabPolicy:
    eps0 = DEFAULT_EPSILON0.get(method, 0.0) if epsilon0 is None else epsilon0
    if method == "classic":
        return StabPolicy(CLASSIC, floor=floor)
    if method == "scg":
        return StabPolicy(PREVIOUS_ITERATE, epsilon0=eps0, floor=floor)
    if method.startswith("scg-"):
        return StabPolicy(FIXED_REFERENCE, epsilon0=eps0, floor=floor)
    if method.startswith("ascg-"):
        return StabPolicy(ADAPTIVE_REFERENCE, epsilon0=eps0, floor=floor)
    raise ValueError(f"unknown method {method!r}")


def prediction_for(method: str, g: Graph, seed: int, model: Model | None):
    if method in ("classic", "scg"):
        return None
    if method.endswith("-deg"):
        return predict_degree_baseline(g).values
    if model is None:
        raise ValueError(f"method {method!r} requires a trained model")
    expected = method.rsplit("-", 1)[1]
    if model.kind != expected:
        raise ValueError(f"method {method!r} needs a {expected} model, got {model.kind!r}")
    return predict_duals(model, g, seed).values


def run_single(
    instance_id: str,
    g: Graph,
    method: str,
    seed: int,
    config: CgConfig,
    model: Model | None = None,
    epsilon0: float | None = None,
    floor: float = 0.01,
) -> tuple[RunRecord, CgResult]:
    """One (instance, method, seed) cell: warm start, predict, generate columns."""
    policy = build_policy(method, epsilon0, floor)
    cfg = replace(config, seed=seed)
    yhat = prediction_for(method, g, seed, model)
    initial = warm_start_columns(g, restarts=10, seed=seed)
    t0 = time.perf_counter()
    result = run_colgen(g, policy, cfg, initial, yhat=yhat)
    wall = time.perf_counter() - t0
    pricing = sum(rec.pricing_seconds for rec in result.trace)
    record = RunRecord(instance_id, method, seed, result.status, result.iterations,
                       result.objective, wall, min(pricing, wall))
    return record, result


_WORKER_MODELS: dict[str, Model] = {}


def _bench_cell(args) -> RunRecord:
    spec, method, seed, time_limit, max_iterations, pricing_mode, model_path, epsilon0, floor = args
    instance_id, g = resolve_instance(spec)
    model = None
    if method_needs_model(method) and model_path:
        model = _WORKER_MODELS.get(model_path)
        if model is None:
            model = load_model(model_path)
            _WORKER_MODELS[model_path] = model
    config = CgConfig(max_iterations=max_iterations, time_limit=time_limit, pricing_mode=pricing_mode)
    record, _ = run_single(instance_id, g, method, seed, config, model, epsilon0, floor)
    return record


def run_benchmark(config: BenchmarkConfig) -> list[RunRecord]:
    """Fan the (instance, method, seed) cross-product out to workers; records come back sorted."""
    cells = [
        (spec, method, seed, config.time_limit, config.max_iterations, config.pricing_mode,
         config.model_path, config.epsilon0, config.floor)
        for spec in config.instances
        for method in config.methods
        for seed in config.seeds
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_bench_cell, cells))
    else:
        records = [_bench_cell(cell) for cell in cells]
    records.sort(key=lambda r: (r.instance, r.method, r.seed))
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records_csv(records, out / "records.csv")
    return records


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow([r.instance, r.method, r.seed, r.status, r.iterations,
                             f"{r.objective:.9f}", f"{r.wall_s:.6f}", f"{r.pricing_s:.6f}"])


def read_records_csv(path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(RunRecord(row["instance"], row["method"], int(row["seed"]), row["status"],
                                     int(row["iterations"]), float(row["objective"]),
                                     float(row["wall_s"]), float(row["pricing_s"])))
    return records


def _geomean(values) -> float:
    vals = [max(float(v), 1e-12) for v in values]
    return math.exp(sum(math.log(v) for v in vals) / len(vals))


@dataclass
class MethodSummary:
    method: str
    runs: int
    gm_iterations: float
    gm_wall_s: float
    pct_red_iterations: float
    pct_red_wall: float
    wins_iterations: int
    norm_pricing_per_iter: float


def aggregate_report(records: list[RunRecord], baseline: str = "classic") -> list[MethodSummary]:
    """Geometric-mean summary per method with reductions and win counts vs the baseline.

    A method wins an instance when its seed-geomean iteration count is strictly
    the smallest; exact ties award no win.
    """
    if not records:
        raise AggregationError("no records to aggregate")
    pairs = {(r.instance, r.seed) for r in records}
    base_pairs = {(r.instance, r.seed) for r in records if r.method == baseline}
    missing = sorted(pairs - base_pairs)
    if missing:
        raise AggregationError(f"baseline {baseline!r} missing runs for: {missing}")

    methods = sorted({r.method for r in records}, key=lambda m: (m != baseline, METHODS.index(m) if m in METHODS else 99))
    by_method = {m: [r for r in records if r.method == m] for m in methods}
    instances = sorted({r.instance for r in records})

    gm_iters = {m: _geomean([r.iterations for r in rs]) for m, rs in by_method.items()}
    gm_wall = {m: _geomean([r.wall_s for r in rs]) for m, rs in by_method.items()}
    gm_pricing_rate = {m: _geomean([r.pricing_s / max(r.iterations, 1) for r in rs]) for m, rs in by_method.items()}

    wins = {m: 0 for m in methods}
    for inst in instances:
        per_method = {}
        for m in methods:
            runs = [r for r in by_method[m] if r.instance == inst]
            if runs:
                per_method[m] = _geomean([r.iterations for r in runs])
        if not per_method:
            continue
        best = min(per_method.values())
        holders = [m for m, v in per_method.items() if v == best]
        if len(holders) == 1:
            wins[holders[0]] += 1

    out = []
    for m in methods:
        out.append(MethodSummary(
            method=m,
            runs=len(by_method[m]),
            gm_iterations=gm_iters[m],
            gm_wall_s=gm_wall[m],
            pct_red_iterations=1.0 - gm_iters[m] / gm_iters[baseline],
            pct_red_wall=1.0 - gm_wall[m] / gm_wall[baseline],
            wins_iterations=wins[m],
            norm_pricing_per_iter=gm_pricing_rate[m] / gm_pricing_rate[baseline],
        ))
    return out


def format_report(summaries: list[MethodSummary]) -> str:
    header = f"{'method':<12}{'runs':>6}{'gm_iter':>10}{'%red':>8}{'wins':>6}{'gm_time':>10}{'%red_t':>8}{'p_time':>8}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s.method:<12}{s.runs:>6}{s.gm_iterations:>10.1f}{100 * s.pct_red_iterations:>7.1f}%"
            f"{s.wins_iterations:>6}{s.gm_wall_s:>10.3f}{100 * s.pct_red_wall:>7.1f}%{s.norm_pricing_per_iter:>8.2f}"
        )
    return "\n".join(lines)


def write_report_csv(summaries: list[MethodSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "runs", "gm_iterations", "pct_red_iterations", "wins_iterations",
                         "gm_wall_s", "pct_red_wall", "norm_pricing_per_iter"])
        for s in summaries:
            writer.writerow([s.method, s.runs, f"{s.gm_iterations:.4f}", f"{s.pct_red_iterations:.4f}",
                             s.wins_iterations, f"{s.gm_wall_s:.4f}", f"{s.pct_red_wall:.4f}",
                             f"{s.norm_pricing_per_iter:.4f}"])


def project_trajectory(snapshots: np.ndarray, components: int = 2) -> np.ndarray:
    """Project dual iterates onto their top principal directions by power iteration.

    Rows are iterates. Deflation extracts one direction at a time (tolerance
    1e-10, at most 10000 iterations each). Identical snapshots yield all-zero
    coordinates with a warning.
    """
    x = np.asarray(snapshots, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two snapshots")
    x = x - x.mean(axis=0)
    coords = np.zeros((x.shape[0], components))
    if np.linalg.norm(x) <= 1e-12:
        warnings.warn("all dual snapshots identical; trajectory collapsed to the origin")
        return coords
    rng = np.random.default_rng(0)
    work = x.copy()
    for comp in range(components):
        if np.linalg.norm(work) <= 1e-12:
            break
        v = rng.standard_normal(x.shape[1])
        v /= np.linalg.norm(v)
        for _ in range(10_000):
            nxt = work.T @ (work @ v)
            norm = np.linalg.norm(nxt)
            if norm <= 1e-18:
                break
            nxt /= norm
            if np.linalg.norm(nxt - v) < 1e-10:
                v = nxt
                break
            v = nxt
        scores = work @ v
        coords[:, comp] = scores
        work = work - np.outer(scores, v)
    return coords


def write_trajectory_csv(coords: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "pc1", "pc2"])
        for i, row in enumerate(coords, start=1):
            writer.writerow([i] + [f"{c:.9g}" for c in row])


def collect_dataset(instances: list[str], config: CgConfig, seed: int, out_path) -> int:
    """Features joined with collected targets for every solvable instance, appended to CSV.

    Returns the number of instances written. Instances whose runs do not
    converge are logged and skipped; nothing partial is ever written.
    """
    rows: list[list] = []
    written = 0
    for idx, spec in enumerate(instances):
        instance_id, g = resolve_instance(spec)
        inst_seed = seed + idx
        cfg = replace(config, seed=inst_seed)
        try:
            targets = collect_labels(g, cfg)
        except LabelError as exc:
            log.warning("skipping %s: %s", instance_id, exc)
            continue
        feats = compute_features(g, inst_seed)
        for v in range(g.n):
            rows.append([instance_id, v] + [f"{feats[v, j]:.9g}" for j in range(9)] + [f"{targets[v]:.9g}"])
        written += 1
    try:
        with open(out_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["instance_id", "vertex"] + [f"f{i}" for i in range(1, 10)] + ["target"])
            writer.writerows(rows)
    except OSError:
        Path(out_path).unlink(missing_ok=True)
        raise
    return written


def read_dataset_csv(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-instance (features, targets) arrays from a collected dataset file."""
    feats: dict[str, list[list[float]]] = {}
    targets: dict[str, list[float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            inst = row["instance_id"]
            feats.setdefault(inst, []).append([float(row[f"f{i}"]) for i in range(1, 10)])
            targets.setdefault(inst, []).append(float(row["target"]))
    return {k: (np.asarray(feats[k]), np.asarray(targets[k])) for k in feats}
