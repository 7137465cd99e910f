"""Command-line entry point: gen | features | collect | train | solve | bench | report | verify."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import (BenchmarkConfig, METHODS, aggregate_report, collect_dataset, emit_dimacs,
                    format_report, read_dataset_csv, read_records_csv, resolve_instance,
                    run_benchmark, run_single, write_report_csv,
                    write_trajectory_csv, project_trajectory)
from .colgen import CgConfig, save_dual_snapshots, write_trace_csv
from .features import compute_features
from .graph import generate_random_graph
from .models import load_model, save_model
from .training import InstanceData, TrainConfig, TrainingSet, train


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_instance_args(p, multiple=False):
    action = "append" if multiple else "store"
    p.add_argument("--graph", action=action, default=None, help="path to a DIMACS .col file")
    p.add_argument("--gen", action=action, default=None, metavar="N,P",
                   help="random instance n,p (seeded by --seed, or n,p,seed)")


def _instance_specs(args, multiple=False) -> list[str]:
    specs: list[str] = []
    graphs = args.graph if multiple else ([args.graph] if args.graph else [])
    gens = args.gen if multiple else ([args.gen] if args.gen else [])
    for path in graphs or []:
        specs.append(path)
    for gen in gens or []:
        parts = gen.split(",")
        if len(parts) == 2:
            parts.append(str(getattr(args, "seed", 1) or 1))
        if len(parts) != 3:
            raise UsageError(f"--gen expects n,p or n,p,seed, got {gen!r}")
        specs.append(f"gen:{parts[0]},{parts[1]},{parts[2]}")
    if not specs:
        raise UsageError("no instances given (use --graph or --gen)")
    return specs


def build_parser() -> _Parser:
    parser = _Parser(prog="stabcg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random instance as a .col file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="write per-vertex features of one instance")
    _add_instance_args(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("collect", help="collect training data (features + targets)")
    _add_instance_args(p, multiple=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a prediction model from collected data")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=["ffnn", "gcn"], default="ffnn")
    p.add_argument("--out", required=True)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--graphs-dir", default=None, help="directory of .col files (gcn training)")
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("solve", help="run one instance with one method")
    _add_instance_args(p)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--pricing", choices=["exact", "heuristic"], default="exact")
    p.add_argument("--epsilon0", type=float, default=None)
    p.add_argument("--floor", type=float, default=0.01)
    p.add_argument("--record-duals", action="store_true")
    p.add_argument("--out", default=None, help="directory for trace/dual exports")

    p = sub.add_parser("bench", help="run the instance x method x seed cross-product")
    _add_instance_args(p, multiple=True)
    p.add_argument("--method", action="append", choices=METHODS, required=True)
    p.add_argument("--seeds", default="1..10", help="seed range A..B or comma list")
    p.add_argument("--model", default=None)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--pricing", choices=["exact", "heuristic"], default="exact")
    p.add_argument("--epsilon0", type=float, default=None)
    p.add_argument("--floor", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="aggregate a records file into a report")
    p.add_argument("--records", required=True)
    p.add_argument("--baseline", default="classic")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run the oracle verification suites")
    p.add_argument("--quick", action="store_true", help="smaller suite")

    return parser


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",") if x]


def _cmd_gen(args) -> int:
    g = generate_random_graph(args.n, args.p, args.seed)
    Path(args.out).write_text(emit_dimacs(g, comment=f"random instance n={args.n} p={args.p} seed={args.seed}"))
    print(f"wrote {args.out}: n={g.n} m={len(g.edges)} density={g.density:.4f}")
    return 0


def _cmd_features(args) -> int:
    spec = _instance_specs(args)[0]
    instance_id, g = resolve_instance(spec)
    feats = compute_features(g, args.seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "vertex"] + [f"f{i}" for i in range(1, 10)])
        for v in range(g.n):
            writer.writerow([instance_id, v] + [f"{feats[v, j]:.9g}" for j in range(9)])
    print(f"wrote {args.out}: {g.n} vertices")
    return 0


def _cmd_collect(args) -> int:
    specs = _instance_specs(args, multiple=True)
    config = CgConfig(max_iterations=args.max_iter, time_limit=args.time_limit)
    written = collect_dataset(specs, config, args.seed, args.out)
    print(f"wrote {args.out}: {written} of {len(specs)} instances")
    return 0


def _training_graph(instance_id: str, graphs_dir: str | None):
    if instance_id.startswith("gen-"):
        _, n, p, seed = instance_id.split("-")
        return generate_random_graph(int(n), float(p), int(seed))
    if graphs_dir is None:
        raise UsageError("gcn training on file instances needs --graphs-dir")
    path = Path(graphs_dir) / f"{instance_id}.col"
    from .graph import parse_dimacs

    return parse_dimacs(path.read_text())


def _cmd_train(args) -> int:
    data = read_dataset_csv(args.data)
    if not data:
        raise UsageError(f"dataset {args.data} is empty")
    instances = []
    for instance_id in sorted(data):
        feats, targets = data[instance_id]
        graph = _training_graph(instance_id, args.graphs_dir) if args.kind == "gcn" else None
        instances.append(InstanceData(instance_id, targets, features=feats, graph=graph))
    rng = np.random.default_rng(args.seed)
    order = rng.permutation(len(instances))
    n_val = max(1, int(round(args.val_fraction * len(instances))))
    if n_val >= len(instances):
        raise UsageError("validation split leaves no training instances")
    val = TrainingSet([instances[i] for i in order[:n_val]])
    trainset = TrainingSet([instances[i] for i in order[n_val:]])
    config = TrainConfig(learning_rate=args.learning_rate, max_epochs=args.max_epochs,
                         patience=args.patience, l2_coefficient=args.l2,
                         hidden_width=args.hidden, seed=args.seed)
    model = train(args.kind, trainset, val, config)
    save_model(model, args.out)
    print(f"wrote {args.out}: kind={args.kind} epochs={model.metadata['epochs']} "
          f"val_loss={model.metadata['val_loss']:.6g}")
    return 0


def _cmd_solve(args) -> int:
    spec = _instance_specs(args)[0]
    instance_id, g = resolve_instance(spec)
    model = load_model(args.model) if args.model else None
    config = CgConfig(max_iterations=args.max_iter, time_limit=args.time_limit,
                      pricing_mode=args.pricing, record_duals=args.record_duals)
    record, result = run_single(instance_id, g, args.method, args.seed, config,
                                model, args.epsilon0, args.floor)
    trace_path = ""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        trace_path = out / f"{instance_id}-{args.method}-s{args.seed}-trace.csv"
        write_trace_csv(result.trace, trace_path)
        if args.record_duals:
            stem = f"{instance_id}-{args.method}-s{args.seed}"
            save_dual_snapshots(result.trace, out / f"{stem}-duals.npy")
            snapshots = np.vstack([r.duals for r in result.trace if r.duals is not None])
            if snapshots.shape[0] >= 2:
                write_trajectory_csv(project_trajectory(snapshots), out / f"{stem}-trajectory.csv")
    print(f"instance {instance_id} method {args.method} seed {args.seed}")
    print(f"status {record.status} objective {record.objective:.6f} iterations {record.iterations}")
    if trace_path:
        print(f"trace {trace_path}")
    return 0 if record.status == "converged" else 2


def _cmd_bench(args) -> int:
    specs = _instance_specs(args, multiple=True)
    config = BenchmarkConfig(
        instances=specs, methods=args.method, seeds=_parse_seeds(args.seeds),
        time_limit=args.time_limit, max_iterations=args.max_iter, pricing_mode=args.pricing,
        model_path=args.model, epsilon0=args.epsilon0, floor=args.floor,
        out_dir=args.out, workers=args.workers,
    )
    records = run_benchmark(config)
    summaries = aggregate_report(records, baseline=args.method[0])
    report = format_report(summaries)
    out = Path(args.out)
    (out / "report.txt").write_text(report + "\n")
    write_report_csv(summaries, out / "report.csv")
    print(report)
    print(f"records {out / 'records.csv'}")
    return 0


def _cmd_report(args) -> int:
    records = read_records_csv(args.records)
    summaries = aggregate_report(records, baseline=args.baseline)
    report = format_report(summaries)
    print(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report + "\n")
        write_report_csv(summaries, out / "report.csv")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_verification

    results = run_verification(quick=args.quick)
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


_COMMANDS = {
    "gen": _cmd_gen,
    "features": _cmd_features,
    "collect": _cmd_collect,
    "train": _cmd_train,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "report": _cmd_report,
    "verify": _cmd_verify,
}


def cli_dispatch(argv: list[str]) -> int:
    """Route argv to a subcommand; 0 on success, 1 on usage error, 2 on runtime failure."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
