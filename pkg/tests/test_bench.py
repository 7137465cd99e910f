import numpy as np
import pytest

from stabcg.bench import (AggregationError, BenchmarkConfig, RunRecord, aggregate_report,
                          collect_dataset, emit_dimacs, project_trajectory, read_dataset_csv,
                          read_records_csv, resolve_instance, run_benchmark, write_records_csv)
from stabcg.colgen import CgConfig
from stabcg.graph import generate_random_graph
from stabcg.oracle import oracle_lp_bound


def test_oracle_bounds(k3, p3, c5):
    assert oracle_lp_bound(k3) == pytest.approx(3.0, abs=1e-9)
    assert oracle_lp_bound(c5) == pytest.approx(2.5, abs=1e-9)
    assert oracle_lp_bound(p3) == pytest.approx(2.0, abs=1e-9)


def test_oracle_guard():
    with pytest.raises(ValueError):
        oracle_lp_bound(generate_random_graph(30, 0.2, 0))


def _rec(instance, method, seed, iters, wall=1.0, pricing=0.5):
    return RunRecord(instance, method, seed, "converged", iters, 3.0, wall, pricing)


def test_aggregate_baseline_against_itself():
    records = [_rec("a", "classic", s, 10 + s) for s in (1, 2)]
    records += [_rec("b", "classic", s, 20 + s) for s in (1, 2)]
    out = aggregate_report(records, baseline="classic")
    assert len(out) == 1
    assert out[0].pct_red_iterations == pytest.approx(0.0)
    assert out[0].wins_iterations == 2  # sole method wins every instance
    assert out[0].norm_pricing_per_iter == pytest.approx(1.0)


def test_aggregate_fifty_percent_reduction():
    records = [_rec("a", "classic", 1, 100), _rec("a", "scg", 1, 50)]
    out = aggregate_report(records, baseline="classic")
    by = {s.method: s for s in out}
    assert by["scg"].pct_red_iterations == pytest.approx(0.5)
    assert by["scg"].wins_iterations == 1
    assert by["classic"].wins_iterations == 0


def test_aggregate_geometric_mean():
    records = [_rec("a", "classic", 1, 100), _rec("b", "classic", 1, 400)]
    out = aggregate_report(records, baseline="classic")
    assert out[0].gm_iterations == pytest.approx(200.0)


def test_aggregate_tie_awards_no_win():
    records = [_rec("a", "classic", 1, 50), _rec("a", "scg", 1, 50)]
    out = aggregate_report(records, baseline="classic")
    assert all(s.wins_iterations == 0 for s in out)


def test_aggregate_missing_baseline_lists_gaps():
    records = [_rec("a", "scg", 1, 10), _rec("a", "classic", 1, 10), _rec("b", "scg", 2, 10)]
    with pytest.raises(AggregationError, match="b"):
        aggregate_report(records, baseline="classic")


def test_trajectory_identical_snapshots_warns():
    snaps = np.ones((5, 4))
    with pytest.warns(UserWarning, match="identical"):
        coords = project_trajectory(snaps)
    assert np.allclose(coords, 0.0)


def test_trajectory_collinear_second_component_vanishes():
    base = np.linspace(0, 1, 7)[:, None]
    direction = np.array([[1.0, 2.0, -1.0, 0.5]])
    coords = project_trajectory(base @ direction)
    assert np.all(np.abs(coords[:, 1]) < 1e-8)


def test_trajectory_matches_eigendecomposition():
    rng = np.random.default_rng(0)
    snaps = rng.normal(size=(10, 6))
    coords = project_trajectory(snaps)
    centered = snaps - snaps.mean(axis=0)
    assert coords[:, 0].var() >= coords[:, 1].var()
    # Full eigendecomposition oracle: reconstruction from the top-2 subspace.
    _, vecs = np.linalg.eigh(centered.T @ centered)
    top2 = vecs[:, -2:]
    oracle = centered @ top2 @ top2.T
    # Recover the power-iteration directions from the scores by least squares.
    recon = np.zeros_like(centered)
    residual = centered.copy()
    for k in range(2):
        score = coords[:, k]
        direction = residual.T @ score / (score @ score)
        direction /= np.linalg.norm(direction)
        recon += np.outer(score, direction)
        residual -= np.outer(score, direction)
    assert np.allclose(recon, oracle, atol=1e-6)


def test_collect_dataset_triangle(tmp_path):
    out = tmp_path / "data.csv"
    written = collect_dataset(["gen:3,1.0,1"], CgConfig(time_limit=30), seed=1, out_path=out)
    assert written == 1
    data = read_dataset_csv(out)
    (feats, targets), = data.values()
    assert feats.shape == (3, 9)
    assert np.allclose(targets, 1.0, atol=1e-9)


def test_collect_dataset_empty_list(tmp_path):
    out = tmp_path / "empty.csv"
    assert collect_dataset([], CgConfig(), seed=0, out_path=out) == 0
    assert out.read_text().strip() == "instance_id,vertex," + ",".join(f"f{i}" for i in range(1, 10)) + ",target"


def test_collect_dataset_skips_unsolved(tmp_path, caplog):
    out = tmp_path / "skip.csv"
    config = CgConfig(max_iterations=1, time_limit=30)
    written = collect_dataset(["gen:3,1.0,1", "gen:12,0.5,3"], config, seed=0, out_path=out)
    assert written == 1
    data = read_dataset_csv(out)
    assert list(data) == ["gen-3-1-1"]


def test_records_csv_round_trip(tmp_path):
    records = [_rec("a", "classic", 1, 12, wall=0.25, pricing=0.125)]
    path = tmp_path / "records.csv"
    write_records_csv(records, path)
    back = read_records_csv(path)
    assert back == records
    assert path.read_text().splitlines()[0] == "instance,method,seed,status,iterations,objective,wall_s,pricing_s"


def test_resolve_instance_spec(tmp_path):
    iid, g = resolve_instance("gen:6,0.5,2")
    assert iid == "gen-6-0.5-2"
    assert g.n == 6
    path = tmp_path / "tiny.col"
    path.write_text(emit_dimacs(g))
    iid2, g2 = resolve_instance(str(path))
    assert iid2 == "tiny"
    assert g2.edges == g.edges


def test_benchmark_reproducible(tmp_path):
    config = dict(instances=["gen:8,0.4,1", "gen:8,0.6,2"], methods=["classic", "ascg-deg"],
                  seeds=[1, 2], time_limit=60.0, workers=1)
    a = run_benchmark(BenchmarkConfig(**config))
    b = run_benchmark(BenchmarkConfig(**config))
    strip = lambda rs: [(r.instance, r.method, r.seed, r.status, r.iterations, r.objective) for r in rs]
    assert strip(a) == strip(b)


def test_benchmark_parallel_matches_serial():
    config = dict(instances=["gen:8,0.4,1"], methods=["classic", "scg"], seeds=[1, 2], time_limit=60.0)
    serial = run_benchmark(BenchmarkConfig(workers=1, **config))
    parallel = run_benchmark(BenchmarkConfig(workers=2, **config))
    strip = lambda rs: [(r.instance, r.method, r.seed, r.status, r.iterations, r.objective) for r in rs]
    assert strip(serial) == strip(parallel)


def test_benchmark_config_validation():
    with pytest.raises(ValueError, match="instance"):
        BenchmarkConfig(instances=[], methods=["classic"])
    with pytest.raises(ValueError, match="method"):
        BenchmarkConfig(instances=["gen:5,0.5,1"], methods=["nope"])
    cfg = BenchmarkConfig(instances=["gen:5,0.5,1"], methods=["classic"])
    assert cfg.seeds == list(range(1, 11))
