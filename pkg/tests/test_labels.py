import numpy as np
import pytest

from stabcg.colgen import CgConfig, StabPolicy, CLASSIC, run_colgen
from stabcg.graph import Graph, generate_random_graph, warm_start_columns
from stabcg.labels import LabelError, collect_labels


def test_triangle_labels(k3):
    labels = collect_labels(k3, CgConfig(seed=1))
    assert np.allclose(labels, [1.0, 1.0, 1.0], atol=1e-9)


def test_path_labels_across_seeds(p3):
    for seed in range(1, 6):
        labels = collect_labels(p3, CgConfig(seed=seed))
        assert labels[1] == pytest.approx(1.0, abs=1e-6)
        assert labels[0] + labels[2] == pytest.approx(1.0, abs=1e-3)


def test_edgeless_pair_labels():
    g = Graph(2, [])
    labels = collect_labels(g, CgConfig(seed=1))
    assert labels.sum() == pytest.approx(1.0, abs=1e-6)
    assert labels.min() >= 0.0 and labels.max() <= 1.0


def test_degenerate_averaging_on_four_path():
    # The 4-path has zero-valued basics at its final optimum, so the collector
    # averages several optimal-face extreme points instead of one vertex.
    p4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
    labels = collect_labels(p4, CgConfig(seed=2))
    assert labels.min() >= 0.0 and labels.max() <= 1.0
    assert labels.sum() == pytest.approx(2.0, abs=1e-6)  # optimal value is preserved on the face


def test_labels_respect_final_columns():
    for seed in (1, 2, 3):
        g = generate_random_graph(12, 0.4, 200 + seed)
        config = CgConfig(seed=seed)
        labels = collect_labels(g, config)
        assert labels.min() >= -1e-9 and labels.max() <= 1 + 1e-9
        # Reconstruct the same converged run; a convex combination of optimal
        # points must satisfy every generated column constraint.
        res = run_colgen(g, StabPolicy(CLASSIC), config, warm_start_columns(g, 10, seed))
        for col in res.columns:
            assert sum(labels[v] for v in col.vertices) <= 1.0 + 1e-6


def test_unsolved_instance_raises(c5):
    with pytest.raises(LabelError, match="iteration_limit"):
        collect_labels(c5, CgConfig(max_iterations=1, seed=1))
