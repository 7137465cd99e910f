import numpy as np

from stabcg.features import (compute_features, mis_samples, normalize_instance,
                             predict_degree_baseline, raw_features)
from stabcg.graph import Graph, generate_random_graph
from stabcg.pricing import enumerate_all_mis


def test_raw_features_path_exhaustive(p3):
    # Exhaustive sample set {{0,2},{1}} instead of random draws.
    cols = enumerate_all_mis(p3)
    raw = raw_features(p3, cols, cols)
    assert np.allclose(raw[:, 0], [0.5, 0.5, 0.5])
    assert np.allclose(raw[1, 1:4], [1.0, 1.0, 1.0])
    assert np.allclose(raw[1, 4:7], [2.0, 2.0, 2.0])
    assert np.allclose(raw[0, 4:7], [1.0, 1.0, 1.0])
    assert np.allclose(raw[:, 7], [1, 2, 1])
    assert np.allclose(raw[:, 8], p3.density)


def test_edgeless_features_all_constant():
    g = Graph(3, [])
    cols = enumerate_all_mis(g)
    raw = raw_features(g, cols, cols)
    assert np.allclose(raw[:, 0], 1.0)
    normalized = normalize_instance(raw)
    assert np.allclose(normalized, 0.5)


def test_features_within_unit_interval():
    for seed in range(5):
        g = generate_random_graph(14, 0.4, seed)
        feats = compute_features(g, seed)
        assert feats.shape == (14, 9)
        assert feats.min() >= 0.0 and feats.max() <= 1.0


def test_features_deterministic():
    g = generate_random_graph(16, 0.5, 3)
    assert np.array_equal(compute_features(g, 7), compute_features(g, 7))


def test_frequency_ignores_anchored_samples(p3):
    # Frequency counts only the random draws; containment statistics see both.
    from stabcg.graph import Column

    random_part = [Column((1,))]
    anchored = [Column((0, 2))]
    raw = raw_features(p3, random_part, random_part + anchored)
    assert np.allclose(raw[:, 0], [0.0, 1.0, 0.0])
    assert raw[0, 1] == 2  # vertex 0 appears only in the anchored pair


def test_samples_cover_every_vertex():
    g = generate_random_graph(12, 0.6, 1)
    freq, anchored = mis_samples(g, 2)
    assert len(freq) == 5 * g.n
    assert len(anchored) == g.n
    covered = set()
    for col in anchored:
        covered.update(col.vertices)
    assert covered == set(range(g.n))
    for v, col in enumerate(anchored):
        assert v in col.vertices


def test_degree_baseline(k3, p3, star4):
    assert np.allclose(predict_degree_baseline(k3).values, [1, 1, 1])
    assert np.allclose(predict_degree_baseline(p3).values, [0.5, 1.0, 0.5])
    assert np.allclose(predict_degree_baseline(star4).values, [1.0, 1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(predict_degree_baseline(Graph(3, [])).values, 1.0)
