import numpy as np
import pytest

from stabcg.graph import Graph, generate_random_graph
from stabcg.models import (FFNN, GCN, Model, ffnn_forward, ffnn_forward_backward, gcn_forward,
                           gcn_forward_backward, gcn_input_features, init_ffnn, init_gcn,
                           load_model, predict_duals, propagation_matrix, save_model)

from tests.gradcheck_utils import (GRAD_RTOL, draw_smooth_ffnn_point, draw_smooth_gcn_point,
                                   gradient_relative_error)


def test_ffnn_zero_weights_give_zero():
    model = init_ffnn(seed=0)
    for w in model.weights:
        w[:] = 0.0
    assert ffnn_forward(model, np.full(9, 0.3)) == 0.0


def test_ffnn_clip_semantics():
    model = init_ffnn(seed=0)
    for w in model.weights:
        w[:] = 0.0
    model.biases[-1][:] = 1.7
    x = np.zeros(9)
    assert ffnn_forward(model, x, clip=True) == 1.0
    assert ffnn_forward(model, x, clip=False) == pytest.approx(1.7)


def test_ffnn_dimension_mismatch():
    model = init_ffnn(seed=0)
    with pytest.raises(ValueError, match="width"):
        ffnn_forward(model, np.zeros(5))


def test_ffnn_gradient_check():
    rng = np.random.default_rng(0)
    for point in range(20):
        model, x = draw_smooth_ffnn_point(rng, seed=point)
        dout = rng.normal(size=3)
        _, gw, gb = ffnn_forward_backward(model, x, dout)

        def loss():
            return float(ffnn_forward(model, x, clip=False) @ dout)

        assert gradient_relative_error(model.parameters(), gw + gb, loss) < GRAD_RTOL


def test_gcn_residual_layer_identity():
    # One isolated vertex: propagation matrix [1]; a zero residual-layer weight
    # passes the hidden value straight through the activation.
    g = Graph(1, [])
    model = Model(GCN,
                  weights=[np.array([[0.0, 0.0, 1.0]]), np.array([[0.0]]), np.array([[1.0]])],
                  biases=[np.zeros(0), np.zeros(0), np.zeros(1)])
    assert np.allclose(propagation_matrix(g), [[1.0]])
    out = gcn_forward(model, g, clip=False)
    assert out[0] == pytest.approx(1.0)


def test_gcn_edgeless_symmetry():
    g = Graph(5, [])
    model = init_gcn(layers=4, seed=2)
    out = gcn_forward(model, g)
    assert np.allclose(out, out[0])
    assert np.allclose(propagation_matrix(g), np.eye(5))


def test_gcn_gradient_check():
    rng = np.random.default_rng(1)
    g = generate_random_graph(6, 0.5, 7)
    h0 = gcn_input_features(g)
    for point in range(20):
        model = draw_smooth_gcn_point(g, h0, seed=100 + point)
        dout = rng.normal(size=6)
        _, gw, gb = gcn_forward_backward(model, g, h0, dout)

        def loss():
            return float(gcn_forward(model, g, h0, clip=False) @ dout)

        assert gradient_relative_error(model.parameters(), gw + gb, loss) < GRAD_RTOL


def test_gcn_permutation_equivariance():
    rng = np.random.default_rng(3)
    for trial in range(5):
        g = generate_random_graph(10, 0.4, 40 + trial)
        model = init_gcn(layers=5, seed=trial)
        perm = rng.permutation(10)
        remap = {int(old): int(new) for new, old in enumerate(perm)}
        gp = Graph(10, [(remap[u], remap[v]) for u, v in g.edges])
        out = gcn_forward(model, g)
        out_p = gcn_forward(model, gp)
        for old in range(10):
            assert out_p[remap[old]] == pytest.approx(out[old], abs=1e-9)


def test_model_json_round_trip(tmp_path):
    model = init_ffnn(seed=5)
    model.metadata.update({"epochs": 12, "val_loss": 0.01})
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert back.kind == FFNN
    assert back.dims() == [9, 32, 32, 1]
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, back.weights))
    assert back.metadata["epochs"] == 12


def test_model_chain_validation():
    model = Model(FFNN, [np.zeros((4, 9)), np.zeros((1, 5))], [np.zeros(4), np.zeros(1)])
    with pytest.raises(ValueError, match="chain"):
        model.check_chain()


def test_predict_duals_clipped(k3):
    model = init_ffnn(seed=1)
    model.biases[-1][:] = 5.0  # force raw outputs above 1
    duals = predict_duals(model, k3, seed=0)
    assert max(duals) <= 1.0 and min(duals) >= 0.0
