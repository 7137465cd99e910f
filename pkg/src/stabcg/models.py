"""Dual-value prediction models: a small feedforward net, a graph convolution net,
and the degree baseline. Forward and backward passes are hand-rolled numpy.

Predictions are clipped to [0, 1] at inference only; training sees raw outputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .lp import DualVector

FFNN = "ffnn"
GCN = "gcn"
DEGREE = "degree"

GCN_INPUT_WIDTH = 3


@dataclass
class Model:
    kind: str
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    history: list | None = None  # per-epoch (train_loss, val_loss); not serialized

    def dims(self) -> list[int]:
        if not self.weights:
            return []
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def check_chain(self) -> None:
        for prev, nxt in zip(self.weights, self.weights[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise ValueError(f"layer widths do not chain: {prev.shape} then {nxt.shape}")

    def parameters(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def copy(self) -> "Model":
        return Model(self.kind, [w.copy() for w in self.weights], [b.copy() for b in self.biases],
                     dict(self.metadata))


def init_ffnn(input_width: int = 9, hidden_width: int = 32, layers: int = 3, seed: int = 0) -> Model:
    """Glorot-uniform FFNN with `layers` weight matrices and a scalar output."""
    rng = np.random.default_rng(seed)
    widths = [input_width] + [hidden_width] * (layers - 1) + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(widths, widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Model(FFNN, weights, biases, {"seed": seed})


def init_gcn(input_width: int = GCN_INPUT_WIDTH, hidden_width: int = 32, layers: int = 20, seed: int = 0) -> Model:
    """GCN with `layers` propagation steps (first maps input width, rest residual) and a linear head."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    limit = np.sqrt(6.0 / (input_width + hidden_width))
    weights.append(rng.uniform(-limit, limit, (hidden_width, input_width)))
    biases.append(np.zeros(0))
    for _ in range(layers - 1):
        limit = np.sqrt(6.0 / (2 * hidden_width))
        weights.append(rng.uniform(-limit, limit, (hidden_width, hidden_width)))
        biases.append(np.zeros(0))
    weights.append(rng.uniform(-np.sqrt(6.0 / (hidden_width + 1)), np.sqrt(6.0 / (hidden_width + 1)), (1, hidden_width)))
    biases.append(np.zeros(1))
    return Model(GCN, weights, biases, {"seed": seed})


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def ffnn_forward(model: Model, x, clip: bool = True):
    """Scalar prediction per input row; accepts a single feature vector or a matrix."""
    if model.kind != FFNN:
        raise ValueError("model kind must be ffnn")
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    h = arr[None, :] if single else arr
    if h.shape[1] != model.weights[0].shape[1]:
        raise ValueError(f"input width {h.shape[1]} does not match model ({model.weights[0].shape[1]})")
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = _relu(h @ w.T + b)
    out = (h @ model.weights[-1].T + model.biases[-1])[:, 0]
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if single else out


def ffnn_forward_backward(model: Model, x: np.ndarray, dout: np.ndarray):
    """Raw forward pass plus gradients of sum(dout * out) w.r.t. all parameters."""
    h = np.asarray(x, dtype=float)
    acts = [h]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = _relu(h @ w.T + b)
        acts.append(h)
    out = (h @ model.weights[-1].T + model.biases[-1])[:, 0]

    gw = [np.zeros_like(w) for w in model.weights]
    gb = [np.zeros_like(b) for b in model.biases]
    delta = dout[:, None]  # gradient at the linear head
    gw[-1] = delta.T @ acts[-1]
    gb[-1] = delta.sum(axis=0)
    grad_h = delta @ model.weights[-1]
    for layer in range(len(model.weights) - 2, -1, -1):
        dz = grad_h * (acts[layer + 1] > 0)
        gw[layer] = dz.T @ acts[layer]
        gb[layer] = dz.sum(axis=0)
        if layer > 0:
            grad_h = dz @ model.weights[layer]
    return out, gw, gb


def propagation_matrix(g: Graph) -> np.ndarray:
    """Symmetric normalized adjacency with self-connections: D^-1/2 (A + I) D^-1/2."""
    n = g.n
    a = np.eye(n)
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    d = a.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_input_features(g: Graph) -> np.ndarray:
    """Per-vertex inputs: degree scaled by the maximum, density, and a constant one."""
    deg = np.asarray(g.degree, dtype=float)
    top = deg.max() if g.n else 0.0
    scaled = deg / top if top > 0 else np.zeros(g.n)
    h0 = np.empty((g.n, GCN_INPUT_WIDTH))
    h0[:, 0] = scaled
    h0[:, 1] = g.density
    h0[:, 2] = 1.0
    return h0


def gcn_forward(model: Model, g: Graph, h0: np.ndarray | None = None, clip: bool = True) -> np.ndarray:
    """Per-vertex scalar prediction from propagation layers with residual connections."""
    if model.kind != GCN:
        raise ValueError("model kind must be gcn")
    if h0 is None:
        h0 = gcn_input_features(g)
    p = propagation_matrix(g)
    h = _relu(p @ h0 @ model.weights[0].T)  # width change: no residual on the first layer
    for w in model.weights[1:-1]:
        h = _relu(p @ h @ w.T + h)
    out = (h @ model.weights[-1].T + model.biases[-1])[:, 0]
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def gcn_forward_backward(model: Model, g: Graph, h0: np.ndarray, dout: np.ndarray):
    """Raw forward pass plus gradients of sum(dout * out) w.r.t. all parameters."""
    p = propagation_matrix(g)
    pre = []  # pre-activation per propagation layer
    hs = [h0]
    z = p @ h0 @ model.weights[0].T
    pre.append(z)
    h = _relu(z)
    hs.append(h)
    for w in model.weights[1:-1]:
        z = p @ h @ w.T + h
        pre.append(z)
        h = _relu(z)
        hs.append(h)
    out = (h @ model.weights[-1].T + model.biases[-1])[:, 0]

    gw = [np.zeros_like(w) for w in model.weights]
    gb = [np.zeros_like(b) for b in model.biases]
    delta = dout[:, None]
    gw[-1] = delta.T @ hs[-1]
    gb[-1] = delta.sum(axis=0)
    grad_h = delta @ model.weights[-1]
    for layer in range(len(model.weights) - 2, 0, -1):
        dz = grad_h * (pre[layer] > 0)
        gw[layer] = dz.T @ (p @ hs[layer])
        grad_h = (p.T @ dz) @ model.weights[layer] + dz
    dz = grad_h * (pre[0] > 0)
    gw[0] = dz.T @ (p @ hs[0])
    return out, gw, gb


def predict_duals(model: Model, g: Graph, seed: int = 0) -> DualVector:
    """Clipped per-vertex dual prediction for a graph under the given model."""
    from .features import compute_features, predict_degree_baseline

    if model.kind == DEGREE:
        return predict_degree_baseline(g)
    if model.kind == FFNN:
        feats = compute_features(g, seed)
        return DualVector(ffnn_forward(model, feats, clip=True))
    if model.kind == GCN:
        return DualVector(gcn_forward(model, g, clip=True))
    raise ValueError(f"unknown model kind {model.kind!r}")


def save_model(model: Model, path) -> None:
    doc = {
        "kind": model.kind,
        "dims": model.dims(),
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
        "normalization": "features are min-max normalized per instance",
        "metadata": model.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> Model:
    with open(path) as fh:
        doc = json.load(fh)
    weights = [np.asarray(layer["weights"], dtype=float) for layer in doc["layers"]]
    biases = [np.asarray(layer["bias"], dtype=float) for layer in doc["layers"]]
    model = Model(doc["kind"], weights, biases, dict(doc.get("metadata", {})))
    model.check_chain()
    return model
