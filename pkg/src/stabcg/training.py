"""Adam training of the prediction models with per-instance updates and early stopping."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .models import (FFNN, GCN, Model, ffnn_forward, ffnn_forward_backward, gcn_forward,
                     gcn_forward_backward, gcn_input_features, init_ffnn, init_gcn)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    max_epochs: int = 1000
    patience: int = 100
    l2_coefficient: float = 1e-4
    hidden_width: int = 32
    ffnn_layers: int = 3
    gcn_layers: int = 20
    seed: int = 0

    def __post_init__(self):
        if min(self.learning_rate, self.max_epochs, self.patience, self.hidden_width,
               self.ffnn_layers, self.gcn_layers) <= 0 or self.l2_coefficient < 0:
            raise ValueError("training hyperparameters must be positive")
        if self.patience > self.max_epochs:
            raise ValueError("patience cannot exceed max_epochs")


@dataclass
class InstanceData:
    """Training examples of one problem instance: targets per vertex plus model inputs."""

    instance_id: str
    targets: np.ndarray
    features: np.ndarray | None = None  # (n, 9) rows for the feedforward model
    graph: Graph | None = None  # needed by the graph convolution model
    _h0: np.ndarray | None = field(default=None, repr=False)

    def h0(self) -> np.ndarray:
        if self._h0 is None:
            if self.graph is None:
                raise ValueError(f"instance {self.instance_id} has no graph for convolution inputs")
            self._h0 = gcn_input_features(self.graph)
        return self._h0


@dataclass
class TrainingSet:
    instances: list[InstanceData]

    def __post_init__(self):
        for inst in self.instances:
            if inst.targets.size == 0:
                raise ValueError(f"instance {inst.instance_id} has no examples")
            if inst.targets.min() < -1e-9 or inst.targets.max() > 1 + 1e-9:
                raise ValueError(f"instance {inst.instance_id} has targets outside [0, 1]")

    def example_count(self) -> int:
        return sum(inst.targets.size for inst in self.instances)


def _predict_raw(model: Model, inst: InstanceData) -> np.ndarray:
    if model.kind == FFNN:
        return ffnn_forward(model, inst.features, clip=False)
    return gcn_forward(model, inst.graph, inst.h0(), clip=False)


def dataset_loss(model: Model, data: TrainingSet) -> float:
    """Mean squared error over all examples pooled across instances (no regularizer)."""
    sq = 0.0
    count = 0
    for inst in data.instances:
        resid = _predict_raw(model, inst) - inst.targets
        sq += float(resid @ resid)
        count += resid.size
    return sq / count


class _Adam:
    def __init__(self, params: list[np.ndarray], lr: float):
        self.lr = lr
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        correct1 = 1.0 - ADAM_BETA1**self.t
        correct2 = 1.0 - ADAM_BETA2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= ADAM_BETA1
            m += (1 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1 - ADAM_BETA2) * g * g
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + ADAM_EPS)


def _instance_gradients(model: Model, inst: InstanceData, l2: float):
    """Gradients of instance-mean squared error plus l2 * ||parameters||^2."""
    targets = inst.targets
    if model.kind == FFNN:
        out = ffnn_forward(model, inst.features, clip=False)
        dout = 2.0 * (out - targets) / targets.size
        _, gw, gb = ffnn_forward_backward(model, inst.features, dout)
    else:
        out = gcn_forward(model, inst.graph, inst.h0(), clip=False)
        dout = 2.0 * (out - targets) / targets.size
        _, gw, gb = gcn_forward_backward(model, inst.graph, inst.h0(), dout)
    if l2 > 0:
        gw = [g + 2.0 * l2 * w for g, w in zip(gw, model.weights)]
        gb = [g + 2.0 * l2 * b for g, b in zip(gb, model.biases)]
    return gw + gb


def train(kind: str, data: TrainingSet, val: TrainingSet, config: TrainConfig) -> Model:
    """Train a model of `kind`, returning the best-validation snapshot.

    One Adam step per training instance per epoch, instance order reshuffled
    by the seed each epoch; stops early when the validation loss has not
    improved for `patience` epochs.
    """
    if not data.instances or not val.instances:
        raise ValueError("training and validation sets must be non-empty")
    if kind == FFNN:
        width = data.instances[0].features.shape[1]
        model = init_ffnn(width, config.hidden_width, config.ffnn_layers, config.seed)
    elif kind == GCN:
        model = init_gcn(hidden_width=config.hidden_width, layers=config.gcn_layers, seed=config.seed)
    else:
        raise ValueError(f"cannot train model kind {kind!r}")

    rng = np.random.default_rng(config.seed)
    adam = _Adam(model.parameters(), config.learning_rate)
    best = model.copy()
    best_val = float("inf")
    best_epoch = 0
    history: list[tuple[float, float]] = []
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(len(data.instances))
        for idx in order:
            grads = _instance_gradients(model, data.instances[int(idx)], config.l2_coefficient)
            adam.step(model.parameters(), grads)
        train_loss = dataset_loss(model, data)
        val_loss = dataset_loss(model, val)
        history.append((train_loss, val_loss))
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise TrainingError(f"training diverged at epoch {epoch}")
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best = model.copy()
        elif epoch - best_epoch >= config.patience:
            break
    best.metadata.update(
        {"seed": config.seed, "epochs": epochs_run, "best_epoch": best_epoch, "val_loss": best_val}
    )
    best.history = history
    return best
