import numpy as np
import pytest

from stabcg.features import compute_features
from stabcg.graph import generate_random_graph
from stabcg.models import ffnn_forward, gcn_forward
from stabcg.training import (InstanceData, TrainConfig, TrainingError, TrainingSet, dataset_loss,
                             train)


def _constant_target_sets(value=0.4, count=8, n=10):
    instances = []
    for s in range(count):
        g = generate_random_graph(n, 0.4, s)
        instances.append(InstanceData(f"i{s}", np.full(n, value),
                                      features=compute_features(g, s), graph=g))
    return TrainingSet(instances[:-2]), TrainingSet(instances[-2:])


def flat_mse_oracle(model, data):
    """Independent restatement of the training loss: plain mean of squared errors."""
    total = 0.0
    count = 0
    for inst in data.instances:
        if model.kind == "ffnn":
            preds = ffnn_forward(model, inst.features, clip=False)
        else:
            preds = gcn_forward(model, inst.graph, inst.h0(), clip=False)
        for p, y in zip(preds, inst.targets):
            total += (p - y) ** 2
            count += 1
    return total / count


def test_constant_target_convergence():
    data, val = _constant_target_sets()
    model = train("ffnn", data, val, TrainConfig(learning_rate=1e-2, seed=0))
    assert model.metadata["val_loss"] < 1e-4
    assert model.metadata["epochs"] <= 1000


def test_returns_best_validation_snapshot():
    data, val = _constant_target_sets()
    model = train("ffnn", data, val, TrainConfig(max_epochs=50, patience=10, learning_rate=1e-3, seed=1))
    val_losses = [v for _, v in model.history]
    assert model.metadata["val_loss"] == pytest.approx(min(val_losses), abs=1e-15)
    assert dataset_loss(model, val) == pytest.approx(min(val_losses), abs=1e-12)
    assert model.metadata["best_epoch"] <= model.metadata["epochs"]


def test_early_stop_respects_patience():
    data, val = _constant_target_sets(count=6)
    model = train("ffnn", data, val, TrainConfig(max_epochs=1000, patience=5, learning_rate=5e-2, seed=2))
    assert model.metadata["epochs"] < 1000
    assert model.metadata["epochs"] - model.metadata["best_epoch"] >= 5 or model.metadata["epochs"] == 1000


def test_trainer_loss_matches_flat_mse_oracle():
    data, val = _constant_target_sets(count=6)
    model = train("ffnn", data, val, TrainConfig(max_epochs=30, patience=30, learning_rate=1e-3, seed=3))
    final_train, _ = model.history[-1]
    # The history entry reports the loss of the epoch-final parameters, while
    # the returned model is the best snapshot; rebuild the comparison on the
    # returned parameters directly.
    assert dataset_loss(model, data) == pytest.approx(flat_mse_oracle(model, data), abs=1e-10)
    assert dataset_loss(model, val) == pytest.approx(flat_mse_oracle(model, val), abs=1e-10)
    assert model.metadata["val_loss"] == pytest.approx(flat_mse_oracle(model, val), abs=1e-10)


def test_divergence_raises_with_epoch():
    data, val = _constant_target_sets(count=4)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(TrainingError, match="epoch"):
            train("ffnn", data, val, TrainConfig(max_epochs=200, patience=200, learning_rate=1e80, seed=0))


def test_gcn_training_runs():
    instances = []
    for s in range(5):
        g = generate_random_graph(8, 0.5, 20 + s)
        instances.append(InstanceData(f"g{s}", np.full(8, 0.5), graph=g))
    data, val = TrainingSet(instances[:4]), TrainingSet(instances[4:])
    model = train("gcn", data, val, TrainConfig(max_epochs=15, patience=15, learning_rate=1e-3,
                                                gcn_layers=4, seed=0))
    assert model.kind == "gcn"
    assert np.isfinite(model.metadata["val_loss"])


def test_training_set_validation():
    g = generate_random_graph(5, 0.4, 0)
    with pytest.raises(ValueError, match="no examples"):
        TrainingSet([InstanceData("x", np.array([]), features=np.zeros((0, 9)))])
    with pytest.raises(ValueError, match="outside"):
        TrainingSet([InstanceData("x", np.array([1.5]), features=np.zeros((1, 9)), graph=g)])


def test_empty_sets_rejected():
    data, _ = _constant_target_sets(count=4)
    with pytest.raises(ValueError, match="non-empty"):
        train("ffnn", data, TrainingSet([]), TrainConfig())
