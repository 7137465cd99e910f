import pytest

from stabcg.colgen import CgConfig
from stabcg.features import compute_features
from stabcg.graph import Graph, generate_random_graph
from stabcg.labels import collect_labels
from stabcg.training import InstanceData, TrainConfig, TrainingSet, train


@pytest.fixture(scope="session")
def k3():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture(scope="session")
def p3():
    return Graph(3, [(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def c5():
    return Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


@pytest.fixture(scope="session")
def star4():
    return Graph(4, [(0, 1), (0, 2), (0, 3)])


def small_suite(count=20, n_lo=5, n_hi=12, seed0=300):
    graphs = []
    ps = (0.2, 0.5, 0.8)
    for i in range(count):
        n = n_lo + (i % (n_hi - n_lo + 1))
        graphs.append(generate_random_graph(n, ps[i % 3], seed0 + i))
    return graphs


@pytest.fixture(scope="session")
def graph_suite():
    return small_suite()


def _training_sets(kind, seeds, graph_n=10, p=0.4):
    instances = []
    for s in seeds:
        g = generate_random_graph(graph_n, p, s)
        targets = collect_labels(g, CgConfig(seed=s, time_limit=60))
        instances.append(
            InstanceData(f"fix-{s}", targets, features=compute_features(g, s), graph=g)
        )
    return TrainingSet(instances[:-2]), TrainingSet(instances[-2:])


@pytest.fixture(scope="session")
def tiny_ffnn():
    data, val = _training_sets("ffnn", range(1, 9))
    return train("ffnn", data, val, TrainConfig(learning_rate=1e-3, max_epochs=60, patience=60, seed=0))


@pytest.fixture(scope="session")
def tiny_gcn():
    data, val = _training_sets("gcn", range(1, 7))
    return train("gcn", data, val, TrainConfig(learning_rate=1e-3, max_epochs=25, patience=25,
                                               gcn_layers=6, seed=0))
