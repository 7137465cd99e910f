"""Shared finite-difference gradient audit helpers.

Checks run only at locally smooth parameter points: a rectifier pre-activation
within reach of the probe step would make the central difference straddle a
kink where no derivative exists.
"""
import numpy as np

from stabcg.models import _relu, init_ffnn, init_gcn, propagation_matrix

GRAD_STEP = 1e-5
GRAD_RTOL = 1e-4
SMOOTH_MARGIN = 1e-3


def finite_difference_gradient(params, loss_fn, step=GRAD_STEP):
    """Central differences over every parameter entry."""
    out = []
    for arr in params:
        g = np.zeros_like(arr)
        if arr.size == 0:
            out.append(g)
            continue
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + step
            up = loss_fn()
            arr[idx] = orig - step
            down = loss_fn()
            arr[idx] = orig
            g[idx] = (up - down) / (2 * step)
            it.iternext()
        out.append(g)
    return out


def gradient_relative_error(params, analytic, loss_fn):
    fd = finite_difference_gradient(params, loss_fn)
    fd_flat = np.concatenate([a.ravel() for a in fd])
    an_flat = np.concatenate([a.ravel() for a in analytic])
    return float(np.linalg.norm(fd_flat - an_flat) / max(np.linalg.norm(fd_flat), 1e-12))


def _ffnn_min_preactivation(model, x):
    h = np.atleast_2d(x)
    smallest = np.inf
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = h @ w.T + b
        smallest = min(smallest, float(np.abs(z).min()))
        h = _relu(z)
    return smallest


def _gcn_min_preactivation(model, g, h0):
    p = propagation_matrix(g)
    z = p @ h0 @ model.weights[0].T
    smallest = float(np.abs(z).min())
    h = _relu(z)
    for w in model.weights[1:-1]:
        z = p @ h @ w.T + h
        smallest = min(smallest, float(np.abs(z).min()))
        h = _relu(z)
    return smallest


def draw_smooth_ffnn_point(rng, seed):
    """A random (model, input) pair away from rectifier kinks."""
    for bump in range(50):
        model = init_ffnn(seed=seed + 1000 * bump)
        x = rng.uniform(0, 1, (3, 9))
        if _ffnn_min_preactivation(model, x) > SMOOTH_MARGIN:
            return model, x
    raise AssertionError("could not find a smooth parameter point")


def draw_smooth_gcn_point(g, h0, seed, layers=4):
    for bump in range(50):
        model = init_gcn(layers=layers, seed=seed + 1000 * bump)
        if _gcn_min_preactivation(model, g, h0) > SMOOTH_MARGIN:
            return model
    raise AssertionError("could not find a smooth parameter point")
