"""Prediction targets from converged runs, averaging over optimal dual solutions.

Degenerate instances admit many optimal duals; the target for each vertex is
the mean of its value over extreme points of the optimal face, sampled with
random secondary objectives. Nondegenerate instances contribute their unique
optimum directly.
"""
from __future__ import annotations

import numpy as np

from .colgen import CONVERGED, CgConfig, StabPolicy, CLASSIC, run_colgen
from .graph import Graph, warm_start_columns
from .lp import OPTIMAL, build_dual_lp, optimal_face_vertex, solve_lp


class LabelError(RuntimeError):
    pass


RESOLVE_FACTOR = 10  # optimal-face samples per zero-valued basic variable


def collect_labels(g: Graph, config: CgConfig) -> np.ndarray:
    """Per-vertex targets in [0, 1] from a classic converged run on `g`.

    Raises LabelError when the run does not converge within the configured
    limits; callers skip such instances.
    """
    initial = warm_start_columns(g, restarts=10, seed=config.seed)
    result = run_colgen(g, StabPolicy(CLASSIC), config, initial)
    if result.status != CONVERGED:
        raise LabelError(f"run ended with status {result.status} after {result.iterations} iterations")
    lp = build_dual_lp(g, result.columns)
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise LabelError(f"final restriction solve failed: {sol.status}")
    if sol.zero_basic_count == 0:
        return np.clip(sol.values[: g.n], 0.0, 1.0)
    samples = RESOLVE_FACTOR * sol.zero_basic_count
    rng = np.random.default_rng(config.seed)
    total = np.zeros(g.n)
    for _ in range(samples):
        objective = rng.uniform(0.0, 1.0, lp.num_vars)
        face = optimal_face_vertex(lp, sol, objective)
        if face.status != OPTIMAL:
            raise LabelError(f"optimal-face resolve failed: {face.status}")
        total += face.values[: g.n]
    return np.clip(total / samples, 0.0, 1.0)
