"""Self-check suites: oracle equivalence, pricing exactness, and penalty bounds."""
from __future__ import annotations

import random

import numpy as np

from .colgen import (ADAPTIVE_REFERENCE, CLASSIC, CONVERGED, CgConfig, PREVIOUS_ITERATE,
                     StabPolicy, run_colgen)
from .graph import generate_random_graph, warm_start_columns
from .lp import OPTIMAL, build_dual_lp, solve_lp
from .oracle import oracle_lp_bound, solve_lp_rational
from .pricing import enumerate_all_mis, price_exact, price_heuristic


def _suite_graphs(count: int, max_n: int, seed0: int = 100):
    graphs = []
    ps = (0.2, 0.5, 0.8)
    for i in range(count):
        n = 5 + (i % (max_n - 4))
        graphs.append(generate_random_graph(n, ps[i % 3], seed0 + i))
    return graphs


def check_pricing_exactness(samples: int = 50, seed: int = 0):
    """Exact pricer agrees with complete enumeration on random graphs and weights."""
    rng = random.Random(seed)
    worst = 0.0
    for t in range(samples):
        g = generate_random_graph(rng.randint(3, 12), rng.choice([0.2, 0.5, 0.8]), 1000 + t)
        weights = [rng.random() for _ in range(g.n)]
        best = min(1.0 - c.weight(weights) for c in enumerate_all_mis(g))
        got = price_exact(g, weights)
        if not got.proven_optimal or got.reduced_cost != best:
            return False, f"sample {t}: {got.reduced_cost} vs enumeration {best}"
        heur = price_heuristic(g, weights, effort=100, seed=t)
        if heur.reduced_cost < got.reduced_cost - 1e-12:
            return False, f"sample {t}: heuristic beat the exact optimum"
        worst = max(worst, abs(got.reduced_cost - best))
    return True, f"{samples} samples, exact agreement"


def check_oracle_equivalence(graph_count: int = 10, seed: int = 0):
    """All policies converge to the full-enumeration bound on a seeded suite."""
    graphs = _suite_graphs(graph_count, 12, seed0=500 + seed)
    worst = 0.0
    for g in graphs:
        target = oracle_lp_bound(g)
        init = warm_start_columns(g, 10, 1)
        for policy, yhat in (
            (StabPolicy(CLASSIC), None),
            (StabPolicy(PREVIOUS_ITERATE, epsilon0=1.0), None),
            (StabPolicy(ADAPTIVE_REFERENCE, epsilon0=0.5), np.full(g.n, 0.5)),
        ):
            res = run_colgen(g, policy, CgConfig(seed=1), init, yhat=yhat)
            if res.status != CONVERGED:
                return False, f"{policy.kind} did not converge on n={g.n}"
            worst = max(worst, abs(res.objective - target))
            if worst > 1e-6:
                return False, f"{policy.kind} off by {worst:.2e} on n={g.n}"
    return True, f"{graph_count} graphs x 3 policies, max deviation {worst:.2e}"


def check_penalty_bound(graph_count: int = 8, seed: int = 0):
    """Adaptive penalties stay within the diagnostic gap at every iteration."""
    graphs = _suite_graphs(graph_count, 12, seed0=900 + seed)
    checked = 0
    for g in graphs:
        init = warm_start_columns(g, 10, 2)
        res = run_colgen(g, StabPolicy(ADAPTIVE_REFERENCE, epsilon0=0.5),
                         CgConfig(seed=2, diagnostic_gap=True), init, yhat=np.full(g.n, 0.5))
        for rec in res.trace:
            if rec.gap is None:
                continue
            checked += 1
            if not (-1e-12 <= rec.epsilon_next <= rec.gap + 1e-7):
                return False, f"epsilon {rec.epsilon_next} above gap {rec.gap}"
    return True, f"{checked} iterations within bound"


def check_rational_cross(seed: int = 0):
    """Production LP objective matches the exact-arithmetic solver on full duals."""
    for i, g in enumerate(_suite_graphs(5, 10, seed0=1300 + seed)):
        lp = build_dual_lp(g, enumerate_all_mis(g))
        sol = solve_lp(lp)
        status, obj = solve_lp_rational(lp)
        if sol.status != OPTIMAL or status != "optimal" or abs(sol.objective - float(obj)) > 1e-9:
            return False, f"graph {i}: {sol.objective} vs rational {obj}"
    return True, "5 full duals, exact match"


def run_verification(quick: bool = False):
    """Run every suite; returns (name, passed, detail) triples."""
    scale = 1 if quick else 2
    return [
        ("pricing-exactness", *check_pricing_exactness(samples=25 * scale)),
        ("oracle-equivalence", *check_oracle_equivalence(graph_count=5 * scale)),
        ("penalty-gap-bound", *check_penalty_bound(graph_count=4 * scale)),
        ("rational-lp-cross", *check_rational_cross()),
    ]
