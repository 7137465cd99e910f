"""Column-generation driver with penalty stabilization toward a reference dual point.

Four policies share one loop: classic (no stabilization), previous-iterate
(reference = last dual iterate, constant penalty with halving), fixed-reference
(constant penalty toward a prediction, with halving), and adaptive-reference
(penalty recomputed every iteration from the latest reduced cost).
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graph import Column, Graph
from .lp import OPTIMAL, BasisState, build_dual_lp, solve_lp
from .pricing import PricingResult, price_exact, price_heuristic

CLASSIC = "classic"
PREVIOUS_ITERATE = "previous-iterate"
FIXED_REFERENCE = "fixed-reference"
ADAPTIVE_REFERENCE = "adaptive-reference"
_KINDS = (CLASSIC, PREVIOUS_ITERATE, FIXED_REFERENCE, ADAPTIVE_REFERENCE)
_REFERENCE_KINDS = (FIXED_REFERENCE, ADAPTIVE_REFERENCE)

CONVERGED = "converged"
ITERATION_LIMIT = "iteration_limit"
TIME_LIMIT = "time_limit"

ADD_TOL = 1e-9  # columns with reduced cost below -ADD_TOL enter the restriction


class ColgenError(RuntimeError):
    pass


@dataclass
class StabPolicy:
    """Stabilization regime: kind, initial penalty, floor, and halving behavior."""

    kind: str
    epsilon0: float = 0.0
    floor: float = 0.01
    halving: bool = True
    predictor: Callable[[Graph, int], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind != CLASSIC and self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive for stabilized policies")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")


@dataclass
class CgConfig:
    max_iterations: int = 100_000
    time_limit: float = 3600.0
    pricing_mode: str = "exact"  # "exact" | "heuristic" (heuristic with exact fallback)
    heuristic_effort: int = 200
    seed: int = 0
    record_duals: bool = False
    diagnostic_gap: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.pricing_mode not in ("exact", "heuristic"):
            raise ValueError(f"unknown pricing mode {self.pricing_mode!r}")


@dataclass
class IterationRecord:
    index: int
    objective: float  # plain dual objective (sum of duals) at this iterate
    reduced_cost: float
    epsilon_used: float
    epsilon_next: float
    lagrangian_bound: float | None
    pricing_seconds: float
    lp_seconds: float
    gap: float | None = None
    rdp_objective: float | None = None
    duals: np.ndarray | None = None


@dataclass
class CgResult:
    objective: float
    iterations: int
    columns: list[Column]
    status: str
    trace: list[IterationRecord]


def update_epsilon_adaptive(reduced_cost: float, floor: float = 0.01) -> float:
    """Penalty from the latest reduced cost: c/(c-1) when c < 0, else 0; floored."""
    if reduced_cost >= 0:
        return 0.0
    eps = reduced_cost / (reduced_cost - 1.0)
    return eps if eps >= floor else 0.0


def update_epsilon_fixed(current: float, priced_negative: bool, floor: float = 0.01) -> float:
    """Keep the penalty while pricing progresses; halve it otherwise, snapping below the floor."""
    if priced_negative:
        return current
    half = current / 2.0
    return half if half >= floor else 0.0


def lagrangian_bound(objective: float, reduced_cost: float, proven_optimal: bool = True) -> float:
    """Valid lower bound on the dual optimum: objective / (1 - reduced_cost)."""
    if not proven_optimal:
        raise ValueError("lagrangian bound requires an exactly priced reduced cost")
    denom = 1.0 - reduced_cost
    if denom <= 0:
        raise ValueError("lagrangian bound undefined for reduced cost >= 1")
    return objective / denom


def _restriction_optimum(g: Graph, columns: Sequence[Column]) -> float:
    sol = solve_lp(build_dual_lp(g, columns))
    if sol.status != OPTIMAL:
        raise ColgenError(f"plain restriction solve failed: {sol.status}")
    return sol.objective


def lagrangian_gap_diagnostic(
    g: Graph, columns: Sequence[Column], pi_eps_objective: float, reduced_cost: float
) -> float:
    """Gap 1 - L/z over the same columns, z from the unstabilized restriction.

    Diagnostic only: the adaptive control path never consumes this value.
    """
    z_rdp = _restriction_optimum(g, columns)
    bound = lagrangian_bound(pi_eps_objective, reduced_cost)
    return 1.0 - bound / z_rdp


def _initial_epsilon(policy: StabPolicy) -> float:
    if policy.kind in (CLASSIC, PREVIOUS_ITERATE):
        return 0.0  # previous-iterate has no reference before iteration 1
    return policy.epsilon0


def _next_epsilon(policy: StabPolicy, iteration: int, eps: float, reduced_cost: float) -> float:
    if policy.kind == CLASSIC:
        return 0.0
    if policy.kind == ADAPTIVE_REFERENCE:
        return update_epsilon_adaptive(reduced_cost, policy.floor)
    priced_negative = reduced_cost < -ADD_TOL
    if policy.kind == PREVIOUS_ITERATE and iteration == 1:
        # The first iteration ran unstabilized (no previous iterate exists);
        # the configured penalty takes over once a reference is available.
        return policy.epsilon0 if priced_negative else 0.0
    if not policy.halving and not priced_negative:
        return eps
    return update_epsilon_fixed(eps, priced_negative, policy.floor)


def _remap_basis(prev: BasisState, nv: int, prev_ncols: int) -> BasisState:
    """Shift slack indices after one column row was inserted at position prev_ncols."""

    def remap(j: int) -> int:
        if j < nv or j - nv < prev_ncols:
            return j
        return j + 1

    basic = [remap(j) for j in prev.basic] + [nv + prev_ncols]
    return BasisState(basic, {remap(j) for j in prev.at_upper})


def run_colgen(
    g: Graph,
    policy: StabPolicy,
    config: CgConfig,
    initial_columns: Sequence[Column],
    yhat=None,
) -> CgResult:
    """Generate columns until an exact pricing run proves optimality at zero penalty.

    Per iteration: solve the (stabilized) restricted dual, price against its
    solution (heuristic first in fallback mode), add the column when its
    reduced cost is below -1e-9, then update the penalty per policy. Stops when
    exact pricing reports reduced cost >= -1e-9 while the penalty in effect was 0.
    """
    n = g.n
    if policy.kind in _REFERENCE_KINDS:
        if yhat is None and policy.predictor is not None:
            yhat = policy.predictor(g, config.seed)
        if yhat is None:
            raise ValueError(f"policy {policy.kind!r} requires a reference prediction")
        yhat = np.asarray(getattr(yhat, "values", yhat), dtype=float)
        if yhat.size != n:
            raise ValueError("prediction length must equal vertex count")
    elif yhat is not None:
        raise ValueError(f"policy {policy.kind!r} does not take a prediction")

    columns: list[Column] = []
    seen: set[tuple[int, ...]] = set()
    for col in initial_columns:
        col.validate(g)
        if col.vertices not in seen:
            seen.add(col.vertices)
            columns.append(col)

    eps = _initial_epsilon(policy)
    reference = yhat if policy.kind in _REFERENCE_KINDS else None
    trace: list[IterationRecord] = []
    prev_basis: BasisState | None = None
    prev_shape: tuple[bool, int] | None = None  # (deviation vars present, column count)
    bland_retry_used = False
    status = ITERATION_LIMIT
    objective = float("nan")
    t_start = time.perf_counter()

    iteration = 0
    while iteration < config.max_iterations:
        iteration += 1
        with_dev = eps > 0
        k_at_solve = len(columns)
        lp = build_dual_lp(g, columns, reference if with_dev else None, eps)
        start = None
        if prev_basis is not None and prev_shape is not None and prev_shape[0] == with_dev:
            if prev_shape[1] == k_at_solve:
                start = prev_basis
            elif prev_shape[1] + 1 == k_at_solve:
                start = _remap_basis(prev_basis, lp.num_vars, prev_shape[1])
        t_lp = time.perf_counter()
        sol = solve_lp(lp, start=start, force_bland=bland_retry_used)
        lp_seconds = time.perf_counter() - t_lp
        if sol.status != OPTIMAL:
            raise ColgenError(f"restricted dual solve failed with status {sol.status}")
        pi = sol.values[:n]
        z = float(pi.sum())

        remaining = config.time_limit - (time.perf_counter() - t_start)
        if remaining <= 0:
            status = TIME_LIMIT
            break
        t_price = time.perf_counter()
        exact_result: PricingResult | None = None
        if config.pricing_mode == "heuristic":
            heur = price_heuristic(g, pi, effort=config.heuristic_effort, seed=config.seed + iteration)
            if heur.reduced_cost < -ADD_TOL:
                used = heur
            else:
                exact_result = price_exact(g, pi, time_limit=remaining)
                used = exact_result
        else:
            exact_result = price_exact(g, pi, time_limit=remaining)
            used = exact_result
        pricing_seconds = time.perf_counter() - t_price
        if exact_result is not None and not exact_result.proven_optimal:
            status = TIME_LIMIT
            break

        # Diagnostics are taken against the column set the LP was built from.
        bound = None
        gap = None
        rdp_obj = None
        if exact_result is not None and 1.0 - exact_result.reduced_cost > 0:
            bound = lagrangian_bound(z, exact_result.reduced_cost)
            if config.diagnostic_gap:
                rdp_obj = _restriction_optimum(g, columns)
                gap = 1.0 - bound / rdp_obj

        if used.reduced_cost < -ADD_TOL:
            if used.column.vertices in seen:
                # A repeated column with negative reduced cost signals numerical
                # trouble; re-solve once under Bland's rule, then give up.
                if bland_retry_used:
                    raise ColgenError(
                        f"duplicate column {used.column.vertices} priced negative twice "
                        f"(reduced cost {used.reduced_cost:.3e}) at iteration {iteration}"
                    )
                bland_retry_used = True
                prev_basis = None
                prev_shape = None
                iteration -= 1
                continue
            seen.add(used.column.vertices)
            columns.append(used.column)

        eps_next = _next_epsilon(policy, iteration, eps, used.reduced_cost)
        trace.append(
            IterationRecord(
                index=iteration,
                objective=z,
                reduced_cost=used.reduced_cost,
                epsilon_used=eps,
                epsilon_next=eps_next,
                lagrangian_bound=bound,
                pricing_seconds=pricing_seconds,
                lp_seconds=lp_seconds,
                gap=gap,
                rdp_objective=rdp_obj,
                duals=pi.copy() if config.record_duals else None,
            )
        )

        if exact_result is not None and exact_result.reduced_cost >= -ADD_TOL and eps == 0:
            status = CONVERGED
            objective = z
            break

        if policy.kind == PREVIOUS_ITERATE:
            reference = pi.copy()
        prev_basis = sol.basis
        prev_shape = (with_dev, k_at_solve)
        eps = eps_next

        if time.perf_counter() - t_start > config.time_limit:
            status = TIME_LIMIT
            break

    if status != CONVERGED and trace:
        objective = trace[-1].objective
    return CgResult(objective, len(trace), columns, status, trace)


def write_trace_csv(trace: Sequence[IterationRecord], path) -> None:
    """One CSV line per iteration: the diagnostic columns used by the report tooling."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["iter", "objective", "reduced_cost", "epsilon_used", "epsilon_next",
             "lagrangian_bound", "lp_seconds", "pricing_seconds"]
        )
        for rec in trace:
            writer.writerow(
                [rec.index, f"{rec.objective:.12g}", f"{rec.reduced_cost:.12g}",
                 f"{rec.epsilon_used:.12g}", f"{rec.epsilon_next:.12g}",
                 "" if rec.lagrangian_bound is None else f"{rec.lagrangian_bound:.12g}",
                 f"{rec.lp_seconds:.6f}", f"{rec.pricing_seconds:.6f}"]
            )


def save_dual_snapshots(trace: Sequence[IterationRecord], path) -> None:
    """Stack recorded dual iterates into an iterations-by-vertices matrix on disk."""
    rows = [rec.duals for rec in trace if rec.duals is not None]
    if not rows:
        raise ValueError("trace carries no dual snapshots; enable record_duals")
    np.save(path, np.vstack(rows))
