"""Bounded-variable LP solver and construction of the restricted dual problem.

The solver is a revised primal simplex over box-bounded variables with an
explicit dense basis inverse, refactorized every 100 pivots. All problems are
maximizations over rows of the form sum(coef * x) <= rhs. Slack variable of
row r occupies padded column index num_vars + r; warm starts are expressed in
that index space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Column, Graph

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
REFACTOR_EVERY = 100

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


class DualVector:
    """Per-vertex dual values in [0, 1]."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("dual vector must be one-dimensional")
        if arr.size and (arr.min() < -1e-9 or arr.max() > 1.0 + 1e-9):
            raise ValueError("dual values must lie in [0, 1]")
        self.values = np.clip(arr, 0.0, 1.0)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    def __iter__(self):
        return iter(self.values.tolist())

    def __repr__(self) -> str:
        return f"DualVector({self.values.tolist()})"


@dataclass
class LinearProgram:
    """Maximize objective . x subject to sparse <=-rows and box bounds."""

    num_vars: int
    objective: np.ndarray
    rows: list[tuple[list[tuple[int, float]], float]]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if not (self.objective.size == self.lower.size == self.upper.size == self.num_vars):
            raise ValueError("objective/bound dimensions must match num_vars")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.lower)):
            raise ValueError("lower bounds must be finite")
        for coefs, _ in self.rows:
            for j, _ in coefs:
                if not 0 <= j < self.num_vars:
                    raise ValueError(f"row references variable {j} out of range")


@dataclass
class BasisState:
    basic: list[int]
    at_upper: set[int]


@dataclass
class LpSolution:
    status: str
    values: np.ndarray
    objective: float
    zero_basic_count: int = 0
    basis: BasisState | None = None
    pivots: int = 0


def _box_optimum(lp: LinearProgram) -> LpSolution:
    x = np.where(lp.objective > 0, lp.upper, lp.lower)
    if np.any(~np.isfinite(x)):
        return LpSolution(UNBOUNDED, np.zeros(lp.num_vars), float("inf"))
    return LpSolution(OPTIMAL, x, float(lp.objective @ x), 0, BasisState([], set()), 0)


class _Simplex:
    def __init__(self, lp: LinearProgram, iter_limit: int, force_bland: bool):
        nv = lp.num_vars
        m = len(lp.rows)
        ncols = nv + m
        A = np.zeros((m, ncols))
        b = np.zeros(m)
        for i, (coefs, rhs) in enumerate(lp.rows):
            for j, coef in coefs:
                A[i, j] += coef
            A[i, nv + i] = 1.0
            b[i] = rhs
        self.lp = lp
        self.nv, self.m, self.ncols = nv, m, ncols
        self.A = A
        self.b = b
        self.c = np.concatenate([lp.objective, np.zeros(m)])
        self.l = np.concatenate([lp.lower, np.zeros(m)])
        self.u = np.concatenate([lp.upper, np.full(m, np.inf)])
        self.iter_limit = iter_limit
        self.bland = force_bland
        self.degenerate = 0
        self.degenerate_switch = 3 * (nv + m)
        self.pivots = 0
        self.movable = self.u - self.l > PIVOT_TOL

    def _init_basis(self, start: BasisState | None) -> None:
        m, nv = self.m, self.nv
        if start is not None and len(start.basic) == m:
            basic = list(start.basic)
            try:
                Binv = np.linalg.inv(self.A[:, basic])
            except np.linalg.LinAlgError:
                start = None
            else:
                self.basic = basic
                self.Binv = Binv
                self.at_upper = np.zeros(self.ncols, dtype=bool)
                for j in start.at_upper:
                    if 0 <= j < self.ncols and np.isfinite(self.u[j]):
                        self.at_upper[j] = True
        if start is None or len(start.basic) != m:
            self.basic = [nv + i for i in range(m)]
            self.Binv = np.eye(m)
            self.at_upper = np.zeros(self.ncols, dtype=bool)
        self.in_basis = np.zeros(self.ncols, dtype=bool)
        self.in_basis[self.basic] = True
        self.at_upper[self.in_basis] = False
        self._recompute_x()

    def _recompute_x(self) -> None:
        x = np.where(self.at_upper, self.u, self.l)
        x[self.in_basis] = 0.0
        xb = self.Binv @ (self.b - self.A @ x)
        x[self.basic] = xb
        self.x = x

    def _refactor(self) -> None:
        self.Binv = np.linalg.inv(self.A[:, self.basic])
        self._recompute_x()

    def _violation(self) -> np.ndarray:
        xb = self.x[self.basic]
        lo = self.l[self.basic]
        hi = self.u[self.basic]
        return np.maximum(lo - xb, 0.0) + np.maximum(np.where(np.isfinite(hi), xb - hi, 0.0), 0.0)

    def _select_entering(self, d: np.ndarray) -> int:
        improve_low = (~self.in_basis) & self.movable & (~self.at_upper) & (d > OPT_TOL)
        improve_up = (~self.in_basis) & self.movable & self.at_upper & (d < -OPT_TOL)
        improving = improve_low | improve_up
        if not improving.any():
            return -1
        idx = np.flatnonzero(improving)
        if self.bland:
            return int(idx[0])
        scores = np.abs(d[idx])
        return int(idx[int(np.argmax(scores))])

    def _ratio_test(self, j: int, sigma: float, alpha: np.ndarray, phase1: bool):
        """Return (t, blocking_row, leave_at_upper) with blocking_row < 0 for a bound flip."""
        xb = self.x[self.basic]
        lo = self.l[self.basic]
        hi = self.u[self.basic]
        move = sigma * alpha  # basic i changes at rate -move[i]
        cand_t: list[float] = []
        cand_row: list[int] = []
        cand_up: list[bool] = []
        if phase1:
            below = xb < lo - FEAS_TOL
            above = np.isfinite(hi) & (xb > hi + FEAS_TOL)
            feas = ~(below | above)
        else:
            below = np.zeros(self.m, dtype=bool)
            above = np.zeros(self.m, dtype=bool)
            feas = np.ones(self.m, dtype=bool)
        dec = move > PIVOT_TOL
        inc = move < -PIVOT_TOL
        # Feasible basics block at the bound they approach.
        rows = np.flatnonzero(feas & dec)
        for r in rows:
            cand_t.append(max((xb[r] - lo[r]) / move[r], 0.0))
            cand_row.append(r)
            cand_up.append(False)
        rows = np.flatnonzero(feas & inc & np.isfinite(hi))
        for r in rows:
            cand_t.append(max((hi[r] - xb[r]) / (-move[r]), 0.0))
            cand_row.append(r)
            cand_up.append(True)
        if phase1:
            # Infeasible basics block only when they reach the violated bound.
            rows = np.flatnonzero(below & inc)
            for r in rows:
                cand_t.append(max((lo[r] - xb[r]) / (-move[r]), 0.0))
                cand_row.append(r)
                cand_up.append(False)
            rows = np.flatnonzero(above & dec)
            for r in rows:
                cand_t.append(max((xb[r] - hi[r]) / move[r], 0.0))
                cand_row.append(r)
                cand_up.append(True)
        span = self.u[j] - self.l[j]
        if np.isfinite(span):
            cand_t.append(float(span))
            cand_row.append(-1)
            cand_up.append(False)
        if not cand_t:
            return None
        t_arr = np.asarray(cand_t)
        t_min = float(t_arr.min())
        tie = np.flatnonzero(t_arr <= t_min + 1e-10)
        if len(tie) == 1:
            k = int(tie[0])
        else:
            if self.bland:
                # Smallest basic-variable index among ties; bound flip last.
                def key(i):
                    r = cand_row[i]
                    return self.basic[r] if r >= 0 else self.ncols
                k = min(tie, key=key)
            else:
                def key(i):
                    r = cand_row[i]
                    a = abs(alpha[r]) if r >= 0 else 0.0
                    v = self.basic[r] if r >= 0 else self.ncols
                    return (-a, v)
                k = min(tie, key=key)
        return t_min, cand_row[int(k)], cand_up[int(k)]

    def _apply_step(self, j: int, sigma: float, alpha: np.ndarray, t: float, row: int, leave_up: bool) -> None:
        if t > 0:
            self.x[self.basic] -= t * sigma * alpha
        if row < 0:
            # Bound flip: the entering variable moves to its opposite bound.
            self.at_upper[j] = not self.at_upper[j]
            self.x[j] = self.u[j] if self.at_upper[j] else self.l[j]
        else:
            leaving = self.basic[row]
            self.in_basis[leaving] = False
            self.at_upper[leaving] = leave_up and bool(np.isfinite(self.u[leaving]))
            self.x[leaving] = self.u[leaving] if self.at_upper[leaving] else self.l[leaving]
            self.basic[row] = j
            self.in_basis[j] = True
            self.at_upper[j] = False
            self.x[j] = (self.l[j] + t) if sigma > 0 else (self.u[j] - t)
            piv = alpha[row]
            self.Binv[row] /= piv
            col = alpha.copy()
            col[row] = 0.0
            self.Binv -= np.outer(col, self.Binv[row])
        if t <= 1e-9:
            self.degenerate += 1
            if self.degenerate >= self.degenerate_switch:
                self.bland = True
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self._refactor()

    def _phase1(self) -> str | None:
        while True:
            viol = self._violation()
            if viol.sum() <= FEAS_TOL * max(1, self.m):
                return None
            if self.pivots >= self.iter_limit:
                return ITERATION_LIMIT
            xb = self.x[self.basic]
            h = np.zeros(self.m)
            h[xb < self.l[self.basic] - FEAS_TOL] = 1.0
            hi = self.u[self.basic]
            h[np.isfinite(hi) & (xb > hi + FEAS_TOL)] = -1.0
            y = self.Binv.T @ h
            d = -(self.A.T @ y)
            j = self._select_entering(d)
            if j < 0:
                return INFEASIBLE
            sigma = -1.0 if self.at_upper[j] else 1.0
            alpha = self.Binv @ self.A[:, j]
            hit = self._ratio_test(j, sigma, alpha, phase1=True)
            if hit is None:
                raise RuntimeError("unbounded infeasibility-reduction step")
            self._apply_step(j, sigma, alpha, *hit)

    def _phase2(self) -> str:
        while True:
            if self.pivots >= self.iter_limit:
                return ITERATION_LIMIT
            y = self.Binv.T @ self.c[self.basic]
            d = self.c - self.A.T @ y
            j = self._select_entering(d)
            if j < 0:
                return OPTIMAL
            sigma = -1.0 if self.at_upper[j] else 1.0
            alpha = self.Binv @ self.A[:, j]
            hit = self._ratio_test(j, sigma, alpha, phase1=False)
            if hit is None:
                return UNBOUNDED
            self._apply_step(j, sigma, alpha, *hit)

    def run(self, start: BasisState | None) -> LpSolution:
        self._init_basis(start)
        status = None
        for _ in range(3):
            status = self._phase1()
            if status is None:
                status = self._phase2()
            if status != OPTIMAL:
                break
            self._refactor()
            if self._violation().max(initial=0.0) <= 1e-7:
                break
            status = None  # drift past the audit tolerance: repair and re-optimize
        if status is None:
            status = INFEASIBLE
        values = np.clip(self.x[: self.nv], self.lp.lower, self.lp.upper)
        objective = float(self.lp.objective @ values)
        zero_basic = int(np.sum(np.abs(self.x[self.basic]) <= 1e-9)) if status == OPTIMAL else 0
        basis = BasisState(list(self.basic), {int(j) for j in np.flatnonzero(self.at_upper)})
        return LpSolution(status, values, objective, zero_basic, basis, self.pivots)


def solve_lp(
    lp: LinearProgram,
    iter_limit: int = 200_000,
    start: BasisState | None = None,
    force_bland: bool = False,
) -> LpSolution:
    """Solve a box-bounded maximization LP; see module docstring for conventions."""
    if len(lp.rows) == 0:
        return _box_optimum(lp)
    sol = _Simplex(lp, iter_limit, force_bland).run(start)
    if sol.status == INFEASIBLE and start is not None:
        # A stale warm basis can defeat the drift repair; retry from scratch.
        sol = _Simplex(lp, iter_limit, force_bland).run(None)
    return sol


def audit_solution(lp: LinearProgram, values: np.ndarray, row_tol: float = 1e-7, bound_tol: float = 1e-9) -> None:
    """Replay a solution against all rows and bounds; raise on any violation."""
    if np.any(values < lp.lower - bound_tol) or np.any(values > lp.upper + bound_tol):
        raise AssertionError("solution violates a variable bound")
    for i, (coefs, rhs) in enumerate(lp.rows):
        lhs = sum(coef * values[j] for j, coef in coefs)
        if lhs > rhs + row_tol:
            raise AssertionError(f"row {i} violated: {lhs} > {rhs}")


def build_dual_lp(
    g: Graph,
    columns: Sequence[Column],
    reference=None,
    penalty: float = 0.0,
    force_deviation_vars: bool = False,
) -> LinearProgram:
    """Restricted dual of fractional coloring, optionally stabilized toward a reference.

    Variables: pi (one per vertex, boxed [0,1]); when penalty > 0, deviation
    variables wm and wp (boxed [0,1]) measure how far pi falls below or rises
    above the reference, and are charged `penalty` in the objective. One row
    per column caps the member duals at 1. With penalty == 0 the deviation
    variables and their rows are omitted.
    """
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    n = g.n
    with_dev = penalty > 0 or force_deviation_vars
    if with_dev:
        if reference is None:
            raise ValueError("stabilization requires a reference point")
        ref = np.asarray(reference.values if isinstance(reference, DualVector) else reference, dtype=float)
        if ref.size != n:
            raise ValueError(f"reference has length {ref.size}, expected {n}")
    num_vars = 3 * n if with_dev else n
    objective = np.zeros(num_vars)
    objective[:n] = 1.0
    rows: list[tuple[list[tuple[int, float]], float]] = []
    for col in columns:
        rows.append(([(v, 1.0) for v in col.vertices], 1.0))
    if with_dev:
        objective[n:] = -penalty
        for i in range(n):
            rows.append(([(i, -1.0), (n + i, -1.0)], -float(ref[i])))
            rows.append(([(i, 1.0), (2 * n + i, -1.0)], float(ref[i])))
    return LinearProgram(num_vars, objective, rows, np.zeros(num_vars), np.ones(num_vars))


def optimal_face_vertex(
    lp: LinearProgram,
    base_solution: LpSolution,
    random_objective=None,
    seed: int = 0,
    pin_tol: float = 1e-7,
) -> LpSolution:
    """Re-optimize a secondary objective over the optimal face of `lp`.

    Adds a pinning row keeping the original objective within `pin_tol` of the
    base optimum and maximizes `random_objective` (drawn uniformly from [0,1]
    per variable under `seed` when not given). Returns an extreme point of the
    optimal face.
    """
    if base_solution.status != OPTIMAL:
        raise ValueError("base solution must be optimal")
    if random_objective is None:
        random_objective = np.random.default_rng(seed).uniform(0.0, 1.0, lp.num_vars)
    random_objective = np.asarray(random_objective, dtype=float)
    pin = [(j, -float(lp.objective[j])) for j in range(lp.num_vars) if lp.objective[j] != 0.0]
    rows = list(lp.rows) + [(pin, -(base_solution.objective - pin_tol))]
    pinned = LinearProgram(lp.num_vars, random_objective, rows, lp.lower, lp.upper)
    start = None
    if base_solution.basis is not None and len(base_solution.basis.basic) == len(lp.rows):
        start = BasisState(base_solution.basis.basic + [lp.num_vars + len(rows) - 1], set(base_solution.basis.at_upper))
    return solve_lp(pinned, start=start)
