"""Independent ground-truth solvers used to audit the production path.

Three routes: the fractional-coloring bound from complete column enumeration,
an exact-arithmetic tableau simplex (Fractions, Bland's rule, explicit bound
rows), and brute-force vertex enumeration for very small programs. They share
no code with the production simplex.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from .graph import Graph
from .lp import LinearProgram, build_dual_lp, solve_lp
from .pricing import ENUMERATION_LIMIT, enumerate_all_mis

VERTEX_ENUM_LIMIT = 7


def oracle_lp_bound(g: Graph) -> float:
    """Exact fractional-coloring LP bound via complete enumeration of all columns."""
    if g.n > ENUMERATION_LIMIT:
        raise ValueError(f"oracle bound limited to n <= {ENUMERATION_LIMIT}")
    columns = enumerate_all_mis(g)
    sol = solve_lp(build_dual_lp(g, columns))
    if sol.status != "optimal":
        raise RuntimeError(f"oracle solve failed: {sol.status}")
    return sol.objective


def solve_lp_rational(lp: LinearProgram):
    """Exact tableau simplex under Bland's rule; returns (status, objective Fraction or None).

    Box bounds become explicit rows after shifting variables to their lower
    bounds, so this path exercises none of the bounded-variable machinery of
    the production solver.
    """
    n = lp.num_vars
    lower = [Fraction(x) for x in lp.lower.tolist()]
    c = [Fraction(x) for x in lp.objective.tolist()]
    const = sum(ci * li for ci, li in zip(c, lower))
    rows: list[tuple[list[Fraction], Fraction]] = []
    for coefs, rhs in lp.rows:
        dense = [Fraction(0)] * n
        shift = Fraction(0)
        for j, coef in coefs:
            fc = Fraction(coef)
            dense[j] += fc
            shift += fc * lower[j]
        rows.append((dense, Fraction(rhs) - shift))
    for j in range(n):
        if np.isfinite(lp.upper[j]):
            dense = [Fraction(0)] * n
            dense[j] = Fraction(1)
            rows.append((dense, Fraction(lp.upper[j]) - lower[j]))

    m = len(rows)
    # Columns: n structurals, m slack/surplus, then artificials for negative rhs.
    art_rows = [i for i, (_, rhs) in enumerate(rows) if rhs < 0]
    num_art = len(art_rows)
    width = n + m + num_art
    tab = [[Fraction(0)] * (width + 1) for _ in range(m)]
    basis = [0] * m
    art_cols: dict[int, int] = {}
    next_art = n + m
    for i, (dense, rhs) in enumerate(rows):
        sign = -1 if rhs < 0 else 1
        for j in range(n):
            tab[i][j] = sign * dense[j]
        tab[i][n + i] = Fraction(sign)
        tab[i][width] = sign * rhs
        if sign < 0:
            tab[i][next_art] = Fraction(1)
            art_cols[i] = next_art
            basis[i] = next_art
            next_art += 1
        else:
            basis[i] = n + i

    def pivot(r: int, col: int) -> None:
        pr = tab[r]
        piv = pr[col]
        tab[r] = [v / piv for v in pr]
        pr = tab[r]
        for i in range(m):
            if i == r:
                continue
            f = tab[i][col]
            if f:
                tab[i] = [a - f * b for a, b in zip(tab[i], pr)]
        basis[r] = col

    def run_phase(obj: list[Fraction]) -> str:
        while True:
            # Reduced costs for a maximization: obj_j - sum over basis rows.
            entering = -1
            for j in range(width):
                if j in basis:
                    continue
                red = obj[j] - sum(obj[basis[i]] * tab[i][j] for i in range(m))
                if red > 0:
                    entering = j  # Bland: first improving index
                    break
            if entering < 0:
                return "optimal"
            ratio = None
            leave = -1
            for i in range(m):
                a = tab[i][entering]
                if a > 0:
                    r = tab[i][width] / a
                    if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                        ratio = r
                        leave = i
            if leave < 0:
                return "unbounded"
            pivot(leave, entering)

    if num_art:
        phase1 = [Fraction(0)] * width
        for col in art_cols.values():
            phase1[col] = Fraction(-1)
        run_phase(phase1)
        infeas = sum(tab[i][width] for i in range(m) if basis[i] >= n + m)
        if infeas > 0:
            return "infeasible", None
        for i in range(m):
            if basis[i] >= n + m:
                for j in range(n + m):
                    if tab[i][j] != 0:
                        pivot(i, j)
                        break
        for i in range(m):
            for col in art_cols.values():
                tab[i][col] = Fraction(0)

    phase2 = [Fraction(0)] * width
    for j in range(n):
        phase2[j] = c[j]
    status = run_phase(phase2)
    if status != "optimal":
        return status, None
    values = [Fraction(0)] * width
    for i in range(m):
        values[basis[i]] = tab[i][width]
    objective = const + sum(c[j] * values[j] for j in range(n))
    return "optimal", objective


def solve_lp_by_vertex_enumeration(lp: LinearProgram):
    """Check every basic point of the constraint system; exponential, tiny inputs only."""
    n = lp.num_vars
    if n > VERTEX_ENUM_LIMIT:
        raise ValueError(f"vertex enumeration limited to {VERTEX_ENUM_LIMIT} variables")
    mats = []
    rhss = []
    for coefs, rhs in lp.rows:
        row = np.zeros(n)
        for j, coef in coefs:
            row[j] += coef
        mats.append(row)
        rhss.append(rhs)
    for j in range(n):
        e = np.zeros(n)
        e[j] = -1.0
        mats.append(e)
        rhss.append(-lp.lower[j])
        if np.isfinite(lp.upper[j]):
            e = np.zeros(n)
            e[j] = 1.0
            mats.append(e)
            rhss.append(lp.upper[j])
    A = np.vstack(mats)
    b = np.asarray(rhss)
    best = None
    for active in combinations(range(len(b)), n):
        sub = A[list(active)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, b[list(active)])
        if np.all(A @ x <= b + 1e-9):
            val = float(lp.objective @ x)
            if best is None or val > best:
                best = val
    if best is None:
        return "infeasible", None
    return "optimal", best
