"""Pricing: maximum-weight independent set solvers returning minimum-reduced-cost columns.

The reduced cost of a candidate column s under dual weights pi is
1 - sum(pi[v] for v in s); pricing minimizes it by maximizing the weight.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .graph import Column, Graph, column_from_mask, extend_to_maximal, _bits_to_list

ENUMERATION_LIMIT = 25


@dataclass(frozen=True)
class PricingResult:
    column: Column
    reduced_cost: float
    proven_optimal: bool


def _check_weights(g: Graph, weights) -> list[float]:
    w = [float(x) for x in weights]
    if len(w) != g.n:
        raise ValueError("weight vector length must equal vertex count")
    if any(x < 0 for x in w):
        raise ValueError("pricing weights must be nonnegative")
    return w


def price_exact(g: Graph, pi, time_limit: float = 3600.0) -> PricingResult:
    """Branch-and-bound over independent sets; proves optimality unless the time limit expires.

    Branches on the highest-weight undecided vertex (ties to the lowest index);
    a subtree is pruned when its weight plus a clique-cover bound on the
    remaining candidates cannot strictly beat the incumbent. The returned set
    is extended to a maximal one, which never lowers the weight.
    """
    w = _check_weights(g, pi)
    n = g.n
    adj = g.adj_bits
    deadline = time.perf_counter() + time_limit

    # Greedy incumbent: descending weight, ties to the lowest index.
    order = sorted(range(n), key=lambda v: (-w[v], v))
    inc_mask = 0
    blocked = 0
    for v in order:
        bit = 1 << v
        if not (blocked & bit):
            inc_mask |= bit
            blocked |= adj[v] | bit
    best_mask = inc_mask
    best_weight = sum(w[v] for v in _bits_to_list(inc_mask))

    # Clique-cover bound on a candidate mask: partition candidates greedily into
    # cliques; an independent set takes at most the max weight from each clique.
    # Tighter than the plain weight sum, with identical optima and determinism.
    def clique_bound(cand: int) -> float:
        bound = 0.0
        rest = cand
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            clique = low
            members_max = w[v]
            others = rest & adj[v]
            while others:
                lo2 = others & -others
                u = lo2.bit_length() - 1
                clique |= lo2
                if w[u] > members_max:
                    members_max = w[u]
                others &= adj[u]
            bound += members_max
            rest &= ~clique
        return bound

    timed_out = False
    nodes = 0
    # Iterative DFS: stack of (candidate_mask, current_mask, current_weight).
    stack = [(g.full_mask, 0, 0.0)]
    while stack:
        nodes += 1
        if nodes % 2048 == 0 and time.perf_counter() > deadline:
            timed_out = True
            break
        cand, cur_mask, cur_w = stack.pop()
        if not cand:
            # Canonical ascending-index sum so reported costs match enumeration.
            leaf_w = sum(w[v] for v in _bits_to_list(cur_mask))
            if leaf_w > best_weight:
                best_weight = leaf_w
                best_mask = cur_mask
            continue
        if cur_w + clique_bound(cand) <= best_weight:
            continue
        # Highest-weight candidate, ties to the lowest index.
        pick = -1
        pick_w = -1.0
        m = cand
        while m:
            low = m & -m
            v = low.bit_length() - 1
            if w[v] > pick_w:
                pick_w = w[v]
                pick = v
            m ^= low
        bit = 1 << pick
        # Exclude branch pushed first so the include branch is explored first.
        stack.append((cand ^ bit, cur_mask, cur_w))
        stack.append((cand & ~(adj[pick] | bit), cur_mask | bit, cur_w + w[pick]))

    final_mask = extend_to_maximal(g, best_mask)
    col = column_from_mask(final_mask)
    return PricingResult(col, 1.0 - col.weight(w), proven_optimal=not timed_out)


def heuristic_search(g: Graph, weights: list[float], effort: int, seed: int, excluded: int = 0) -> tuple[int, float]:
    """Multi-start local search for a heavy independent set avoiding `excluded` vertices.

    Moves: weight-increasing single insertions and (1,2)-swaps (drop one member,
    insert two compatible vertices of strictly greater total weight).
    Returns (vertex mask, weight); the mask may not be maximal in the full graph.
    """
    n = g.n
    adj = g.adj_bits
    allowed = g.full_mask & ~excluded
    restarts = max(8, n // 16)
    budget = max(1, effort // restarts)
    rng = random.Random(seed)

    def set_weight(mask: int) -> float:
        return sum(weights[v] for v in _bits_to_list(mask))

    best_mask = 0
    best_w = -1.0
    for _ in range(restarts):
        order = [v for v in range(n)]
        rng.shuffle(order)
        mask = 0
        blocked = excluded
        for v in order:
            bit = 1 << v
            if not (blocked & bit):
                mask |= bit
                blocked |= adj[v] | bit
        cur_w = set_weight(mask)
        for _ in range(budget):
            improved = False
            # Single insertions that strictly increase the weight.
            free = allowed & ~mask
            m = free
            while m:
                low = m & -m
                v = low.bit_length() - 1
                m ^= low
                if weights[v] > 1e-15 and adj[v] & mask == 0:
                    mask |= low
                    cur_w += weights[v]
                    improved = True
                    break
            if improved:
                continue
            # (1,2)-swaps.
            for u in _bits_to_list(mask):
                rest = mask ^ (1 << u)
                blocked_rest = 0
                for x in _bits_to_list(rest):
                    blocked_rest |= adj[x]
                cand = allowed & ~rest & ~blocked_rest & ~(1 << u)
                cand_list = _bits_to_list(cand)
                done = False
                for i, a in enumerate(cand_list):
                    for b in cand_list[i + 1:]:
                        if not (adj[a] >> b & 1) and weights[a] + weights[b] > weights[u] + 1e-12:
                            mask = rest | (1 << a) | (1 << b)
                            cur_w += weights[a] + weights[b] - weights[u]
                            done = True
                            break
                    if done:
                        break
                if done:
                    improved = True
                    break
            if not improved:
                break
        if cur_w > best_w:
            best_w = cur_w
            best_mask = mask
    return best_mask, best_w


def price_heuristic(g: Graph, pi, effort: int = 200, seed: int = 0) -> PricingResult:
    """Local-search pricing; never claims optimality. Result column is maximal."""
    w = _check_weights(g, pi)
    mask, _ = heuristic_search(g, w, effort=effort, seed=seed)
    mask = extend_to_maximal(g, mask)
    col = column_from_mask(mask)
    return PricingResult(col, 1.0 - col.weight(w), proven_optimal=False)


def enumerate_all_mis(g: Graph) -> list[Column]:
    """All maximal independent sets via Bron-Kerbosch with pivoting on the complement graph.

    Guarded to n <= 25; output sorted lexicographically by vertex tuple.
    """
    if g.n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to n <= {ENUMERATION_LIMIT}, got n={g.n}")
    n = g.n
    full = g.full_mask
    # Complement adjacency: cliques there are independent sets here.
    comp = [full & ~(g.adj_bits[v] | (1 << v)) for v in range(n)]
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            out.append(r)
            return
        # Pivot: vertex of p|x maximizing |p & comp[u]|.
        pivot = -1
        best = -1
        m = p | x
        while m:
            low = m & -m
            u = low.bit_length() - 1
            m ^= low
            c = bin(p & comp[u]).count("1")
            if c > best:
                best = c
                pivot = u
        cand = p & ~comp[pivot]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            expand(r | low, p & comp[v], x & comp[v])
            p ^= low
            x |= low

    expand(0, full, 0)
    cols = [column_from_mask(m) for m in out]
    cols.sort(key=lambda c: c.vertices)
    return cols
