"""Exhaustive exact solvers used as ground truth for the approximate DPs.

Each oracle enumerates candidate solutions directly from the problem
definition and re-verifies its witness before returning, so they share no
reasoning with the dynamic programs.  Size guards keep the enumeration
tractable: n <= 16 vertices (m <= 20 edges for orientation problems,
n <= 24 for the cost-pruned capacitated-domination search).

Problem conventions:

* max cut: partition V into two sides, maximize crossing edges;
* edge dominating set: fewest edges such that every edge shares an endpoint
  with a chosen one;
* equitable coloring: proper k-coloring; reported objective is the best
  achievable (max class size, min class size) pair, perfectly equitable
  meaning max == min;
* capacitated dominating set: a selected vertex covers itself for free and
  dominates at most capacity(v) non-selected neighbors; minimize total cost
  (unit costs unless the graph carries costs);
* capacitated vertex cover: every edge assigned to a selected endpoint,
  vertex v covering at most capacity(v) edges; minimize cover size;
* bounded degree deletion: fewest deletions so max degree <= target;
* orientation: direct every edge, minimize maximum weighted out-degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any

from .graphs import Graph
from .matching import capacitated_assignment

MAX_N = 16
MAX_M_ORIENT = 20
MAX_N_CDS = 24


@dataclass
class OracleResult:
    optimum: int | None
    witness: Any
    enumerated: int
    # equitable coloring only: best (max class size, min class size)
    ratio_pair: tuple[int, int] | None = None
    feasible: bool = True


def _guard(g: Graph, limit: int = MAX_N) -> None:
    if g.n > limit:
        raise ValueError(f"oracle size guard: n={g.n} exceeds {limit}")


def cut_value(g: Graph, left: set[int]) -> int:
    return sum(w for (u, v), w in g.edges.items() if (u in left) != (v in left))


def oracle_maxcut(g: Graph) -> OracleResult:
    """Best of all 2^(n-1) partitions (vertex 1 pinned to the left side)."""
    _guard(g)
    best = -1
    best_left: set[int] = set()
    count = 0
    edge_items = [(u, v) for (u, v) in g.edges]
    for mask in range(1 << (g.n - 1)):
        count += 1
        left = {1} | {v for v in range(2, g.n + 1) if mask & (1 << (v - 2))}
        val = sum(1 for (u, v) in edge_items if (u in left) != (v in left))
        if val > best:
            best, best_left = val, left
    assert cut_value(g, best_left) == best
    return OracleResult(best, best_left, count)


def is_edge_dominating(g: Graph, chosen: list[tuple[int, int]]) -> bool:
    touched = set()
    for (u, v) in chosen:
        touched.add(u)
        touched.add(v)
    return all(u in touched or v in touched for (u, v) in g.edges)


def oracle_eds(g: Graph) -> OracleResult:
    """Branch on the first undominated edge; every dominator is tried."""
    _guard(g)
    edges = sorted(g.edges)
    if not edges:
        return OracleResult(0, [], 1)
    incident: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        for x in e:
            incident.setdefault(x, []).append(e)
    best: list[list[tuple[int, int]] | None] = [None]
    count = [0]

    def undominated(touched: set[int]):
        for e in edges:
            if e[0] not in touched and e[1] not in touched:
                return e
        return None

    def rec(chosen: list[tuple[int, int]], touched: set[int]):
        count[0] += 1
        if best[0] is not None and len(chosen) >= len(best[0]):
            return
        e = undominated(touched)
        if e is None:
            best[0] = list(chosen)
            return
        candidates = {f for x in e for f in incident[x]}
        for f in sorted(candidates):
            chosen.append(f)
            added = {x for x in f if x not in touched}
            touched |= added
            rec(chosen, touched)
            touched -= added
            chosen.pop()

    rec([], set())
    assert best[0] is not None and is_edge_dominating(g, best[0])
    return OracleResult(len(best[0]), best[0], count[0])


def is_proper_coloring(g: Graph, coloring: dict[int, int]) -> bool:
    return all(coloring[u] != coloring[v] for (u, v) in g.edges)


def ratio_leq(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """a_max/a_min <= b_max/b_min, exact on integer pairs (min 0 = infinite)."""
    return a[0] * b[1] <= b[0] * a[1]


def oracle_eqcolor(g: Graph, k: int) -> OracleResult:
    """Backtracking over proper k-colorings with first-use symmetry breaking.

    Infeasible when no proper k-coloring exists; otherwise reports the best
    achievable (max, min) class-size pair and a witness coloring.
    """
    _guard(g)
    if k < 1:
        raise ValueError("k must be >= 1")
    best_pair: tuple[int, int] | None = None
    best_col: dict[int, int] | None = None
    count = [0]
    coloring: dict[int, int] = {}
    sizes = [0] * (k + 1)

    def rec(v: int, used: int):
        nonlocal best_pair, best_col
        if v > g.n:
            count[0] += 1
            filled = [s for s in sizes[1:k + 1]]
            pair = (max(filled), min(filled))
            if best_pair is None or (not ratio_leq(best_pair, pair)):
                best_pair = pair
                best_col = dict(coloring)
            return
        for c in range(1, min(k, used + 1) + 1):
            if any(coloring.get(u) == c for u in g.adj[v]):
                continue
            coloring[v] = c
            sizes[c] += 1
            rec(v + 1, max(used, c))
            sizes[c] -= 1
            del coloring[v]

    rec(1, 0)
    if best_col is None:
        return OracleResult(None, None, count[0], feasible=False)
    assert is_proper_coloring(g, best_col)
    return OracleResult(None, best_col, count[0], ratio_pair=best_pair)


def cds_assignment(g: Graph, selected: set[int],
                   capacities: list[int]) -> dict[int, int]:
    """Best domination assignment of non-selected vertices to selected ones."""
    outside = sorted(v for v in range(1, g.n + 1) if v not in selected)
    inside = sorted(selected)
    caps = {v: capacities[v] for v in inside}
    return capacitated_assignment(
        outside, inside, caps, lambda u, r: r in g.adj[u])


def oracle_cds(g: Graph, capacities: list[int],
               costs: list[int] | None = None) -> OracleResult:
    """Minimum-cost set dominating every vertex within the capacities.

    Unit costs: smallest feasible size by increasing-size enumeration.
    General costs: depth-first search over vertices in decreasing cost
    order, pruned against the best feasible cost found so far (seeded with
    the always-feasible full selection).
    """
    _guard(g, MAX_N_CDS)
    vertices = list(range(1, g.n + 1))
    count = [0]

    def feasible(sel: set[int]) -> dict[int, int] | None:
        count[0] += 1
        assignment = cds_assignment(g, sel, capacities)
        if len(assignment) == g.n - len(sel):
            return assignment
        return None

    if costs is None:
        for size in range(g.n + 1):
            for combo in combinations(vertices, size):
                sel = set(combo)
                assignment = feasible(sel)
                if assignment is not None:
                    return OracleResult(size, (sorted(sel), assignment), count[0])
        raise AssertionError("full selection is always feasible")

    order = sorted(vertices, key=lambda v: (-costs[v], v))

    # Greedy seed: shrink the (always feasible) full selection, costly first.
    best_sel = set(vertices)
    for v in order:
        trial = best_sel - {v}
        if feasible(trial) is not None:
            best_sel = trial
    best_cost = sum(costs[v] for v in best_sel)
    best_assignment = feasible(best_sel)
    assert best_assignment is not None

    def rec(idx: int, sel: set[int], cost: int):
        nonlocal best_cost, best_sel, best_assignment
        if cost >= best_cost:
            return
        if idx == len(order):
            assignment = feasible(sel)
            if assignment is not None:
                best_cost, best_sel = cost, set(sel)
                best_assignment = assignment
            return
        v = order[idx]
        rec(idx + 1, sel, cost)
        if cost + costs[v] < best_cost:
            sel.add(v)
            rec(idx + 1, sel, cost + costs[v])
            sel.remove(v)

    rec(0, set(), 0)
    return OracleResult(best_cost, (sorted(best_sel), best_assignment), count[0])


def oracle_cvc(g: Graph, capacities: list[int]) -> OracleResult:
    """Smallest vertex cover whose members can absorb all incident edges."""
    _guard(g)
    edges = sorted(g.edges)
    count = 0
    for size in range(g.n + 1):
        for combo in combinations(range(1, g.n + 1), size):
            count += 1
            sel = set(combo)
            if any(u not in sel and v not in sel for (u, v) in edges):
                continue
            caps = {v: capacities[v] for v in sel}
            eid = {e: i for i, e in enumerate(edges)}
            assignment = capacitated_assignment(
                list(range(len(edges))), sorted(sel), caps,
                lambda i, r: r in edges[i])
            if len(assignment) == len(edges):
                return OracleResult(size, (sorted(sel),
                                           {edges[i]: r for i, r in assignment.items()}),
                                    count)
    return OracleResult(None, None, count, feasible=False)


def max_degree_after_deletion(g: Graph, deleted: set[int]) -> int:
    remaining = [v for v in range(1, g.n + 1) if v not in deleted]
    if not remaining:
        return 0
    return max(sum(1 for u in g.adj[v] if u not in deleted) for v in remaining)


def oracle_bdd(g: Graph, max_degree: int) -> OracleResult:
    """Fewest deletions bringing the maximum degree to the target."""
    _guard(g)
    if max_degree < 0:
        raise ValueError("degree target must be nonnegative")
    count = 0
    for size in range(g.n + 1):
        for combo in combinations(range(1, g.n + 1), size):
            count += 1
            deleted = set(combo)
            if max_degree_after_deletion(g, deleted) <= max_degree:
                return OracleResult(size, sorted(deleted), count)
    raise AssertionError("deleting everything always succeeds")


def orientation_max_outdegree(g: Graph, orientation: dict[tuple[int, int], int]) -> int:
    out = [0] * (g.n + 1)
    for (u, v), w in g.edges.items():
        src = orientation[(u, v)]
        out[src] += w
    return max(out)


def oracle_mmo(g: Graph) -> OracleResult:
    """All 2^m orientations; minimizes the maximum weighted out-degree."""
    _guard(g)
    edges = sorted(g.edges)
    if len(edges) > MAX_M_ORIENT:
        raise ValueError(f"oracle size guard: m={len(edges)} exceeds {MAX_M_ORIENT}")
    weights = [g.edges[e] for e in edges]
    best = math.inf
    best_orient: dict[tuple[int, int], int] = {}
    count = 0
    for mask in range(1 << len(edges)):
        count += 1
        out = [0] * (g.n + 1)
        for i, (u, v) in enumerate(edges):
            src = u if mask & (1 << i) else v
            out[src] += weights[i]
        top = max(out)
        if top < best:
            best = top
            best_orient = {e: (e[0] if mask & (1 << i) else e[1])
                           for i, e in enumerate(edges)}
    if not edges:
        return OracleResult(0, {}, 1)
    assert orientation_max_outdegree(g, best_orient) == best
    return OracleResult(int(best), best_orient, count)
