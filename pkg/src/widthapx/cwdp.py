"""Approximate dynamic programming over clique-width expressions.

Five solvers share one scheme: walk the expression bottom-up, keep per-node
tables of partial-solution signatures whose counter coordinates live on the
rounded grid of :mod:`widthapx.rounding`, and replace every addition of
counters by the rounding operator.  Coordinates exceeding the context cap are
dropped with their entries.  Tables are deduplicated by key under a
problem-specific merge rule, and every stored entry remembers where it came
from, so a winning root entry can be traced back to concrete per-vertex
decisions.

Coordinates are stored as int codes (see Rounder): grid exponents with -1
for zero in the rounded modes, plain integers in exact mode, and -2 as the
"whole label class selected" marker used by the edge-dominating-set table.
Exact mode runs the identical table logic with plain integer arithmetic and
no slack in comparisons, which reduces each solver to its classical exact
dynamic program.

Randomness discipline: each produced entry draws from stream ids derived
from (expression node, source entry keys, coordinate), so results are
independent of production order and thread schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .graphs import INTRO, JOIN, RENAME, UNION, CwExpression, Graph
from .matching import capacitated_assignment, max_matching
from .rounding import Rounder, RoundingContext

F_CODE = -2  # "all vertices of this label class are selected"


@dataclass
class SolveStats:
    total_entries: int = 0
    max_entries_per_node: int = 0
    distinct_exponents: int = 0
    lemma_violations: list = field(default_factory=list)

    def observe(self, table_size: int) -> None:
        self.total_entries += table_size
        self.max_entries_per_node = max(self.max_entries_per_node, table_size)


def label_sizes(expr: CwExpression) -> list[tuple[int, ...]]:
    """Per expression node: how many vertices currently carry each label."""
    sizes: list[tuple[int, ...] | None] = [None] * expr.size
    w = expr.w
    for i in expr.postorder():
        nd = expr.nodes[i]
        if nd[0] == INTRO:
            s = [0] * (w + 1)
            s[nd[1]] = 1
        elif nd[0] == UNION:
            s = [a + b for a, b in zip(sizes[nd[1]], sizes[nd[2]])]
        elif nd[0] == RENAME:
            _, c, l1, l2 = nd
            s = list(sizes[c])
            s[l2] += s[l1]
            s[l1] = 0
        else:
            s = list(sizes[nd[1]])
        sizes[i] = tuple(s)
    return sizes


def _put_max(table: dict, key: tuple, metric, prov) -> None:
    cur = table.get(key)
    if cur is None or metric > cur[0]:
        table[key] = (metric, prov)


def _put_min(table: dict, key: tuple, metric, prov) -> None:
    cur = table.get(key)
    if cur is None or metric < cur[0]:
        table[key] = (metric, prov)


def _put_first(table: dict, key: tuple, metric, prov) -> None:
    if key not in table:
        table[key] = (metric, prov)


def traceback(tables: list[dict], expr: CwExpression,
              root_key: tuple) -> tuple[dict[int, Any], dict[int, Any]]:
    """Follow provenance links from a root entry down to introduce decisions.

    Returns (vertex -> decision datum, expression node -> local choice datum).
    """
    decisions: dict[int, Any] = {}
    choices: dict[int, Any] = {}
    stack = [(expr.root, root_key)]
    while stack:
        node, key = stack.pop()
        entry = tables[node].get(key)
        if entry is None:
            raise RuntimeError(f"broken provenance at node {node}")
        prov = entry[1]
        kind = prov[0]
        nd = expr.nodes[node]
        if kind == "intro":
            decisions[nd[2]] = prov[1]
        elif kind == "one":
            if prov[2] is not None:
                choices[node] = prov[2]
            stack.append((nd[1], prov[1]))
        else:  # "two"
            stack.append((nd[1], prov[1]))
            stack.append((nd[2], prov[2]))
    return decisions, choices


# ---------------------------------------------------------------------------
# Max cut
# ---------------------------------------------------------------------------


@dataclass
class MaxcutResult:
    value: int
    partition: dict[int, str]
    claimed: float
    stats: SolveStats


def solve_maxcut_cw(expr: CwExpression, g: Graph, ctx: RoundingContext) -> MaxcutResult:
    """Partition signature: per label, rounded counts on each side of the cut.

    Introduce seeds both side choices exactly; union and rename merge counts
    with rounding addition; a join adds the number of new crossing edges
    (left-of-one-class times right-of-the-other, both ways) onto the rounded
    cut counter.  The reported value is the true cut of the traced partition
    recomputed on the graph, never the rounded table objective.
    """
    r = Rounder(ctx)
    w = expr.w
    zero = r.zero()
    tables: list[dict | None] = [None] * expr.size
    stats = SolveStats()
    for i in expr.postorder():
        nd = expr.nodes[i]
        table: dict = {}
        if nd[0] == INTRO:
            lab = nd[1]
            one = r.enter(1, (i, "one"))
            left = [zero] * (2 * w)
            left[lab - 1] = one
            _put_max(table, tuple(left), zero, ("intro", "L"))
            right = [zero] * (2 * w)
            right[w + lab - 1] = one
            _put_max(table, tuple(right), zero, ("intro", "R"))
        elif nd[0] == UNION:
            ta = tables[nd[1]]
            tb = tables[nd[2]]
            cap = r.over_cap
            add = r.add
            for ka, (ca, _) in sorted(ta.items()):
                for kb, (cb, _) in tb.items():
                    key = tuple(add(xa, xb, (i, ka, kb, t))
                                for t, (xa, xb) in enumerate(zip(ka, kb)))
                    if any(map(cap, key)):
                        continue
                    c = add(ca, cb, (i, ka, kb, -1))
                    if cap(c):
                        continue
                    _put_max(table, key, c, ("two", ka, kb))
        elif nd[0] == RENAME:
            _, child, l1, l2 = nd
            for k, (c, _) in sorted(tables[child].items()):
                key = list(k)
                key[l2 - 1] = r.add(k[l1 - 1], k[l2 - 1], (i, k, 0))
                key[l1 - 1] = zero
                key[w + l2 - 1] = r.add(k[w + l1 - 1], k[w + l2 - 1], (i, k, 1))
                key[w + l1 - 1] = zero
                if r.over_cap(key[l2 - 1]) or r.over_cap(key[w + l2 - 1]):
                    continue
                _put_max(table, tuple(key), c, ("one", k, None))
        else:  # join
            _, child, l1, l2 = nd
            for k, (c, _) in sorted(tables[child].items()):
                term = (r.real(k[l1 - 1]) * r.real(k[w + l2 - 1])
                        + r.real(k[l2 - 1]) * r.real(k[w + l1 - 1]))
                c2 = r.add_real(c, term, (i, k, -1))
                if r.over_cap(c2):
                    continue
                _put_max(table, k, c2, ("one", k, None))
        tables[i] = table
        stats.observe(len(table))
    root_table = tables[expr.root]
    if not root_table:
        raise RuntimeError("empty root table; max cut always has entries")
    best_key = None
    best_c = None
    for k, (c, _) in sorted(root_table.items()):
        if best_c is None or c > best_c:
            best_key, best_c = k, c
    decisions, _ = traceback(tables, expr, best_key)
    partition = {v: decisions[v] for v in range(1, g.n + 1)}
    left = {v for v, side in partition.items() if side == "L"}
    true_value = sum(1 for (u, v) in g.edges if (u in left) != (v in left))
    stats.distinct_exponents = len(r.exponents_used)
    stats.lemma_violations = r.lemma_violations
    return MaxcutResult(true_value, partition, r.real(best_c), stats)


# ---------------------------------------------------------------------------
# Edge dominating set
# ---------------------------------------------------------------------------


@dataclass
class EdsResult:
    edges: list[tuple[int, int]]
    selected: list[int]
    claimed: float
    stats: SolveStats


def _sel_merge(r: Rounder, a: int, b: int, size_a: int, size_b: int, sid) -> int:
    """Merge two selected-count coordinates, keeping the full marker exact."""
    full_a = a == F_CODE or size_a == 0
    full_b = b == F_CODE or size_b == 0
    if full_a and full_b:
        return F_CODE
    va = float(size_a) if a == F_CODE else r.real(a)
    vb = float(size_b) if b == F_CODE else r.real(b)
    if va + vb == 0.0:
        return r.zero()
    if r.exact:
        return int(va + vb)
    return r._round_sum(va + vb, sid)


def _sel_value(r: Rounder, a: int, size: int) -> float:
    return float(size) if a == F_CODE else r.real(a)


def solve_eds_cw(expr: CwExpression, g: Graph, ctx: RoundingContext) -> EdsResult:
    """Vertex-cover-with-matching formulation of edge dominating set.

    Per label: how many vertices are selected (marker -2 when the whole
    class is) and how many selected ones are already matched.  A join
    requires one side fully selected and guesses how many of its edges the
    matching uses.  The traced vertex set is completed into an edge set by a
    maximum matching plus one incident edge per unmatched selected vertex.
    """
    r = Rounder(ctx)
    w = expr.w
    zero = r.zero()
    sizes = label_sizes(expr)
    tables: list[dict | None] = [None] * expr.size
    stats = SolveStats()
    slack = 1.0 if r.exact else (1.0 + ctx.epsilon) * (1.0 + ctx.delta) ** 2
    for i in expr.postorder():
        nd = expr.nodes[i]
        table: dict = {}
        if nd[0] == INTRO:
            lab = nd[1]
            base = [zero] * (2 * w)
            sel = list(base)
            sel[lab - 1] = F_CODE
            _put_first(table, tuple(sel), 0, ("intro", True))
            _put_first(table, tuple(base), 0, ("intro", False))
        elif nd[0] == UNION:
            a, b = nd[1], nd[2]
            sa, sb = sizes[a], sizes[b]
            for ka, _ in sorted(tables[a].items()):
                for kb, _ in tables[b].items():
                    key = []
                    ok = True
                    for l in range(w):
                        s = _sel_merge(r, ka[l], kb[l], sa[l + 1], sb[l + 1],
                                       (i, ka, kb, l))
                        if s != F_CODE and r.over_cap(s):
                            ok = False
                            break
                        key.append(s)
                    if not ok:
                        continue
                    for l in range(w):
                        c = r.add(ka[w + l], kb[w + l], (i, ka, kb, w + l))
                        if r.over_cap(c):
                            ok = False
                            break
                        key.append(c)
                    if ok:
                        _put_first(table, tuple(key), 0, ("two", ka, kb))
        elif nd[0] == RENAME:
            _, child, l1, l2 = nd
            sc = sizes[child]
            for k, _ in sorted(tables[child].items()):
                key = list(k)
                key[l2 - 1] = _sel_merge(r, k[l1 - 1], k[l2 - 1],
                                         sc[l1], sc[l2], (i, k, 0))
                key[l1 - 1] = zero
                key[w + l2 - 1] = r.add(k[w + l1 - 1], k[w + l2 - 1], (i, k, 1))
                key[w + l1 - 1] = zero
                if key[l2 - 1] != F_CODE and r.over_cap(key[l2 - 1]):
                    continue
                if r.over_cap(key[w + l2 - 1]):
                    continue
                _put_first(table, tuple(key), 0, ("one", k, None))
        else:  # join
            _, child, l1, l2 = nd
            sz1, sz2 = sizes[i][l1], sizes[i][l2]
            for k, _ in sorted(tables[child].items()):
                s1, s2 = k[l1 - 1], k[l2 - 1]
                if s1 != F_CODE and s2 != F_CODE:
                    continue  # uncovered join edges: not a vertex cover
                c1v = r.real(k[w + l1 - 1])
                c2v = r.real(k[w + l2 - 1])
                b1 = slack * _sel_value(r, s1, sz1)
                b2 = slack * _sel_value(r, s2, sz2)
                for m in range(min(sz1, sz2) + 1):
                    if m and (c1v + m > b1 or c2v + m > b2):
                        break
                    cm1 = r.add_real(k[w + l1 - 1], m, (i, k, m, 0))
                    cm2 = r.add_real(k[w + l2 - 1], m, (i, k, m, 1))
                    if _drop_vs_sel(r, cm1, s1, sz1) or _drop_vs_sel(r, cm2, s2, sz2):
                        continue
                    key = list(k)
                    key[w + l1 - 1] = cm1
                    key[w + l2 - 1] = cm2
                    _put_first(table, tuple(key), 0, ("one", k, m))
        tables[i] = table
        stats.observe(len(table))

    szr = sizes[expr.root]
    best_key = None
    best_sum = None
    for k, _ in sorted(tables[expr.root].items()):
        if not all(_meets_vs_sel(r, k[w + l], k[l], szr[l + 1]) for l in range(w)):
            continue
        total = sum(_sel_value(r, k[l], szr[l + 1]) for l in range(w))
        if best_sum is None or total < best_sum - 1e-12:
            best_key, best_sum = k, total
    if best_key is None:
        raise RuntimeError("no feasible root entry; nonempty graphs always have one")
    decisions, _ = traceback(tables, expr, best_key)
    selected = sorted(v for v, sel in decisions.items() if sel)
    sel_set = set(selected)
    inside = [(u, v) for (u, v) in g.edges if u in sel_set and v in sel_set]
    matched = max_matching(inside) if inside else []
    covered = {x for e in matched for x in e}
    chosen = list(matched)
    for v in selected:
        if v in covered:
            continue
        out = sorted(u for u in g.adj[v] if u not in sel_set)
        if out:
            chosen.append((min(v, out[0]), max(v, out[0])))
            covered.add(v)
        elif g.adj[v]:
            u = min(g.adj[v])
            chosen.append((min(u, v), max(u, v)))
            covered.add(v)
    chosen = sorted(set(chosen))
    stats.distinct_exponents = len(r.exponents_used)
    stats.lemma_violations = r.lemma_violations
    return EdsResult(chosen, selected, best_sum, stats)


def _drop_vs_sel(r: Rounder, c: int, s: int, size: int) -> bool:
    """Matched count clearly above (1+eps) times the selected count?"""
    if s == F_CODE:
        return r.exceeds_slack_int(c, size)
    return r.exceeds_slack(c, s)


def _meets_vs_sel(r: Rounder, c: int, s: int, size: int) -> bool:
    """Matched count at least selected/(1+eps)?"""
    if s == F_CODE:
        return r.meets_floor_slack_int(c, size)
    return r.meets_floor_slack(c, s)


# ---------------------------------------------------------------------------
# Equitable coloring
# ---------------------------------------------------------------------------


@dataclass
class EqcolorResult:
    feasible: bool
    coloring: dict[int, int] | None
    class_sizes: list[int] | None
    claimed_ratio: float | None
    stats: SolveStats


def solve_eqcolor_cw(expr: CwExpression, g: Graph, k: int,
                     ctx: RoundingContext) -> EqcolorResult:
    """Signature: rounded count of each color inside each label class.

    Joins reject any entry using the same color in both joined classes,
    which is decided exactly because zero is stored exactly; therefore
    traced colorings are always proper.  Selection minimizes the ratio of
    the largest to the smallest rounded class total.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    r = Rounder(ctx)
    w = expr.w
    zero = r.zero()
    tables: list[dict | None] = [None] * expr.size
    stats = SolveStats()
    for i in expr.postorder():
        nd = expr.nodes[i]
        table: dict = {}
        if nd[0] == INTRO:
            lab = nd[1]
            one = r.enter(1, (i, "one"))
            for q in range(k):
                key = [zero] * (w * k)
                key[(lab - 1) * k + q] = one
                _put_first(table, tuple(key), 0, ("intro", q + 1))
        elif nd[0] == UNION:
            a, b = nd[1], nd[2]
            for ka, _ in sorted(tables[a].items()):
                for kb, _ in tables[b].items():
                    key = tuple(r.add(xa, xb, (i, ka, kb, t))
                                for t, (xa, xb) in enumerate(zip(ka, kb)))
                    if any(map(r.over_cap, key)):
                        continue
                    _put_first(table, key, 0, ("two", ka, kb))
        elif nd[0] == RENAME:
            _, child, l1, l2 = nd
            for kk, _ in sorted(tables[child].items()):
                key = list(kk)
                ok = True
                for q in range(k):
                    key[(l2 - 1) * k + q] = r.add(kk[(l1 - 1) * k + q],
                                                  kk[(l2 - 1) * k + q], (i, kk, q))
                    key[(l1 - 1) * k + q] = zero
                    if r.over_cap(key[(l2 - 1) * k + q]):
                        ok = False
                        break
                if ok:
                    _put_first(table, tuple(key), 0, ("one", kk, None))
        else:  # join: same color on both sides would create a bad edge
            _, child, l1, l2 = nd
            for kk, _ in sorted(tables[child].items()):
                conflict = any(
                    not r.is_zero(kk[(l1 - 1) * k + q])
                    and not r.is_zero(kk[(l2 - 1) * k + q])
                    for q in range(k))
                if not conflict:
                    _put_first(table, kk, 0, ("one", kk, None))
        tables[i] = table
        stats.observe(len(table))

    stats.distinct_exponents = len(r.exponents_used)
    stats.lemma_violations = r.lemma_violations
    root_table = tables[expr.root]
    if not root_table:
        return EqcolorResult(False, None, None, None, stats)
    best_key = None
    best_ratio = None
    for kk in sorted(root_table):
        totals = [sum(r.real(kk[l * k + q]) for l in range(w)) for q in range(k)]
        low, high = min(totals), max(totals)
        ratio = math.inf if low == 0.0 else high / low
        if best_ratio is None or ratio < best_ratio - 1e-12:
            best_key, best_ratio = kk, ratio
    decisions, _ = traceback(tables, expr, best_key)
    coloring = {v: decisions[v] for v in range(1, g.n + 1)}
    assert all(coloring[u] != coloring[v] for (u, v) in g.edges), \
        "traced coloring must be proper"
    class_sizes = [sum(1 for c in coloring.values() if c == q + 1) for q in range(k)]
    return EqcolorResult(True, coloring, class_sizes, best_ratio, stats)


# ---------------------------------------------------------------------------
# Capacitated dominating set
# ---------------------------------------------------------------------------


@dataclass
class CdsResult:
    selected: list[int]
    assignment: dict[int, int]
    undominated: int
    size: int
    stats: SolveStats


def solve_cds_cw(expr: CwExpression, g: Graph, capacities: list[int],
                 ctx: RoundingContext) -> CdsResult:
    """Per label: rounded total capacity, used capacity, dominated count.

    A join guesses, for both directions, how many cross edges carry
    dominations; entries whose used capacity clearly exceeds the available
    one (or whose dominated count exceeds the class size) are dropped.  The
    traced selection is realized as a true assignment by capacity matching,
    so reported dominations never violate real capacities.

    Exact mode additionally keys each entry by the per-label count of
    non-selected vertices still awaiting domination and bounds the join
    guesses by it, which removes the double-counted dominations the rounded
    table tolerates and reduces the program to the classical exact DP.
    """
    r = Rounder(ctx)
    w = expr.w
    zero = r.zero()
    sizes = label_sizes(expr)
    tables: list[dict | None] = [None] * expr.size
    stats = SolveStats()
    margin = 1.0 if r.exact else (1.0 + ctx.epsilon) * (1.0 + ctx.delta) ** 2
    blocks = 4 if r.exact else 3  # exact mode appends the waiting block
    for i in expr.postorder():
        nd = expr.nodes[i]
        table: dict = {}
        if nd[0] == INTRO:
            lab = nd[1]
            base = [zero] * (blocks * w)
            sel = list(base)
            sel[lab - 1] = r.enter(capacities[nd[2]], (i, "cap"))
            if not r.over_cap(sel[lab - 1]):
                _put_min(table, tuple(sel), 1, ("intro", True))
            unsel = list(base)
            if r.exact:
                unsel[3 * w + lab - 1] = 1
            _put_min(table, tuple(unsel), 0, ("intro", False))
        elif nd[0] == UNION:
            a, b = nd[1], nd[2]
            for ka, (c1, _) in sorted(tables[a].items()):
                for kb, (c2, _) in tables[b].items():
                    key = tuple(r.add(xa, xb, (i, ka, kb, t))
                                for t, (xa, xb) in enumerate(zip(ka, kb)))
                    if any(map(r.over_cap, key)):
                        continue
                    _put_min(table, key, c1 + c2, ("two", ka, kb))
        elif nd[0] == RENAME:
            _, child, l1, l2 = nd
            for kk, (c, _) in sorted(tables[child].items()):
                key = list(kk)
                ok = True
                for blk in range(blocks):
                    key[blk * w + l2 - 1] = r.add(kk[blk * w + l1 - 1],
                                                  kk[blk * w + l2 - 1], (i, kk, blk))
                    key[blk * w + l1 - 1] = zero
                    if r.over_cap(key[blk * w + l2 - 1]):
                        ok = False
                        break
                if ok:
                    _put_min(table, tuple(key), c, ("one", kk, None))
        else:  # join: m1 = dominations into class l2, m2 into class l1
            _, child, l1, l2 = nd
            sz1, sz2 = sizes[i][l1], sizes[i][l2]
            for kk, (c, _) in sorted(tables[child].items()):
                a1, a2 = kk[l1 - 1], kk[l2 - 1]
                u1v, u2v = r.real(kk[w + l1 - 1]), r.real(kk[w + l2 - 1])
                d1v, d2v = r.real(kk[2 * w + l1 - 1]), r.real(kk[2 * w + l2 - 1])
                a1bound = margin * r.real(a1)
                a2bound = margin * r.real(a2)
                if r.exact:
                    top1 = kk[3 * w + l2 - 1]  # waiting targets with label l2
                    top2 = kk[3 * w + l1 - 1]
                else:
                    top1, top2 = sz2, sz1
                for m1 in range(top1 + 1):
                    if m1 and (u1v + m1 > a1bound or d2v + m1 > margin * sz2):
                        break
                    u1 = r.add_real(kk[w + l1 - 1], m1, (i, kk, m1, 0))
                    d2 = r.add_real(kk[2 * w + l2 - 1], m1, (i, kk, m1, 1))
                    if r.exceeds_slack(u1, a1) or r.exceeds_slack_int(d2, sz2):
                        continue
                    for m2 in range(top2 + 1):
                        if m2 and (u2v + m2 > a2bound or d1v + m2 > margin * sz1):
                            break
                        u2 = r.add_real(kk[w + l2 - 1], m2, (i, kk, m1, m2, 2))
                        d1 = r.add_real(kk[2 * w + l1 - 1], m2, (i, kk, m1, m2, 3))
                        if r.exceeds_slack(u2, a2) or r.exceeds_slack_int(d1, sz1):
                            continue
                        key = list(kk)
                        key[w + l1 - 1] = u1
                        key[w + l2 - 1] = u2
                        key[2 * w + l1 - 1] = d1
                        key[2 * w + l2 - 1] = d2
                        if r.exact:
                            key[3 * w + l2 - 1] -= m1
                            key[3 * w + l1 - 1] -= m2
                        _put_min(table, tuple(key), c, ("one", kk, (m1, m2)))
        tables[i] = table
        stats.observe(len(table))

    stats.distinct_exponents = len(r.exponents_used)
    stats.lemma_violations = r.lemma_violations
    root_table = tables[expr.root]

    def realize(key) -> tuple[list[int], dict[int, int]]:
        decisions, _ = traceback(tables, expr, key)
        selected = sorted(v for v, sel in decisions.items() if sel)
        outside = [v for v in range(1, g.n + 1) if v not in set(selected)]
        caps = {v: capacities[v] for v in selected}
        assignment = capacitated_assignment(
            outside, selected, caps, lambda u, x: x in g.adj[u])
        return selected, assignment

    if r.exact:
        best_key = None
        best_c = None
        for key, (c, _) in sorted(root_table.items()):
            if any(key[3 * w + l] for l in range(w)):
                continue  # some vertex still waiting: not fully dominating
            if best_c is None or c < best_c:
                best_key, best_c = key, c
        if best_key is None:
            raise RuntimeError("the full selection is always a root entry")
        selected, assignment = realize(best_key)
        assert len(assignment) == g.n - len(selected), \
            "exact-mode winner must realize a full domination"
        return CdsResult(selected, assignment, 0, best_c, stats)

    best_key = None
    best_c = None
    n = g.n
    for key, (c, _) in sorted(root_table.items()):
        total_d = sum(r.real(key[2 * w + l]) for l in range(w))
        if total_d < (n - c) / (1.0 + ctx.epsilon) - 1e-9:
            continue
        if best_c is None or c < best_c:
            best_key, best_c = key, c
    if best_key is None:
        # fall back to the best-covered entry and report the shortfall
        best_key = max(sorted(root_table),
                       key=lambda kk: sum(r.real(kk[2 * w + l]) for l in range(w)))
        best_c = root_table[best_key][0]
    selected, assignment = realize(best_key)
    undominated = g.n - len(selected) - len(assignment)
    return CdsResult(selected, assignment, undominated, best_c, stats)


# ---------------------------------------------------------------------------
# Bounded degree deletion
# ---------------------------------------------------------------------------


@dataclass
class BddResult:
    deleted: list[int]
    achieved_degree: int
    size: int
    stats: SolveStats


def solve_bdd_cw(expr: CwExpression, g: Graph, max_degree: int,
                 ctx: RoundingContext) -> BddResult:
    """Per label: rounded count of kept vertices and their max degree so far.

    A join raises each side's max degree by the other side's kept count;
    entries whose rounded degree clearly exceeds (1+eps) times the target
    are dropped.  Labels with no kept vertices keep a zero degree.
    """
    if max_degree < 0:
        raise ValueError("degree target must be nonnegative")
    r = Rounder(ctx)
    w = expr.w
    zero = r.zero()
    tables: list[dict | None] = [None] * expr.size
    stats = SolveStats()
    for i in expr.postorder():
        nd = expr.nodes[i]
        table: dict = {}
        if nd[0] == INTRO:
            lab = nd[1]
            base = [zero] * (2 * w)
            kept = list(base)
            kept[lab - 1] = r.enter(1, (i, "one"))
            _put_min(table, tuple(kept), 0, ("intro", False))
            _put_min(table, tuple(base), 1, ("intro", True))
        elif nd[0] == UNION:
            a, b = nd[1], nd[2]
            for ka, (c1, _) in sorted(tables[a].items()):
                for kb, (c2, _) in tables[b].items():
                    key = []
                    ok = True
                    for l in range(w):
                        q = r.add(ka[l], kb[l], (i, ka, kb, l))
                        if r.over_cap(q):
                            ok = False
                            break
                        key.append(q)
                    if not ok:
                        continue
                    key.extend(max(ka[w + l], kb[w + l]) for l in range(w))
                    _put_min(table, tuple(key), c1 + c2, ("two", ka, kb))
        elif nd[0] == RENAME:
            _, child, l1, l2 = nd
            for kk, (c, _) in sorted(tables[child].items()):
                key = list(kk)
                key[l2 - 1] = r.add(kk[l1 - 1], kk[l2 - 1], (i, kk, 0))
                key[l1 - 1] = zero
                key[w + l2 - 1] = max(kk[w + l1 - 1], kk[w + l2 - 1])
                key[w + l1 - 1] = zero
                if r.over_cap(key[l2 - 1]):
                    continue
                _put_min(table, tuple(key), c, ("one", kk, None))
        else:  # join
            _, child, l1, l2 = nd
            for kk, (c, _) in sorted(tables[child].items()):
                key = list(kk)
                ok = True
                for la, lb, t in ((l1, l2, 0), (l2, l1, 1)):
                    if r.is_zero(kk[la - 1]):
                        continue  # no kept vertices: degree stays zero
                    gnew = r.add(kk[w + la - 1], kk[lb - 1], (i, kk, t))
                    if r.exceeds_slack_int(gnew, max_degree):
                        ok = False
                        break
                    key[w + la - 1] = gnew
                if ok:
                    _put_min(table, tuple(key), c, ("one", kk, None))
        tables[i] = table
        stats.observe(len(table))

    stats.distinct_exponents = len(r.exponents_used)
    stats.lemma_violations = r.lemma_violations
    root_table = tables[expr.root]
    if not root_table:
        raise RuntimeError("empty root table; deleting everything is feasible")
    best_key = None
    best_c = None
    for key, (c, _) in sorted(root_table.items()):
        if best_c is None or c < best_c:
            best_key, best_c = key, c
    decisions, _ = traceback(tables, expr, best_key)
    deleted = sorted(v for v, d in decisions.items() if d)
    dset = set(deleted)
    remaining = [v for v in range(1, g.n + 1) if v not in dset]
    achieved = max((sum(1 for u in g.adj[v] if u not in dset) for v in remaining),
                   default=0)
    limit = max_degree if r.exact else (1.0 + ctx.epsilon) * max_degree
    assert achieved <= limit + 1e-9, \
        f"residual degree {achieved} above {limit}"
    return BddResult(deleted, achieved, best_c, stats)
