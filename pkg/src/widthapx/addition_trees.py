"""Addition trees: exact and randomized-rounded evaluation with instrumentation.

An addition tree is a full rooted binary tree whose leaves carry nonnegative
integer inputs and whose internal nodes sum their children.  The approximate
variant replaces every internal addition with the rounding operator from
:mod:`widthapx.rounding`, so each internal node stores a power of (1+delta)
while leaves keep their exact inputs.

For a node v with exact value y_v > 0 and rounded value z_v the (signed)
error is lam_v = log_{1+delta}(z_v / y_v): the number of grid intervals the
approximation is off by.  Two per-step inequalities tie consecutive errors
together and are checked on every instrumented evaluation:

* operand lower bound: when one operand is itself a grid value, the other
  operand is at least (delta * p / 2) times it, where p is the probability of
  rounding the step up;
* self-correction: before rounding, combining two values whose errors differ
  shrinks the maximum absolute error by at least (delta * p / 20) times the
  error gap, provided both errors are below 1/(4*delta) and the
  larger-error operand is a grid value.

Both fail only on implementation bugs, never statistically, which makes them
useful evaluation-time assertions.  The module also measures the "balanced
height" of a tree (grows only when two subtrees of equal measure meet; at most
log2 of the node count) and runs repeated-trial simulations summarizing how
the maximum error concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .rounding import (
    EXACT,
    ApproxValue,
    RandomStream,
    RoundingContext,
    oplus,
)

LEAF = "leaf"
ADD = "add"


@dataclass
class AdditionTree:
    """Full rooted binary tree; nodes are ("leaf", x) or ("add", c1, c2)."""

    nodes: list[tuple]
    root: int

    def __post_init__(self):
        self.validate()

    @property
    def size(self) -> int:
        return len(self.nodes)

    def leaves(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if nd[0] == LEAF]

    def validate(self) -> None:
        n = len(self.nodes)
        if not (0 <= self.root < n):
            raise ValueError("root index out of range")
        parent_count = [0] * n
        for i, nd in enumerate(self.nodes):
            if nd[0] == LEAF:
                if len(nd) != 2 or not isinstance(nd[1], int) or nd[1] < 0:
                    raise ValueError(f"node {i}: leaf needs one nonnegative integer input")
            elif nd[0] == ADD:
                if len(nd) != 3:
                    raise ValueError(f"node {i}: internal node needs exactly two children")
                for c in nd[1:]:
                    if not (0 <= c < n):
                        raise ValueError(f"node {i}: child {c} out of range")
                    parent_count[c] += 1
            else:
                raise ValueError(f"node {i}: unknown kind {nd[0]!r}")
        if parent_count[self.root] != 0:
            raise ValueError("root must not have a parent")
        orphans = [i for i in range(n) if i != self.root and parent_count[i] != 1]
        if orphans:
            raise ValueError(f"nodes {orphans[:5]} must have exactly one parent")
        if len(self.postorder()) != n:
            raise ValueError("tree must be connected and acyclic")

    def postorder(self) -> list[int]:
        """Node indices with children strictly before parents."""
        order = []
        stack = [(self.root, False)]
        seen = set()
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node in seen:
                raise ValueError("cycle detected in tree")
            seen.add(node)
            nd = self.nodes[node]
            stack.append((node, True))
            if nd[0] == ADD:
                stack.append((nd[1], False))
                stack.append((nd[2], False))
        return order

    def depths(self) -> list[int]:
        """Depth of each node below the root (root = 0)."""
        d = [0] * len(self.nodes)
        for node in reversed(self.postorder()):
            nd = self.nodes[node]
            if nd[0] == ADD:
                d[nd[1]] = d[node] + 1
                d[nd[2]] = d[node] + 1
        return d

    def heights(self) -> list[int]:
        """Height of the subtree rooted at each node (leaf = 0)."""
        h = [0] * len(self.nodes)
        for node in self.postorder():
            nd = self.nodes[node]
            if nd[0] == ADD:
                h[node] = 1 + max(h[nd[1]], h[nd[2]])
        return h


def parse_tree(text: str) -> AdditionTree:
    """Parse the line format: `at N`, node lines, final `root ID`."""
    ids: dict[int, tuple] = {}
    declared = None
    root_id = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "at":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: header must be 'at <numNodes>'")
            declared = int(parts[1])
        elif parts[0] == "root":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: root line must be 'root <id>'")
            root_id = int(parts[1])
        else:
            nid = int(parts[0])
            if nid in ids:
                raise ValueError(f"line {lineno}: duplicate node id {nid}")
            if parts[1] == LEAF and len(parts) == 3:
                ids[nid] = (LEAF, int(parts[2]))
            elif parts[1] == ADD and len(parts) == 4:
                ids[nid] = (ADD, int(parts[2]), int(parts[3]))
            else:
                raise ValueError(f"line {lineno}: expected '<id> leaf <x>' or '<id> add <c1> <c2>'")
    if declared is None or root_id is None:
        raise ValueError("missing 'at' header or 'root' line")
    if declared != len(ids):
        raise ValueError(f"header declares {declared} nodes, found {len(ids)}")
    if root_id not in ids:
        raise ValueError(f"root id {root_id} is not a node")
    index = {nid: i for i, nid in enumerate(sorted(ids))}
    nodes: list[tuple] = []
    for nid in sorted(ids):
        nd = ids[nid]
        if nd[0] == LEAF:
            nodes.append(nd)
        else:
            for c in nd[1:]:
                if c not in index:
                    raise ValueError(f"node {nid}: unknown child id {c}")
            nodes.append((ADD, index[nd[1]], index[nd[2]]))
    return AdditionTree(nodes, index[root_id])


def render_tree(tree: AdditionTree) -> str:
    lines = [f"at {tree.size}"]
    for i, nd in enumerate(tree.nodes):
        if nd[0] == LEAF:
            lines.append(f"{i} leaf {nd[1]}")
        else:
            lines.append(f"{i} add {nd[1]} {nd[2]}")
    lines.append(f"root {tree.root}")
    return "\n".join(lines) + "\n"


def evaluate_exact(tree: AdditionTree) -> list[int]:
    """Exact bottom-up sums y_v for every node."""
    y = [0] * tree.size
    for node in tree.postorder():
        nd = tree.nodes[node]
        if nd[0] == LEAF:
            y[node] = nd[1]
        else:
            y[node] = y[nd[1]] + y[nd[2]]
    return y


@dataclass
class StepRecord:
    """Snapshot of one internal rounding step."""

    node: int
    a: float          # pre-rounding sum of the children's stored values
    p: float          # probability of rounding up at this step
    lam1: float | None
    lam2: float | None
    z1: float
    z2: float
    y1: int
    y2: int


@dataclass
class TreeEvaluation:
    """Exact and rounded values of one evaluation, plus per-step records."""

    tree: AdditionTree
    ctx: RoundingContext
    exact: list[int]
    approx: list[float]
    exponents: list[int | None]
    errors: list[float | None]
    records: list[StepRecord]

    def approx_value(self, node: int) -> ApproxValue | int:
        """Grid value of an internal node, or the exact input of a leaf."""
        j = self.exponents[node]
        if j is None and self.exact[node] == 0:
            return ApproxValue(None)
        if j is None:
            return self.tree.nodes[node][1]
        return ApproxValue(j)

    @property
    def max_abs_error(self) -> float:
        vals = [abs(l) for l in self.errors if l is not None]
        return max(vals) if vals else 0.0

    @property
    def max_ratio(self) -> float:
        return (1.0 + self.ctx.delta) ** self.max_abs_error


def evaluate(tree: AdditionTree, ctx: RoundingContext,
             stream: RandomStream | None = None) -> TreeEvaluation:
    """Rounded bottom-up evaluation; leaves keep their exact inputs.

    Each internal node consumes at most one draw from a substream derived
    from the node index, so the result does not depend on traversal order.
    Exact values are computed alongside to expose the per-node errors.
    """
    if ctx.mode == EXACT:
        raise ValueError("use evaluate_exact for exact mode")
    if stream is None:
        stream = ctx.root_stream()
    y = evaluate_exact(tree)
    ln1pd = ctx.ln1pd
    z = [0.0] * tree.size
    exps: list[int | None] = [None] * tree.size
    lams: list[float | None] = [None] * tree.size
    records: list[StepRecord] = []
    for node in tree.postorder():
        nd = tree.nodes[node]
        if nd[0] == LEAF:
            z[node] = float(nd[1])
            if nd[1] > 0:
                lams[node] = 0.0
            continue
        c1, c2 = nd[1], nd[2]
        a = z[c1] + z[c2]
        if a == 0.0:
            z[node] = 0.0
            records.append(StepRecord(node, 0.0, 0.0, lams[c1], lams[c2],
                                      z[c1], z[c2], y[c1], y[c2]))
            continue
        L = ctx._snapped_log(a)
        p = L - math.floor(L)
        res = oplus(z[c1], z[c2], ctx, stream.substream("node", node))
        j = res.exponent
        exps[node] = j
        z[node] = (1.0 + ctx.delta) ** j
        lams[node] = j - math.log(y[node]) / ln1pd
        records.append(StepRecord(node, a, p, lams[c1], lams[c2],
                                  z[c1], z[c2], y[c1], y[c2]))
    return TreeEvaluation(tree, ctx, y, z, exps, lams, records)


def balanced_height(tree: AdditionTree) -> list[int]:
    """Balanced height per node: 0 at leaves, +1 only when children tie."""
    bh = [0] * tree.size
    for node in tree.postorder():
        nd = tree.nodes[node]
        if nd[0] == ADD:
            b1, b2 = bh[nd[1]], bh[nd[2]]
            bh[node] = b1 + 1 if b1 == b2 else max(b1, b2)
    return bh


def error_profile(ev: TreeEvaluation) -> dict:
    """Summary of the error map: per-node lambdas and their extremes."""
    lams = {i: l for i, l in enumerate(ev.errors) if l is not None}
    max_abs = max((abs(l) for l in lams.values()), default=0.0)
    return {
        "lambda": lams,
        "max_abs_error": max_abs,
        "max_ratio": (1.0 + ev.ctx.delta) ** max_abs,
    }


def _is_grid(value: float, ctx: RoundingContext) -> bool:
    """True when value is zero or (numerically) an exact power of 1+delta."""
    if value == 0.0:
        return True
    L = math.log(value) / ctx.ln1pd
    return abs(L - round(L)) < ctx.snap_tolerance


@dataclass
class StepViolation:
    lemma: str
    node: int
    detail: dict


def check_step_lemmas(ev: TreeEvaluation, tol: float = 1e-9) -> list[StepViolation]:
    """Check the operand-lower-bound and self-correction inequalities.

    Each inequality is asserted only where its derivation applies: the
    operand bound needs the reference operand to be a grid value, and the
    self-correction bound additionally needs both children to have positive
    exact value and errors below 1/(4*delta).  Leaves holding non-grid
    integers are exactly the steps skipped by these guards.
    """
    ctx = ev.ctx
    delta = ctx.delta
    out: list[StepViolation] = []
    for rec in ev.records:
        if rec.a == 0.0:
            continue
        p = rec.p
        for zref, zoth, side in ((rec.z1, rec.z2, 1), (rec.z2, rec.z1, 2)):
            if not _is_grid(zref, ctx):
                continue
            bound = 0.5 * delta * p * zref
            if zoth < bound - tol * max(1.0, zref):
                out.append(StepViolation(
                    "operand-lower-bound", rec.node,
                    {"reference_side": side, "z_ref": zref, "z_other": zoth,
                     "p": p, "bound": bound}))
        lam1, lam2 = rec.lam1, rec.lam2
        if lam1 is None or lam2 is None:
            continue
        hi = max(abs(lam1), abs(lam2))
        if hi >= 0.25 / delta:
            continue
        zhi = rec.z1 if abs(lam1) >= abs(lam2) else rec.z2
        if not _is_grid(zhi, ctx):
            continue
        yv = rec.y1 + rec.y2
        pre_err = abs(math.log(rec.a / yv) / ctx.ln1pd)
        allowed = hi - 0.05 * delta * p * abs(lam1 - lam2)
        if pre_err > allowed + tol:
            out.append(StepViolation(
                "self-correction", rec.node,
                {"pre_round_error": pre_err, "allowed": allowed,
                 "lam1": lam1, "lam2": lam2, "p": p}))
    return out


# -- tree shapes ------------------------------------------------------------


def caterpillar_tree(inputs: list[int]) -> AdditionTree:
    """Single spine: each internal node joins the running sum with one leaf."""
    if not inputs:
        raise ValueError("need at least one leaf input")
    nodes: list[tuple] = [(LEAF, inputs[0])]
    prev = 0
    for x in inputs[1:]:
        nodes.append((LEAF, x))
        nodes.append((ADD, prev, len(nodes) - 1))
        prev = len(nodes) - 1
    return AdditionTree(nodes, prev)


def balanced_tree(inputs: list[int]) -> AdditionTree:
    """Repeated pairwise merging; height ceil(log2(#leaves))."""
    if not inputs:
        raise ValueError("need at least one leaf input")
    nodes: list[tuple] = []
    layer = []
    for x in inputs:
        nodes.append((LEAF, x))
        layer.append(len(nodes) - 1)
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            nodes.append((ADD, layer[i], layer[i + 1]))
            nxt.append(len(nodes) - 1)
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return AdditionTree(nodes, layer[0])


def random_tree(inputs: list[int], stream: RandomStream,
                bias: float = 1.0) -> AdditionTree:
    """Recursive random split of the leaf sequence.

    `bias` shapes the split point distribution: 1 is uniform, larger values
    skew toward lopsided splits (spine-like trees), smaller toward even
    splits (balanced trees).
    """
    if not inputs:
        raise ValueError("need at least one leaf input")
    if bias <= 0:
        raise ValueError("bias must be positive")
    nodes: list[tuple] = []

    # Explicit stack: (lo, hi, parent_slot); slots patched after creation.
    result_slot: list[int | None] = [None]
    stack: list[tuple[int, int, tuple[int, int] | None]] = [(0, len(inputs), None)]
    while stack:
        lo, hi, slot = stack.pop()
        if hi - lo == 1:
            nodes.append((LEAF, inputs[lo]))
            idx = len(nodes) - 1
        else:
            u = stream.substream("split", lo, hi).uniform() ** bias
            cut = lo + 1 + int(u * (hi - lo - 1))
            cut = min(max(cut, lo + 1), hi - 1)
            nodes.append((ADD, -1, -1))
            idx = len(nodes) - 1
            stack.append((cut, hi, (idx, 2)))
            stack.append((lo, cut, (idx, 1)))
        if slot is None:
            result_slot[0] = idx
        else:
            parent, pos = slot
            nd = list(nodes[parent])
            nd[pos] = idx
            nodes[parent] = tuple(nd)
    return AdditionTree(nodes, result_slot[0])


_SHAPES = ("caterpillar", "balanced", "random")


def build_shape(shape: str, size: int, stream: RandomStream,
                input_high: int = 100, bias: float = 1.0,
                tree: AdditionTree | None = None) -> AdditionTree:
    """Tree of roughly `size` nodes with inputs uniform in {1..input_high}."""
    if shape == "fromFile":
        if tree is None:
            raise ValueError("shape fromFile needs an explicit tree")
        return tree
    if shape not in _SHAPES:
        raise ValueError(f"unknown shape {shape!r}")
    leaves = max(1, (size + 1) // 2)
    ins = stream.substream("inputs")
    inputs = [1 + int(ins.uniform() * input_high) for _ in range(leaves)]
    inputs = [min(x, input_high) for x in inputs]
    if shape == "caterpillar":
        return caterpillar_tree(inputs)
    if shape == "balanced":
        return balanced_tree(inputs)
    return random_tree(inputs, stream.substream("shape"), bias)


@dataclass
class ConcentrationReport:
    """Empirical error tails over repeated rounded evaluations of one tree."""

    shape: str
    size: int
    n_nodes: int
    bh_root: int
    delta: float
    trials: int
    per_trial_max_abs: list[float] = field(default_factory=list)
    per_trial_max_ratio: list[float] = field(default_factory=list)
    per_trial_violations: list[int] = field(default_factory=list)

    def tail_fraction(self, threshold: float) -> float:
        if not self.per_trial_max_abs:
            return 0.0
        hit = sum(1 for v in self.per_trial_max_abs if v > threshold)
        return hit / len(self.per_trial_max_abs)

    def spine_tail_bound(self, lam: float) -> float:
        """2 n^2 exp(-lam sqrt(delta) / 20); meaningful for balanced height 1."""
        try:
            return 2.0 * self.n_nodes ** 2 * math.exp(-lam * math.sqrt(self.delta) / 20.0)
        except OverflowError:
            return math.inf

    def general_tail_bound(self, lam: float) -> float:
        """(h+1) n^(h+1) exp(-lam sqrt(delta) / 20) with h the balanced height."""
        h = self.bh_root
        log_bound = (math.log(h + 1.0) + (h + 1.0) * math.log(self.n_nodes)
                     - lam * math.sqrt(self.delta) / 20.0)
        if log_bound > 700:
            return math.inf
        return math.exp(log_bound)


def simulate_concentration(shape: str, size: int, ctx: RoundingContext,
                           trials: int, input_high: int = 100,
                           bias: float = 1.0,
                           tree: AdditionTree | None = None,
                           check_lemmas: bool = False) -> ConcentrationReport:
    """Evaluate one tree `trials` times with independent rounding streams.

    The tree structure and leaf inputs are fixed from the context seed; each
    trial re-rounds with a trial-indexed substream, so reports are
    reproducible and trials could run concurrently.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    root = ctx.root_stream()
    t = build_shape(shape, size, root, input_high=input_high, bias=bias, tree=tree)
    bh = balanced_height(t)[t.root]
    report = ConcentrationReport(shape, size, t.size, bh, ctx.delta, trials)
    for trial in range(trials):
        ev = evaluate(t, ctx, root.substream("trial", trial))
        report.per_trial_max_abs.append(ev.max_abs_error)
        report.per_trial_max_ratio.append(ev.max_ratio)
        if check_lemmas:
            report.per_trial_violations.append(len(check_step_lemmas(ev)))
        else:
            report.per_trial_violations.append(0)
    return report
