"""Graphs, clique-width expressions, tree decompositions: parsing and generation.

Three line-oriented text formats are supported, all 1-indexed:

* graphs: ``c`` comments, ``p graph <n> <m>``, ``e <u> <v> [weight]`` edges,
  optional ``v <u> <capacity> [cost]`` vertex attributes;
* clique-width expressions: ``cwd <w> <numNodes>`` header, node lines
  ``<id> i <label> <vertex>`` / ``<id> u <c1> <c2>`` / ``<id> j <c> <l1> <l2>``
  / ``<id> r <c> <l1> <l2>``, final ``root <id>``;
* tree decompositions, PACE-2017 style: ``s td <numBags> <maxBagSize> <n>``,
  ``b <bagId> <v...>`` bags, one ``<id1> <id2>`` line per tree edge.

Expressions are validated by simulating the four construction operations:
every vertex must be introduced exactly once, and a join between label
classes that already share an edge (which would duplicate it) is rejected.
Decompositions are checked for vertex coverage and the connected-subtree
property at parse time; edge coverage needs the graph and has its own check.

`make_nice` converts a decomposition into the binary leaf/introduce/forget/
join normal form with empty leaf and root bags, preserving the width, and
`generate_family` produces test graphs together with a matching width
certificate (clique/path/cycle/star/cograph expressions, path/cycle/ktree
decompositions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rounding import RandomStream


class FormatError(ValueError):
    """Malformed or invalid input text."""


@dataclass
class Graph:
    """Simple undirected graph with optional edge weights and vertex attributes."""

    n: int
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    capacities: list[int] | None = None
    costs: list[int] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise FormatError("graph needs at least one vertex")
        self.adj: list[set[int]] = [set() for _ in range(self.n + 1)]
        for (u, v) in self.edges:
            self.adj[u].add(v)
            self.adj[v].add(u)

    @property
    def m(self) -> int:
        return len(self.edges)

    def add_edge(self, u: int, v: int, weight: int = 1) -> None:
        if u == v:
            raise FormatError(f"self-loop at vertex {u}")
        if not (1 <= u <= self.n and 1 <= v <= self.n):
            raise FormatError(f"edge ({u},{v}) out of range 1..{self.n}")
        if weight < 1:
            raise FormatError(f"edge ({u},{v}) weight must be >= 1")
        key = (min(u, v), max(u, v))
        if key in self.edges:
            raise FormatError(f"duplicate edge ({u},{v})")
        self.edges[key] = weight
        self.adj[u].add(v)
        self.adj[v].add(u)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def weight(self, u: int, v: int) -> int:
        return self.edges[(min(u, v), max(u, v))]

    def capacity(self, v: int) -> int:
        if self.capacities is None:
            raise ValueError("graph has no capacities")
        return self.capacities[v]

    def cost(self, v: int) -> int:
        if self.costs is None:
            return 1
        return self.costs[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def total_weight(self) -> int:
        return sum(self.edges.values())

    def edge_list(self) -> list[tuple[int, int, int]]:
        return [(u, v, w) for (u, v), w in sorted(self.edges.items())]


def parse_graph(text: str) -> Graph:
    g: Graph | None = None
    declared_m = 0
    caps: dict[int, int] = {}
    costs: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if g is not None:
                    raise FormatError(f"line {lineno}: duplicate problem line")
                if len(parts) != 4 or parts[1] != "graph":
                    raise FormatError(f"line {lineno}: expected 'p graph <n> <m>'")
                g = Graph(int(parts[2]))
                declared_m = int(parts[3])
            elif parts[0] == "e":
                if g is None:
                    raise FormatError(f"line {lineno}: edge before problem line")
                if len(parts) not in (3, 4):
                    raise FormatError(f"line {lineno}: expected 'e <u> <v> [weight]'")
                w = int(parts[3]) if len(parts) == 4 else 1
                g.add_edge(int(parts[1]), int(parts[2]), w)
            elif parts[0] == "v":
                if g is None:
                    raise FormatError(f"line {lineno}: vertex line before problem line")
                if len(parts) not in (3, 4):
                    raise FormatError(f"line {lineno}: expected 'v <u> <capacity> [cost]'")
                u = int(parts[1])
                if not (1 <= u <= g.n):
                    raise FormatError(f"line {lineno}: vertex {u} out of range")
                cap = int(parts[2])
                if cap < 0:
                    raise FormatError(f"line {lineno}: capacity must be nonnegative")
                caps[u] = cap
                if len(parts) == 4:
                    costs[u] = int(parts[3])
            else:
                raise FormatError(f"line {lineno}: unknown directive {parts[0]!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if g is None:
        raise FormatError("missing 'p graph' line")
    if g.m != declared_m:
        raise FormatError(f"declared {declared_m} edges, found {g.m}")
    if caps:
        g.capacities = [0] * (g.n + 1)
        for u, c in caps.items():
            g.capacities[u] = c
    if costs:
        g.costs = [1] * (g.n + 1)
        for u, c in costs.items():
            g.costs[u] = c
    return g


def render_graph(g: Graph) -> str:
    lines = [f"p graph {g.n} {g.m}"]
    if g.capacities is not None or g.costs is not None:
        for u in range(1, g.n + 1):
            cap = g.capacities[u] if g.capacities is not None else 0
            if g.costs is not None:
                lines.append(f"v {u} {cap} {g.costs[u]}")
            else:
                lines.append(f"v {u} {cap}")
    for u, v, w in g.edge_list():
        lines.append(f"e {u} {v} {w}" if w != 1 else f"e {u} {v}")
    return "\n".join(lines) + "\n"


# -- clique-width expressions -------------------------------------------------

INTRO = "intro"
UNION = "union"
JOIN = "join"
RENAME = "rename"


@dataclass
class CwExpression:
    """Rooted binary construction recipe over labels {1..w}.

    Nodes: ("intro", label, vertex) / ("union", c1, c2) /
    ("join", c, l1, l2) / ("rename", c, l1, l2).
    """

    w: int
    nodes: list[tuple]
    root: int

    def __post_init__(self):
        self.validate()

    @property
    def size(self) -> int:
        return len(self.nodes)

    def children(self, i: int) -> tuple[int, ...]:
        nd = self.nodes[i]
        if nd[0] == INTRO:
            return ()
        if nd[0] == UNION:
            return (nd[1], nd[2])
        return (nd[1],)

    def postorder(self) -> list[int]:
        order = []
        stack = [(self.root, False)]
        seen = set()
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node in seen:
                raise FormatError("cycle in expression")
            seen.add(node)
            stack.append((node, True))
            for c in reversed(self.children(node)):
                stack.append((c, False))
        return order

    def vertices(self) -> list[int]:
        return sorted(nd[2] for nd in self.nodes if nd[0] == INTRO)

    def validate(self) -> None:
        n = len(self.nodes)
        if self.w < 1:
            raise FormatError("label count must be >= 1")
        if not (0 <= self.root < n):
            raise FormatError("root index out of range")
        parent_count = [0] * n
        seen_vertices = set()
        for i, nd in enumerate(self.nodes):
            kind = nd[0]
            if kind == INTRO:
                _, lab, v = nd
                if not (1 <= lab <= self.w):
                    raise FormatError(f"node {i}: label {lab} out of range 1..{self.w}")
                if v in seen_vertices:
                    raise FormatError(f"vertex {v} introduced more than once")
                seen_vertices.add(v)
            elif kind in (JOIN, RENAME):
                _, c, l1, l2 = nd
                if not (0 <= c < n):
                    raise FormatError(f"node {i}: child out of range")
                parent_count[c] += 1
                for lab in (l1, l2):
                    if not (1 <= lab <= self.w):
                        raise FormatError(f"node {i}: label {lab} out of range 1..{self.w}")
                if l1 == l2:
                    raise FormatError(f"node {i}: labels must differ")
            elif kind == UNION:
                _, c1, c2 = nd
                for c in (c1, c2):
                    if not (0 <= c < n):
                        raise FormatError(f"node {i}: child out of range")
                    parent_count[c] += 1
            else:
                raise FormatError(f"node {i}: unknown kind {kind!r}")
        if parent_count[self.root] != 0:
            raise FormatError("root must not be used as a child")
        bad = [i for i in range(n) if i != self.root and parent_count[i] != 1]
        if bad:
            raise FormatError(f"nodes {bad[:5]} must be used exactly once as a child")
        order = self.postorder()
        if len(order) != n:
            raise FormatError("expression must be a single connected tree")
        self._simulate_structure(order)

    def _simulate_structure(self, order: list[int]) -> None:
        """Run the construction; rejects joins between already-joined classes."""
        labels: dict[int, dict[int, int]] = {}
        edges: dict[int, set[tuple[int, int]]] = {}
        for i in order:
            nd = self.nodes[i]
            kind = nd[0]
            if kind == INTRO:
                labels[i] = {nd[2]: nd[1]}
                edges[i] = set()
            elif kind == UNION:
                _, c1, c2 = nd
                both = set(labels[c1]) & set(labels[c2])
                if both:
                    raise FormatError(f"node {i}: vertices {sorted(both)[:3]} on both union sides")
                lab = dict(labels[c1])
                lab.update(labels[c2])
                labels[i] = lab
                edges[i] = edges[c1] | edges[c2]
                del labels[c1], labels[c2], edges[c1], edges[c2]
            elif kind == RENAME:
                _, c, l1, l2 = nd
                labels[i] = {v: (l2 if l == l1 else l) for v, l in labels[c].items()}
                edges[i] = edges[c]
                del labels[c], edges[c]
            else:  # join
                _, c, l1, l2 = nd
                lab = labels[c]
                side1 = [v for v, l in lab.items() if l == l1]
                side2 = [v for v, l in lab.items() if l == l2]
                new = {(min(u, v), max(u, v)) for u in side1 for v in side2}
                if new & edges[c]:
                    raise FormatError(
                        f"node {i}: join of labels {l1},{l2} duplicates existing edges")
                if not new:
                    raise FormatError(
                        f"node {i}: join of labels {l1},{l2} adds no edges")
                labels[i] = lab
                edges[i] = edges[c] | new
                del labels[c], edges[c]
        self._final_edges = edges[order[-1]]


def parse_cw(text: str) -> CwExpression:
    w = None
    declared = None
    root_id = None
    raw_nodes: dict[int, tuple] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c "):
            continue
        parts = line.split()
        try:
            if parts[0] == "cwd":
                if len(parts) != 3:
                    raise FormatError(f"line {lineno}: expected 'cwd <w> <numNodes>'")
                w, declared = int(parts[1]), int(parts[2])
            elif parts[0] == "root":
                root_id = int(parts[1])
            else:
                nid = int(parts[0])
                if nid in raw_nodes:
                    raise FormatError(f"line {lineno}: duplicate node id {nid}")
                op = parts[1]
                if op == "i" and len(parts) == 4:
                    raw_nodes[nid] = (INTRO, int(parts[2]), int(parts[3]))
                elif op == "u" and len(parts) == 4:
                    raw_nodes[nid] = (UNION, int(parts[2]), int(parts[3]))
                elif op == "j" and len(parts) == 5:
                    raw_nodes[nid] = (JOIN, int(parts[2]), int(parts[3]), int(parts[4]))
                elif op == "r" and len(parts) == 5:
                    raw_nodes[nid] = (RENAME, int(parts[2]), int(parts[3]), int(parts[4]))
                else:
                    raise FormatError(f"line {lineno}: malformed node line")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if w is None or root_id is None:
        raise FormatError("missing 'cwd' header or 'root' line")
    if declared != len(raw_nodes):
        raise FormatError(f"header declares {declared} nodes, found {len(raw_nodes)}")
    if root_id not in raw_nodes:
        raise FormatError(f"root id {root_id} is not a node")
    index = {nid: i for i, nid in enumerate(sorted(raw_nodes))}
    nodes: list[tuple] = []
    for nid in sorted(raw_nodes):
        nd = raw_nodes[nid]
        if nd[0] == INTRO:
            nodes.append(nd)
        elif nd[0] == UNION:
            for c in nd[1:]:
                if c not in index:
                    raise FormatError(f"node {nid}: unknown child {c}")
            nodes.append((UNION, index[nd[1]], index[nd[2]]))
        else:
            if nd[1] not in index:
                raise FormatError(f"node {nid}: unknown child {nd[1]}")
            nodes.append((nd[0], index[nd[1]], nd[2], nd[3]))
    return CwExpression(w, nodes, index[root_id])


def render_cw(expr: CwExpression) -> str:
    lines = [f"cwd {expr.w} {expr.size}"]
    kindmap = {INTRO: "i", UNION: "u", JOIN: "j", RENAME: "r"}
    for i, nd in enumerate(expr.nodes):
        lines.append(f"{i} {kindmap[nd[0]]} " + " ".join(str(x) for x in nd[1:]))
    lines.append(f"root {expr.root}")
    return "\n".join(lines) + "\n"


@dataclass
class CwValidation:
    ok: bool
    missing: list[tuple[int, int]]
    extra: list[tuple[int, int]]
    vertices_ok: bool


def validate_cw_against_graph(expr: CwExpression, g: Graph) -> CwValidation:
    """Rebuild the edge set from the expression and compare with the graph."""
    built = expr._final_edges
    want = set(g.edges)
    vertices_ok = expr.vertices() == list(range(1, g.n + 1))
    missing = sorted(want - built)
    extra = sorted(built - want)
    return CwValidation(vertices_ok and not missing and not extra,
                        missing, extra, vertices_ok)


# -- tree decompositions ------------------------------------------------------


@dataclass
class TreeDecomposition:
    n: int
    bags: dict[int, frozenset[int]]
    tree_edges: list[tuple[int, int]]

    def __post_init__(self):
        self.validate()

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1

    def validate(self) -> None:
        ids = set(self.bags)
        if not ids:
            raise FormatError("decomposition needs at least one bag")
        for v_set in self.bags.values():
            for v in v_set:
                if not (1 <= v <= self.n):
                    raise FormatError(f"bag vertex {v} out of range 1..{self.n}")
        adj: dict[int, set[int]] = {i: set() for i in ids}
        for a, b in self.tree_edges:
            if a not in ids or b not in ids:
                raise FormatError(f"tree edge ({a},{b}) references unknown bag")
            if a == b or b in adj[a]:
                raise FormatError(f"bad tree edge ({a},{b})")
            adj[a].add(b)
            adj[b].add(a)
        if len(self.tree_edges) != len(ids) - 1:
            raise FormatError("bag tree must have exactly numBags-1 edges")
        start = next(iter(ids))
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != ids:
            raise FormatError("bag tree is not connected (axiom: tree shape)")
        covered = set().union(*self.bags.values()) if self.bags else set()
        if covered != set(range(1, self.n + 1)):
            miss = sorted(set(range(1, self.n + 1)) - covered)
            raise FormatError(f"vertex coverage axiom violated: missing {miss[:5]}")
        # Connected-subtree axiom: bags containing v must induce a subtree.
        for v in range(1, self.n + 1):
            holding = [i for i in ids if v in self.bags[i]]
            h = set(holding)
            comp = {holding[0]}
            stack = [holding[0]]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in h and y not in comp:
                        comp.add(y)
                        stack.append(y)
            if comp != h:
                raise FormatError(
                    f"connected-subtree axiom violated for vertex {v}")
        self._adj = adj

    def covers_edges(self, g: Graph) -> list[tuple[int, int]]:
        """Edges of g not contained in any bag (edge-coverage axiom check)."""
        missing = []
        bags = list(self.bags.values())
        for (u, v) in sorted(g.edges):
            if not any(u in b and v in b for b in bags):
                missing.append((u, v))
        return missing


def validate_td_against_graph(td: TreeDecomposition, g: Graph) -> None:
    if td.n != g.n:
        raise FormatError(f"decomposition is for n={td.n}, graph has n={g.n}")
    missing = td.covers_edges(g)
    if missing:
        raise FormatError(f"edge coverage axiom violated: {missing[:5]}")


def parse_td(text: str) -> TreeDecomposition:
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "s":
                if header is not None:
                    raise FormatError(f"line {lineno}: duplicate 's td' line")
                if len(parts) != 5 or parts[1] != "td":
                    raise FormatError(f"line {lineno}: expected 's td <numBags> <maxBagSize> <n>'")
                header = (int(parts[2]), int(parts[3]), int(parts[4]))
            elif parts[0] == "b":
                bid = int(parts[1])
                if bid in bags:
                    raise FormatError(f"line {lineno}: duplicate bag {bid}")
                bags[bid] = frozenset(int(x) for x in parts[2:])
            else:
                if len(parts) != 2:
                    raise FormatError(f"line {lineno}: expected a tree edge '<id> <id>'")
                edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    if header is None:
        raise FormatError("missing 's td' header")
    num_bags, max_bag, n = header
    if len(bags) != num_bags:
        raise FormatError(f"header declares {num_bags} bags, found {len(bags)}")
    if bags and max(len(b) for b in bags.values()) > max_bag:
        raise FormatError("a bag exceeds the declared maximum bag size")
    return TreeDecomposition(n, bags, edges)


def render_td(td: TreeDecomposition) -> str:
    max_bag = max(len(b) for b in td.bags.values())
    lines = [f"s td {len(td.bags)} {max_bag} {td.n}"]
    for bid in sorted(td.bags):
        lines.append("b " + " ".join([str(bid)] + [str(v) for v in sorted(td.bags[bid])]))
    for a, b in sorted(td.tree_edges):
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"


# -- nice decompositions ------------------------------------------------------

NLEAF = "leaf"
NINTRO = "introduce"
NFORGET = "forget"
NJOIN = "join"


@dataclass
class NiceDecomposition:
    """Binary normal form: empty leaves, +-1 vertex transitions, equal-bag joins.

    Nodes are ("leaf",) / ("introduce", child, v) / ("forget", child, v) /
    ("join", c1, c2); `bags` holds each node's bag, the root bag is empty.
    """

    n: int
    nodes: list[tuple]
    bags: list[frozenset[int]]
    root: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def children(self, i: int) -> tuple[int, ...]:
        nd = self.nodes[i]
        if nd[0] == NLEAF:
            return ()
        if nd[0] == NJOIN:
            return (nd[1], nd[2])
        return (nd[1],)

    def postorder(self) -> list[int]:
        order = []
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(self.children(node)):
                stack.append((c, False))
        return order

    @property
    def height(self) -> int:
        h = [0] * self.size
        for i in self.postorder():
            ch = self.children(i)
            if ch:
                h[i] = 1 + max(h[c] for c in ch)
        return h[self.root]

    def validate(self) -> None:
        for i in self.postorder():
            nd = self.nodes[i]
            if nd[0] == NLEAF:
                if self.bags[i]:
                    raise FormatError("leaf bags must be empty")
            elif nd[0] == NINTRO:
                child, v = nd[1], nd[2]
                if self.bags[i] != self.bags[child] | {v} or v in self.bags[child]:
                    raise FormatError(f"introduce node {i} must add exactly {v}")
            elif nd[0] == NFORGET:
                child, v = nd[1], nd[2]
                if self.bags[i] != self.bags[child] - {v} or v not in self.bags[child]:
                    raise FormatError(f"forget node {i} must remove exactly {v}")
            else:
                c1, c2 = nd[1], nd[2]
                if self.bags[i] != self.bags[c1] or self.bags[i] != self.bags[c2]:
                    raise FormatError(f"join node {i} needs identical child bags")
        if self.bags[self.root]:
            raise FormatError("root bag must be empty")

    def to_tree_decomposition(self) -> TreeDecomposition:
        """Plain decomposition view (for re-running the axiom checks)."""
        bags = {i: self.bags[i] for i in range(self.size)}
        edges = []
        for i in range(self.size):
            for c in self.children(i):
                edges.append((i, c))
        # Plain decompositions require nonempty coverage; empty bags are fine.
        return TreeDecomposition(self.n, bags, edges)


class _NiceBuilder:
    def __init__(self, n: int):
        self.n = n
        self.nodes: list[tuple] = []
        self.bags: list[frozenset[int]] = []

    def add(self, node: tuple, bag: frozenset[int]) -> int:
        self.nodes.append(node)
        self.bags.append(bag)
        return len(self.nodes) - 1

    def chain_from_empty(self, bag: frozenset[int]) -> int:
        idx = self.add((NLEAF,), frozenset())
        cur: frozenset[int] = frozenset()
        for v in sorted(bag):
            cur = cur | {v}
            idx = self.add((NINTRO, idx, v), cur)
        return idx

    def transition(self, idx: int, frombag: frozenset[int], tobag: frozenset[int]) -> int:
        cur = frombag
        for v in sorted(frombag - tobag):
            cur = cur - {v}
            idx = self.add((NFORGET, idx, v), cur)
        for v in sorted(tobag - frombag):
            cur = cur | {v}
            idx = self.add((NINTRO, idx, v), cur)
        return idx


def make_nice(td: TreeDecomposition) -> NiceDecomposition:
    """Binary nice form of a decomposition, same width, empty root bag."""
    root_bag = min(td.bags)
    children: dict[int, list[int]] = {i: [] for i in td.bags}
    parent: dict[int, int | None] = {root_bag: None}
    order = [root_bag]
    stack = [root_bag]
    seen = {root_bag}
    while stack:
        x = stack.pop()
        for y in sorted(td._adj[x]):
            if y not in seen:
                seen.add(y)
                parent[y] = x
                children[x].append(y)
                order.append(y)
                stack.append(y)

    b = _NiceBuilder(td.n)
    done: dict[int, int] = {}
    for bag_id in reversed(order):
        bag = td.bags[bag_id]
        kids = children[bag_id]
        if not kids:
            done[bag_id] = b.chain_from_empty(bag)
            continue
        adapted = [b.transition(done[k], td.bags[k], bag) for k in kids]
        cur = adapted[0]
        for other in adapted[1:]:
            cur = b.add((NJOIN, cur, other), bag)
        done[bag_id] = cur
    top = b.transition(done[root_bag], td.bags[root_bag], frozenset())
    nice = NiceDecomposition(td.n, b.nodes, b.bags, top)
    nice.validate()
    return nice


# -- trivially valid certificates --------------------------------------------


def trivial_td(g: Graph) -> TreeDecomposition:
    """Single bag holding every vertex (width n-1)."""
    return TreeDecomposition(g.n, {1: frozenset(range(1, g.n + 1))}, [])


def trivial_cw(g: Graph) -> CwExpression:
    """Expression with one label per vertex and one join per edge (w = n)."""
    nodes: list[tuple] = []
    prev = None
    for v in range(1, g.n + 1):
        nodes.append((INTRO, v, v))
        idx = len(nodes) - 1
        if prev is not None:
            nodes.append((UNION, prev, idx))
            idx = len(nodes) - 1
        prev = idx
    for (u, v) in sorted(g.edges):
        nodes.append((JOIN, prev, u, v))
        prev = len(nodes) - 1
    return CwExpression(g.n, nodes, prev)


# -- family generators --------------------------------------------------------


@dataclass
class FamilyInstance:
    graph: Graph
    cw: CwExpression | None
    td: TreeDecomposition | None


def _clique_cw(n: int) -> CwExpression:
    nodes: list[tuple] = [(INTRO, 1, 1)]
    prev = 0
    for v in range(2, n + 1):
        nodes.append((INTRO, 2, v))
        nodes.append((UNION, prev, len(nodes) - 1))
        nodes.append((JOIN, len(nodes) - 1, 1, 2))
        nodes.append((RENAME, len(nodes) - 1, 2, 1))
        prev = len(nodes) - 1
    return CwExpression(2, nodes, prev)


def _path_cw(n: int) -> CwExpression:
    # labels: 1 = settled, 2 = rightmost, 3 = newcomer
    nodes: list[tuple] = [(INTRO, 2, 1)]
    prev = 0
    for v in range(2, n + 1):
        nodes.append((INTRO, 3, v))
        nodes.append((UNION, prev, len(nodes) - 1))
        nodes.append((JOIN, len(nodes) - 1, 2, 3))
        nodes.append((RENAME, len(nodes) - 1, 2, 1))
        nodes.append((RENAME, len(nodes) - 1, 3, 2))
        prev = len(nodes) - 1
    return CwExpression(3, nodes, prev)


def _cycle_cw(n: int) -> CwExpression:
    # labels: 1 = settled, 2 = rightmost, 3 = newcomer, 4 = anchor vertex 1
    if n < 3:
        raise FormatError("cycle needs n >= 3")
    nodes: list[tuple] = [(INTRO, 4, 1)]
    prev = 0
    nodes.append((INTRO, 2, 2))
    nodes.append((UNION, prev, len(nodes) - 1))
    nodes.append((JOIN, len(nodes) - 1, 4, 2))
    prev = len(nodes) - 1
    for v in range(3, n + 1):
        nodes.append((INTRO, 3, v))
        nodes.append((UNION, prev, len(nodes) - 1))
        nodes.append((JOIN, len(nodes) - 1, 2, 3))
        nodes.append((RENAME, len(nodes) - 1, 2, 1))
        nodes.append((RENAME, len(nodes) - 1, 3, 2))
        prev = len(nodes) - 1
    nodes.append((JOIN, prev, 4, 2))
    return CwExpression(4, nodes, len(nodes) - 1)


def _star_cw(n: int) -> CwExpression:
    nodes: list[tuple] = [(INTRO, 1, 1)]
    prev = 0
    for v in range(2, n + 1):
        nodes.append((INTRO, 2, v))
        nodes.append((UNION, prev, len(nodes) - 1))
        prev = len(nodes) - 1
    if n > 1:
        nodes.append((JOIN, prev, 1, 2))
        prev = len(nodes) - 1
    return CwExpression(2, nodes, prev)


def _path_td(n: int) -> TreeDecomposition:
    if n == 1:
        return TreeDecomposition(1, {1: frozenset({1})}, [])
    bags = {i: frozenset({i, i + 1}) for i in range(1, n)}
    edges = [(i, i + 1) for i in range(1, n - 1)]
    return TreeDecomposition(n, bags, edges)


def _cycle_td(n: int) -> TreeDecomposition:
    bags = {i: frozenset({1, i + 1, i + 2}) for i in range(1, n - 1)}
    edges = [(i, i + 1) for i in range(1, n - 2)]
    return TreeDecomposition(n, bags, edges)


def _star_td(n: int) -> TreeDecomposition:
    if n == 1:
        return TreeDecomposition(1, {1: frozenset({1})}, [])
    bags = {i: frozenset({1, i + 1}) for i in range(1, n)}
    edges = [(1, i) for i in range(2, n)]
    return TreeDecomposition(n, bags, edges)


def _cograph(n: int, stream: RandomStream) -> tuple[Graph, CwExpression]:
    """Random cograph via recursive union/join splits; 2-label expression."""
    g = Graph(n)
    nodes: list[tuple] = []

    def build(lo: int, hi: int, depth: int) -> int:
        # vertices lo..hi-1 (0-based); returns expression node, all label 1
        if hi - lo == 1:
            nodes.append((INTRO, 1, lo + 1))
            return len(nodes) - 1
        s = stream.substream("split", lo, hi, depth)
        cut = lo + 1 + int(s.uniform() * (hi - lo - 1))
        cut = min(max(cut, lo + 1), hi - 1)
        join_here = s.uniform() < 0.5
        left = build(lo, cut, depth + 1)
        right = build(cut, hi, depth + 1)
        if not join_here:
            nodes.append((UNION, left, right))
            return len(nodes) - 1
        nodes.append((RENAME, right, 1, 2))
        nodes.append((UNION, left, len(nodes) - 1))
        nodes.append((JOIN, len(nodes) - 1, 1, 2))
        nodes.append((RENAME, len(nodes) - 1, 2, 1))
        for u in range(lo + 1, cut + 1):
            for v in range(cut + 1, hi + 1):
                g.add_edge(u, v)
        return len(nodes) - 1

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 100))
    try:
        root = build(0, n, 0)
    finally:
        sys.setrecursionlimit(old)
    return g, CwExpression(2, nodes, root)


def _ktree(n: int, k: int, stream: RandomStream) -> tuple[Graph, TreeDecomposition]:
    """Random k-tree: seed clique of k+1 vertices, then attach to k-cliques."""
    if n < k + 1:
        raise FormatError(f"ktree needs n >= k+1 = {k + 1}")
    g = Graph(n)
    base = list(range(1, k + 2))
    for i in base:
        for j in base:
            if i < j:
                g.add_edge(i, j)
    bags = {1: frozenset(base)}
    edges: list[tuple[int, int]] = []
    cliques = [tuple(sorted(c)) for c in _k_subsets(base, k)]
    clique_bag = {c: 1 for c in cliques}
    next_bag = 2
    for v in range(k + 2, n + 1):
        s = stream.substream("attach", v)
        pick = cliques[int(s.uniform() * len(cliques))]
        for u in pick:
            g.add_edge(u, v)
        bag = frozenset(set(pick) | {v})
        bags[next_bag] = bag
        edges.append((clique_bag[pick], next_bag))
        for c in _k_subsets(sorted(bag), k):
            key = tuple(sorted(c))
            cliques.append(key)
            clique_bag[key] = next_bag
        next_bag += 1
    return g, TreeDecomposition(n, bags, edges)


def _k_subsets(items, k):
    from itertools import combinations
    return combinations(items, k)


FAMILIES = ("clique", "path", "cycle", "star", "cograph", "ktree")


def generate_family(kind: str, n: int, seed: int, k: int = 2) -> FamilyInstance:
    """Graph plus whichever width certificate the family supports."""
    if n < 1:
        raise FormatError("family size must be >= 1")
    stream = RandomStream(seed).substream("family", kind, n)
    if kind == "clique":
        g = Graph(n)
        for u in range(1, n + 1):
            for v in range(u + 1, n + 1):
                g.add_edge(u, v)
        return FamilyInstance(g, _clique_cw(n) if n >= 2 else trivial_cw(g), trivial_td(g))
    if kind == "path":
        g = Graph(n)
        for u in range(1, n):
            g.add_edge(u, u + 1)
        cw = _path_cw(n) if n >= 2 else trivial_cw(g)
        return FamilyInstance(g, cw, _path_td(n))
    if kind == "cycle":
        if n < 3:
            raise FormatError("cycle needs n >= 3")
        g = Graph(n)
        for u in range(1, n):
            g.add_edge(u, u + 1)
        g.add_edge(n, 1)
        return FamilyInstance(g, _cycle_cw(n), _cycle_td(n))
    if kind == "star":
        g = Graph(n)
        for v in range(2, n + 1):
            g.add_edge(1, v)
        cw = _star_cw(n)
        return FamilyInstance(g, cw, _star_td(n))
    if kind == "cograph":
        g, cw = _cograph(n, stream)
        return FamilyInstance(g, cw, None)
    if kind == "ktree":
        g, td = _ktree(n, k, stream)
        return FamilyInstance(g, None, td)
    raise FormatError(f"unknown family {kind!r}; choose from {FAMILIES}")
