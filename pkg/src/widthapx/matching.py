"""Small matching helpers shared by oracles, repairs and verifiers."""

from __future__ import annotations

import networkx as nx


def capacitated_assignment(left: list[int], right: list[int],
                           capacity: dict[int, int],
                           adjacent) -> dict[int, int]:
    """Assign as many left vertices as possible to adjacent right vertices.

    Each right vertex r accepts at most capacity[r] left vertices.  Returns
    the assignment map (left -> right) of a maximum assignment, found with
    augmenting paths (Kuhn's algorithm with capacity slack on the right).
    """
    assigned: dict[int, int] = {}
    load: dict[int, int] = {r: 0 for r in right}
    holders: dict[int, list[int]] = {r: [] for r in right}

    def try_augment(u: int, banned: set[int]) -> bool:
        for r in right:
            if r in banned or not adjacent(u, r):
                continue
            banned.add(r)
            if load[r] < capacity.get(r, 0):
                assigned[u] = r
                holders[r].append(u)
                load[r] += 1
                return True
            for prev in holders[r]:
                if try_augment(prev, banned):
                    holders[r].remove(prev)
                    assigned[u] = r
                    holders[r].append(u)
                    return True
        return False

    for u in left:
        try_augment(u, set())
    return assigned


def max_matching(edges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Maximum-cardinality matching of a general graph (blossom algorithm)."""
    gx = nx.Graph()
    gx.add_edges_from(edges)
    mate = nx.max_weight_matching(gx, maxcardinality=True)
    return sorted((min(a, b), max(a, b)) for a, b in mate)
