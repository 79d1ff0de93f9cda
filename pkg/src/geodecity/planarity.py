"""Desk-scale planarity testing by exhaustive Kuratowski subdivision search.

A graph is planar iff it contains no subdivision of K5 or K3,3.  For the
instance sizes handled here (at most ~14 vertices, sparse) a direct search
for branch vertices plus internally disjoint paths is fast enough, and it is
deliberately independent of any combinatorial shortcut used elsewhere so the
cross-checks stay meaningful.
"""

from __future__ import annotations

from itertools import combinations

from .graph import WeightedMultigraph, as_subgraph


def _simple_adjacency(graph) -> dict:
    """Simple-graph adjacency sets; parallel edges never affect planarity."""
    ref = as_subgraph(graph)
    adj: dict = {v: set() for v in ref.vertex_ids}
    for e in ref.edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    return adj


def _components(adj: dict) -> list:
    remaining = set(adj)
    out = []
    while remaining:
        start = next(iter(remaining))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        remaining -= seen
        out.append(seen)
    return out


def _link_pairs(adj: dict, pairs: list, forbidden: set, used: set) -> bool:
    """Try to realize `pairs` as internally disjoint paths.

    Branch vertices (in `forbidden`) may appear only as path endpoints, and
    interior vertices are consumed into `used` as paths are committed.
    """
    if not pairs:
        return True
    a, b = pairs[0]
    rest = pairs[1:]
    blocked = (forbidden | used) - {a, b}

    # Enumerate simple a-b paths avoiding blocked vertices, DFS order.
    stack = [(a, [a])]
    while stack:
        v, path = stack.pop()
        for w in sorted(adj[v], reverse=True):
            if w == b:
                interior = set(path[1:])
                used.update(interior)
                if _link_pairs(adj, rest, forbidden, used):
                    return True
                used.difference_update(interior)
            elif w not in blocked and w not in path:
                stack.append((w, path + [w]))
    return False


def _has_subdivision(adj: dict, parts: tuple) -> bool:
    """Search for a topological K5 (parts=(5,)) or K3,3 (parts=(3, 3))."""
    need_degree = 4 if parts == (5,) else 3
    eligible = sorted(v for v in adj if len(adj[v]) >= need_degree)
    if parts == (5,):
        for branch in combinations(eligible, 5):
            pairs = [(a, b) for a, b in combinations(branch, 2)]
            if _link_pairs(adj, pairs, set(branch), set()):
                return True
        return False
    for left in combinations(eligible, 3):
        rest = [v for v in eligible if v not in left]
        for right in combinations(rest, 3):
            if right < left:
                continue  # unordered pair of parts, visit once
            pairs = [(a, b) for a in left for b in right]
            if _link_pairs(adj, pairs, set(left) | set(right), set()):
                return True
    return False


def is_planar(graph) -> bool:
    """Exhaustive Kuratowski test, valid for desk-scale inputs."""
    adj = _simple_adjacency(graph)
    for comp in _components(adj):
        sub = {v: adj[v] & comp for v in comp}
        n = len(sub)
        m = sum(len(nbrs) for nbrs in sub.values()) // 2
        if n <= 4:
            continue
        # Cyclomatic number below 4 cannot host either Kuratowski graph.
        if m - n + 1 <= 3:
            continue
        if m > 3 * n - 6:
            return False
        if _has_subdivision(sub, (3, 3)) or _has_subdivision(sub, (5,)):
            return False
    return True
