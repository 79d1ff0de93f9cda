"""Exact Steiner distances and Steiner trees for small terminal sets.

The workhorse is a Dreyfus-Wagner dynamic program over (vertex, terminal
subset) states.  Internally all lengths are rescaled to integers by the
common denominator, which keeps the arithmetic exact while avoiding Fraction
overhead in the inner loops; results are converted back to Fractions at the
API boundary.  A brute-force oracle over edge subsets is provided for
verification.
"""

from __future__ import annotations

import heapq
import weakref
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Optional, Sequence

from .graph import (
    CapExceededError,
    GraphError,
    SubgraphRef,
    VertexId,
    Walk,
    WeightedMultigraph,
    as_subgraph,
)

STEINER_TERMINAL_CAP = 12
BRUTE_FORCE_EDGE_CAP = 16


class _Infinity:
    """Explicit infinite-distance marker, comparable with rationals."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is INFINITY

    def __gt__(self, other):
        return other is not INFINITY

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return INFINITY

    __radd__ = __add__

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()

Distance = object  # Fraction | INFINITY


def is_finite(value) -> bool:
    return value is not INFINITY


@dataclass(frozen=True)
class SteinerResult:
    """A Steiner distance plus one minimizing tree (None when disconnected)."""

    distance: Distance
    tree: Optional[SubgraphRef]


class _ScaledGraph:
    """Integer-weight view of a graph: weights are length * scale, exactly."""

    __slots__ = ("graph", "scale", "index_of", "verts", "adj", "weight")

    def __init__(self, graph: WeightedMultigraph):
        self.graph = graph
        denominators = [e.length.denominator for e in graph.edges]
        self.scale = reduce(lambda a, b: a * b // gcd(a, b), denominators, 1)
        self.verts = graph.vertices
        self.index_of = {v: i for i, v in enumerate(self.verts)}
        self.weight = [int(e.length * self.scale) for e in graph.edges]
        adj: list = [[] for _ in self.verts]
        for e in graph.edges:
            iu, iv = self.index_of[e.u], self.index_of[e.v]
            w = self.weight[e.id]
            adj[iu].append((iv, w, e.id))
            adj[iv].append((iu, w, e.id))
        self.adj = [tuple(sorted(nbrs)) for nbrs in adj]

    def to_fraction(self, value: Optional[int]) -> Distance:
        if value is None:
            return INFINITY
        return Fraction(value, self.scale)


_scaled_cache: "weakref.WeakKeyDictionary[WeightedMultigraph, _ScaledGraph]" = weakref.WeakKeyDictionary()


def _scaled(graph: WeightedMultigraph) -> _ScaledGraph:
    sg = _scaled_cache.get(graph)
    if sg is None:
        sg = _ScaledGraph(graph)
        _scaled_cache[graph] = sg
    return sg


def _dijkstra(sg: _ScaledGraph, source: int) -> list:
    dist: list = [None] * len(sg.verts)
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if dist[v] is not None:
            continue
        dist[v] = d
        for w, weight, _eid in sg.adj[v]:
            if dist[w] is None:
                heapq.heappush(heap, (d + weight, w))
    return dist


def shortest_path_matrix(graph: WeightedMultigraph) -> dict:
    """Exact pairwise distances; d(x, x) = 0, INFINITY for disconnected pairs."""
    sg = _scaled(graph)
    matrix = {}
    for i, u in enumerate(sg.verts):
        dist = _dijkstra(sg, i)
        for j, v in enumerate(sg.verts):
            matrix[(u, v)] = sg.to_fraction(dist[j])
    return matrix


def lex_shortest_path(graph: WeightedMultigraph, source: VertexId, target: VertexId) -> Walk:
    """Shortest path with ties broken by lexicographically least vertex sequence.

    Among same-length parallel edges the least edge id is used.
    """
    sg = _scaled(graph)
    try:
        si, ti = sg.index_of[source], sg.index_of[target]
    except KeyError as exc:
        raise GraphError(f"unknown vertex {exc.args[0]!r}") from exc
    dist_to_target = _dijkstra(sg, ti)
    if dist_to_target[si] is None:
        raise GraphError(f"no path between {source!r} and {target!r}")
    vertices = [source]
    edge_ids = []
    current = si
    while current != ti:
        remaining = dist_to_target[current]
        best = None
        for w, weight, eid in sg.adj[current]:
            if dist_to_target[w] is not None and weight + dist_to_target[w] == remaining:
                key = (sg.verts[w], eid)
                if best is None or key < best:
                    best = key
        w_vertex, eid = best
        vertices.append(w_vertex)
        edge_ids.append(eid)
        current = sg.index_of[w_vertex]
    return Walk(graph, vertices, edge_ids)


def _validate_terminals(graph: WeightedMultigraph, terminals: Iterable[VertexId]) -> tuple:
    terms = tuple(sorted(set(terminals)))
    for t in terms:
        if not graph.has_vertex(t):
            raise GraphError(f"terminal {t!r} is not a vertex of the graph")
    return terms


def _dreyfus_wagner(sg: _ScaledGraph, terms: Sequence[VertexId], want_parents: bool):
    """dp[mask][v] = min length of a tree containing {terminals in mask} + v."""
    n = len(sg.verts)
    t = len(terms)
    full = 1 << t
    dp: list = [None] * full
    parent: list = [None] * full if want_parents else None
    dp[0] = [0] * n
    for i, term in enumerate(terms):
        row: list = [None] * n
        row[sg.index_of[term]] = 0
        dp[1 << i] = row
        if want_parents:
            parent[1 << i] = [None] * n
        # Grow singleton states by shortest paths.
        _relax(sg, row, parent[1 << i] if want_parents else None)
    for mask in range(1, full):
        if dp[mask] is not None:
            continue
        row = [None] * n
        prow = [None] * n if want_parents else None
        low = mask & -mask
        sub = (mask - 1) & mask
        while sub:
            if sub & low:
                comp = mask ^ sub
                a, b = dp[sub], dp[comp]
                for v in range(n):
                    av, bv = a[v], b[v]
                    if av is not None and bv is not None:
                        cand = av + bv
                        if row[v] is None or cand < row[v]:
                            row[v] = cand
                            if want_parents:
                                prow[v] = ("merge", sub)
            sub = (sub - 1) & mask
        _relax(sg, row, prow)
        dp[mask] = row
        if want_parents:
            parent[mask] = prow
    return dp, parent


def _relax(sg: _ScaledGraph, row: list, prow: Optional[list]) -> None:
    heap = [(d, v) for v, d in enumerate(row) if d is not None]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if row[v] is not None and row[v] < d:
            continue
        for w, weight, eid in sg.adj[v]:
            cand = d + weight
            if row[w] is None or cand < row[w]:
                row[w] = cand
                if prow is not None:
                    prow[w] = ("edge", v, eid)
                heapq.heappush(heap, (cand, w))


def all_steiner_distances(graph: WeightedMultigraph, terminals: Iterable[VertexId]) -> dict:
    """Steiner distance of every subset of `terminals`, keyed by frozenset.

    One Dreyfus-Wagner run serves all 2^t subsets; t is capped at
    STEINER_TERMINAL_CAP + 1 to keep the table desk-scale.
    """
    terms = _validate_terminals(graph, terminals)
    t = len(terms)
    if t > STEINER_TERMINAL_CAP + 1:
        raise CapExceededError(f"terminal set of size {t} exceeds the DP cap")
    sg = _scaled(graph)
    dp, _ = _dreyfus_wagner(sg, terms, want_parents=False)
    table = {frozenset(): Fraction(0)}
    for mask in range(1, 1 << t):
        anchor = (mask & -mask).bit_length() - 1
        value = dp[mask][sg.index_of[terms[anchor]]]
        table[frozenset(terms[i] for i in range(t) if mask >> i & 1)] = sg.to_fraction(value)
    return table


def steiner_tree(graph: WeightedMultigraph, terminals: Iterable[VertexId], cap: int = STEINER_TERMINAL_CAP) -> SteinerResult:
    """Exact Steiner distance and one minimizing tree for the terminal set.

    The distance is contractually unique; the returned tree is the minimizer
    determined by the DP's fixed scan order (vertex id, then subset rank), so
    repeated runs reproduce it exactly.
    """
    terms = _validate_terminals(graph, terminals)
    if len(terms) > cap:
        raise CapExceededError(f"terminal set of size {len(terms)} exceeds cap {cap}")
    if len(terms) <= 1:
        return SteinerResult(Fraction(0), graph.subgraph((), terms))
    sg = _scaled(graph)
    dp, parent = _dreyfus_wagner(sg, terms, want_parents=True)
    full = (1 << len(terms)) - 1
    root = sg.index_of[terms[0]]
    best = dp[full][root]
    if best is None:
        return SteinerResult(INFINITY, None)

    edge_ids = set()
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        step = parent[mask][v]
        if step is None:
            continue
        if step[0] == "merge":
            sub = step[1]
            stack.append((sub, v))
            stack.append((mask ^ sub, v))
        else:
            _, prev, eid = step
            edge_ids.add(eid)
            stack.append((mask, prev))
    tree = graph.subgraph(edge_ids, terms)
    distance = sg.to_fraction(best)
    # Exact self-checks: the reconstruction must realize the DP optimum.
    if tree.length != distance or not tree.is_connected or not tree.is_tree:
        raise AssertionError("Steiner reconstruction failed to realize the optimum")
    if not tree.leaves <= set(terms):
        raise AssertionError("Steiner tree has a non-terminal leaf")
    return SteinerResult(distance, tree)


def steiner_tree_in_tree(tree, terminals: Iterable[VertexId]) -> SteinerResult:
    """Unique Steiner tree inside a tree: the union of pairwise paths."""
    ref = as_subgraph(tree)
    if not ref.is_tree:
        raise GraphError("steiner_tree_in_tree requires a tree")
    terms = frozenset(terminals)
    stray = terms - ref.vertex_ids
    if stray:
        raise GraphError(f"terminals {sorted(stray, key=repr)!r} outside the tree")
    if len(terms) <= 1:
        return SteinerResult(Fraction(0), SubgraphRef(ref.host, (), terms))
    keep_edges = set(ref.edge_ids)
    keep_vertices = set(ref.vertex_ids)
    degrees = {v: ref.degree(v) for v in keep_vertices}
    incident = {v: {e.id for e in ref.incident(v)} for v in keep_vertices}
    # Iteratively prune non-terminal leaves; what survives is the path union.
    queue = sorted(v for v in keep_vertices if degrees[v] == 1 and v not in terms)
    while queue:
        leaf = queue.pop(0)
        if leaf not in keep_vertices or degrees[leaf] != 1 or leaf in terms:
            continue
        (eid,) = incident[leaf]
        edge = ref.host.edge(eid)
        other = edge.other(leaf)
        keep_vertices.discard(leaf)
        keep_edges.discard(eid)
        incident[other].discard(eid)
        degrees[other] -= 1
        del incident[leaf], degrees[leaf]
        if degrees[other] == 1 and other not in terms:
            queue.append(other)
            queue.sort()
    result = SubgraphRef(ref.host, keep_edges, terms)
    return SteinerResult(result.length, result)


_brute_cache: "weakref.WeakKeyDictionary[WeightedMultigraph, dict]" = weakref.WeakKeyDictionary()


def _brute_table(graph: WeightedMultigraph) -> dict:
    """vertex-cover bitmask -> (length_int, edge id tuple) over connected edge subsets.

    First minimum in ascending edge-bitmask order is kept, which fixes the
    returned witness deterministically.
    """
    table = _brute_cache.get(graph)
    if table is not None:
        return table
    sg = _scaled(graph)
    m = graph.num_edges
    ends = [(sg.index_of[e.u], sg.index_of[e.v]) for e in graph.edges]
    table = {}
    for subset in range(1 << m):
        total = 0
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        vmask = 0
        components = 0
        for i in range(m):
            if subset >> i & 1:
                total += sg.weight[i]
                a, b = ends[i]
                for x in (a, b):
                    if x not in parent:
                        parent[x] = x
                        components += 1
                        vmask |= 1 << x
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
                    components -= 1
        if subset and components != 1:
            continue
        entry = table.get(vmask)
        if entry is None or total < entry[0]:
            edge_ids = tuple(i for i in range(m) if subset >> i & 1)
            table[vmask] = (total, edge_ids)
    _brute_cache[graph] = table
    return table


def brute_force_steiner(graph: WeightedMultigraph, terminals: Iterable[VertexId]) -> SteinerResult:
    """Exhaustive minimum over all connected edge subsets containing the terminals.

    Test oracle only; capped at BRUTE_FORCE_EDGE_CAP edges.
    """
    if graph.num_edges > BRUTE_FORCE_EDGE_CAP:
        raise CapExceededError(f"brute force is capped at {BRUTE_FORCE_EDGE_CAP} edges")
    terms = _validate_terminals(graph, terminals)
    if len(terms) <= 1:
        return SteinerResult(Fraction(0), graph.subgraph((), terms))
    sg = _scaled(graph)
    amask = 0
    for t in terms:
        amask |= 1 << sg.index_of[t]
    best = None
    for vmask, (total, edge_ids) in sorted(_brute_table(graph).items()):
        if vmask & amask == amask:
            if best is None or total < best[0]:
                best = (total, edge_ids)
    if best is None:
        return SteinerResult(INFINITY, None)
    tree_edges = best[1]
    ref = graph.subgraph(tree_edges, terms)
    return SteinerResult(sg.to_fraction(best[0]), ref)


def steiner_distances_in_tree(tree, terminals: Iterable[VertexId]) -> dict:
    """All-subset Steiner distances inside a tree via edge bipartition counts.

    For each tree edge, a subset pays the edge exactly when it has terminals
    on both sides.  Much faster than the DP and cross-checked against it.
    """
    ref = as_subgraph(tree)
    if not ref.is_tree:
        raise GraphError("steiner_distances_in_tree requires a tree")
    terms = tuple(sorted(set(terminals)))
    stray = set(terms) - ref.vertex_ids
    if stray:
        raise GraphError(f"terminals {sorted(stray, key=repr)!r} outside the tree")
    t = len(terms)
    index = {v: i for i, v in enumerate(terms)}
    side_masks = []
    lengths = []
    for e in ref.edges:
        seen = {min(e.u, e.v)}
        stack = [min(e.u, e.v)]
        while stack:
            v = stack.pop()
            for inc in ref.incident(v):
                if inc.id == e.id:
                    continue
                w = inc.other(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        mask = 0
        for v in seen:
            if v in index:
                mask |= 1 << index[v]
        side_masks.append(mask)
        lengths.append(e.length)
    full = (1 << t) - 1
    table = {}
    for mask in range(1 << t):
        total = Fraction(0)
        for side, ln in zip(side_masks, lengths):
            inside = mask & side
            if inside and inside != mask:
                total += ln
        table[frozenset(terms[i] for i in range(t) if mask >> i & 1)] = total
    return table


def steiner_distances_in_cycle(cycle, terminals: Iterable[VertexId]) -> dict:
    """All-subset Steiner distances inside a cycle.

    The Steiner tree of a subset is the cycle minus its longest empty arc, so
    sd equals total length minus the largest gap between consecutive chosen
    vertices.
    """
    ref = as_subgraph(cycle)
    if not ref.is_cycle:
        raise GraphError("steiner_distances_in_cycle requires a cycle")
    terms = tuple(sorted(set(terminals)))
    stray = set(terms) - ref.vertex_ids
    if stray:
        raise GraphError(f"terminals {sorted(stray, key=repr)!r} outside the cycle")
    order, arc = _cycle_order_and_arcs(ref)
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    total = ref.length
    table = {frozenset(): Fraction(0)}
    t = len(terms)
    for mask in range(1, 1 << t):
        chosen = sorted(pos[terms[i]] for i in range(t) if mask >> i & 1)
        if len(chosen) == 1:
            table[frozenset(terms[i] for i in range(t) if mask >> i & 1)] = Fraction(0)
            continue
        widest = None
        for idx, p in enumerate(chosen):
            nxt = chosen[(idx + 1) % len(chosen)]
            gap = Fraction(0)
            q = p
            while q != nxt:
                gap += arc[q]
                q = (q + 1) % n
            if widest is None or gap > widest:
                widest = gap
        table[frozenset(terms[i] for i in range(t) if mask >> i & 1)] = total - widest
    return table


def _cycle_order_and_arcs(ref: SubgraphRef) -> tuple:
    """Cyclic vertex order of a cycle subgraph plus arc length after each vertex.

    The order starts at the minimum vertex and proceeds toward its smaller
    neighbor; for a two-vertex cycle the two parallel edges are taken in id
    order.
    """
    start = min(ref.vertex_ids)
    incident = sorted(ref.incident(start), key=lambda e: (e.other(start), e.id))
    order = [start]
    arcs = []
    used = set()
    current = start
    edge = incident[0]
    while True:
        used.add(edge.id)
        arcs.append(edge.length)
        nxt = edge.other(current)
        if nxt == start:
            break
        order.append(nxt)
        current = nxt
        edge = next(e for e in sorted(ref.incident(current), key=lambda e: e.id) if e.id not in used)
    return tuple(order), tuple(arcs)
