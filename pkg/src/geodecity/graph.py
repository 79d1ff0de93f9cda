"""Exact-weighted multigraph primitives shared by every other module.

All edge lengths are rationals (`fractions.Fraction`) end to end; floats are
rejected at the boundary because downstream certificates rely on strict
inequalities that float rounding would make unsound.  Graphs are immutable
after construction, edge ids are dense integers assigned at insertion, and
every iteration order is id- or key-sorted, so all derived computations are
deterministic.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

Rational = Fraction
VertexId = Hashable

ISO_VERTEX_CAP = 16


class GraphError(ValueError):
    """Malformed graph data, or an operation applied outside its domain."""


class CapExceededError(ValueError):
    """A desk-scale size cap was exceeded."""


class PropertyViolation(AssertionError):
    """A certified invariant failed on a concrete instance."""


def to_length(value) -> Fraction:
    """Coerce an edge length to a positive Fraction.

    Accepts Fraction, int, and rational strings like "3/2" or "3".  Floats
    are rejected: exactness is a hard requirement.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise GraphError(f"edge lengths must be exact rationals, got {value!r}")
    try:
        length = Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise GraphError(f"cannot parse edge length {value!r}") from exc
    if length <= 0:
        raise GraphError(f"edge lengths must be positive, got {value!r}")
    return length


def format_length(value: Fraction) -> str:
    """Render a Fraction as "p" or "p/q" (canonical reduced form)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Edge:
    id: int
    u: VertexId
    v: VertexId
    length: Fraction

    def other(self, vertex: VertexId) -> VertexId:
        if vertex == self.u:
            return self.v
        if vertex == self.v:
            return self.u
        raise GraphError(f"vertex {vertex!r} is not an endpoint of edge {self.id}")

    @property
    def endpoints(self) -> frozenset:
        return frozenset((self.u, self.v))


class WeightedMultigraph:
    """Finite undirected multigraph with positive rational edge lengths.

    Parallel edges are allowed and distinguished by edge id; loops are
    rejected.  Vertex ids may be any hashable values that sort consistently
    within one graph (strings or ints in practice).
    """

    __slots__ = ("_vertices", "_vertex_set", "_edges", "_adj", "__weakref__", "__dict__")

    def __init__(self, vertices: Iterable[VertexId], edges: Iterable[tuple] = ()):
        vertex_list = list(vertices)
        self._vertex_set = frozenset(vertex_list)
        if len(vertex_list) != len(self._vertex_set):
            raise GraphError("duplicate vertex ids")
        self._vertices = tuple(sorted(self._vertex_set))
        built = []
        for eid, spec in enumerate(edges):
            u, v, raw = spec
            if u == v:
                raise GraphError(f"loops are not allowed (edge {eid} at {u!r})")
            if u not in self._vertex_set or v not in self._vertex_set:
                raise GraphError(f"edge {eid} has an endpoint outside the vertex set")
            built.append(Edge(eid, u, v, to_length(raw)))
        self._edges = tuple(built)
        adj: dict = {v: [] for v in self._vertices}
        for edge in self._edges:
            adj[edge.u].append(edge)
            adj[edge.v].append(edge)
        self._adj = {v: tuple(lst) for v, lst in adj.items()}

    # -- basic accessors ---------------------------------------------------

    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def vertex_set(self) -> frozenset:
        return self._vertex_set

    @property
    def edges(self) -> tuple:
        return self._edges

    @property
    def num_vertices(self) -> int:
        return len(self._vertices)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def edge(self, edge_id: int) -> Edge:
        try:
            return self._edges[edge_id]
        except (IndexError, TypeError) as exc:
            raise GraphError(f"unknown edge id {edge_id!r}") from exc

    def incident(self, vertex: VertexId) -> tuple:
        try:
            return self._adj[vertex]
        except KeyError as exc:
            raise GraphError(f"unknown vertex {vertex!r}") from exc

    def degree(self, vertex: VertexId) -> int:
        return len(self.incident(vertex))

    def has_vertex(self, vertex: VertexId) -> bool:
        return vertex in self._vertex_set

    def total_length(self) -> Fraction:
        return sum((e.length for e in self._edges), Fraction(0))

    # -- views and derived graphs -------------------------------------------

    def subgraph(self, edge_ids: Iterable[int], vertices: Iterable[VertexId] = ()) -> "SubgraphRef":
        return SubgraphRef(self, edge_ids, vertices)

    def full_ref(self) -> "SubgraphRef":
        return SubgraphRef(self, range(self.num_edges), self._vertices)

    def induced(self, vertices: Iterable[VertexId]) -> "SubgraphRef":
        """Subgraph induced by a vertex set: all edges with both ends inside."""
        keep = frozenset(vertices)
        missing = keep - self._vertex_set
        if missing:
            raise GraphError(f"unknown vertices {sorted(missing, key=repr)!r}")
        ids = [e.id for e in self._edges if e.u in keep and e.v in keep]
        return SubgraphRef(self, ids, keep)

    def with_lengths(self, lengths: Mapping[int, object]) -> "WeightedMultigraph":
        """Same structure with some edge lengths replaced."""
        specs = []
        for e in self._edges:
            raw = lengths.get(e.id, e.length)
            specs.append((e.u, e.v, raw))
        return WeightedMultigraph(self._vertices, specs)

    # -- JSON interchange ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": [str(v) for v in self._vertices],
            "edges": [
                {"id": e.id, "u": str(e.u), "v": str(e.v), "len": format_length(e.length)}
                for e in self._edges
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data) -> "WeightedMultigraph":
        if isinstance(data, (str, bytes)):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise GraphError(f"invalid graph JSON: {exc}") from exc
        if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
            raise GraphError("graph JSON must be an object with 'vertices' and 'edges'")
        vertices = data["vertices"]
        if not all(isinstance(v, str) for v in vertices):
            raise GraphError("graph JSON vertex ids must be strings")
        raw_edges = data["edges"]
        if not isinstance(raw_edges, list):
            raise GraphError("graph JSON 'edges' must be a list")
        by_id = {}
        for item in raw_edges:
            if not isinstance(item, dict) or not {"id", "u", "v", "len"} <= set(item):
                raise GraphError("each edge needs 'id', 'u', 'v' and 'len'")
            eid = item["id"]
            if not isinstance(eid, int) or eid in by_id:
                raise GraphError(f"edge ids must be distinct integers, got {eid!r}")
            by_id[eid] = item
        if sorted(by_id) != list(range(len(by_id))):
            raise GraphError("edge ids must be dense integers 0..m-1")
        specs = [(by_id[i]["u"], by_id[i]["v"], by_id[i]["len"]) for i in range(len(by_id))]
        return cls(vertices, specs)

    def __repr__(self) -> str:
        return f"WeightedMultigraph(|V|={self.num_vertices}, |E|={self.num_edges})"


class SubgraphRef:
    """An edge-subset view of a host graph, closed under endpoints.

    Carries the induced length-function (the host's restriction).  Extra
    isolated vertices may be included beyond edge endpoints.
    """

    def __init__(self, host: WeightedMultigraph, edge_ids: Iterable[int], vertices: Iterable[VertexId] = ()):
        self.host = host
        ids = frozenset(edge_ids)
        for eid in ids:
            host.edge(eid)  # validates
        vset = set(vertices)
        missing = vset - host.vertex_set
        if missing:
            raise GraphError(f"unknown vertices {sorted(missing, key=repr)!r}")
        for eid in ids:
            e = host.edge(eid)
            vset.add(e.u)
            vset.add(e.v)
        self.edge_ids = ids
        self.vertex_ids = frozenset(vset)

    @cached_property
    def edges(self) -> tuple:
        return tuple(self.host.edge(i) for i in sorted(self.edge_ids))

    @cached_property
    def vertices(self) -> tuple:
        return tuple(sorted(self.vertex_ids))

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def num_edges(self) -> int:
        return len(self.edge_ids)

    @cached_property
    def length(self) -> Fraction:
        """Exact sum of the edge lengths in this subgraph."""
        return sum((e.length for e in self.edges), Fraction(0))

    def incident(self, vertex: VertexId) -> tuple:
        if vertex not in self.vertex_ids:
            raise GraphError(f"vertex {vertex!r} not in subgraph")
        return tuple(e for e in self.host.incident(vertex) if e.id in self.edge_ids)

    def degree(self, vertex: VertexId) -> int:
        return len(self.incident(vertex))

    @cached_property
    def degree_sequence(self) -> tuple:
        return tuple(sorted(self.degree(v) for v in self.vertices))

    @cached_property
    def leaves(self) -> frozenset:
        return frozenset(v for v in self.vertex_ids if self.degree(v) == 1)

    @cached_property
    def is_connected(self) -> bool:
        if not self.vertex_ids:
            return True
        start = self.vertices[0]
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for e in self.incident(v):
                w = e.other(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertex_ids)

    @cached_property
    def is_tree(self) -> bool:
        return self.is_connected and self.num_edges == self.num_vertices - 1

    @cached_property
    def is_cycle(self) -> bool:
        # Two vertices joined by two parallel edges count as a cycle.
        return (
            self.num_vertices >= 2
            and self.is_connected
            and all(self.degree(v) == 2 for v in self.vertices)
        )

    def components(self) -> tuple:
        """Vertex sets of connected components, each sorted, ordered by minimum."""
        remaining = set(self.vertex_ids)
        comps = []
        while remaining:
            start = min(remaining)
            seen = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for e in self.incident(v):
                    w = e.other(v)
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            remaining -= seen
            comps.append(frozenset(seen))
        return tuple(sorted(comps, key=lambda c: min(c)))

    def union(self, other: "SubgraphRef") -> "SubgraphRef":
        self._require_same_host(other)
        return SubgraphRef(self.host, self.edge_ids | other.edge_ids, self.vertex_ids | other.vertex_ids)

    def intersection(self, other: "SubgraphRef") -> "SubgraphRef":
        self._require_same_host(other)
        return SubgraphRef(self.host, self.edge_ids & other.edge_ids, self.vertex_ids & other.vertex_ids)

    def _require_same_host(self, other: "SubgraphRef") -> None:
        if self.host is not other.host:
            raise GraphError("subgraph views belong to different host graphs")

    @cached_property
    def _extracted(self) -> tuple:
        old_ids = sorted(self.edge_ids)
        specs = []
        for eid in old_ids:
            e = self.host.edge(eid)
            specs.append((e.u, e.v, e.length))
        graph = WeightedMultigraph(self.vertex_ids, specs)
        new_to_old = tuple(old_ids)
        return graph, new_to_old

    def extract(self) -> WeightedMultigraph:
        """Standalone copy preserving vertex ids; edge ids re-densified by sorted host id."""
        return self._extracted[0]

    def extract_with_map(self) -> tuple:
        """Standalone copy plus the tuple mapping new edge id -> host edge id."""
        return self._extracted

    def __repr__(self) -> str:
        return f"SubgraphRef(|V|={self.num_vertices}, |E|={self.num_edges})"


def as_subgraph(g) -> SubgraphRef:
    """Normalize a WeightedMultigraph or SubgraphRef to a SubgraphRef."""
    if isinstance(g, SubgraphRef):
        return g
    if isinstance(g, WeightedMultigraph):
        return g.full_ref()
    raise GraphError(f"expected a graph or subgraph, got {type(g).__name__}")


def subgraph_length(subgraph: SubgraphRef) -> Fraction:
    """Exact total length of a subgraph (empty edge set sums to 0)."""
    return as_subgraph(subgraph).length


def structural_predicates(subgraph) -> dict:
    """Elementary structure report: connectivity, tree/cycle flags, leaves, degrees."""
    ref = as_subgraph(subgraph)
    return {
        "is_connected": ref.is_connected,
        "is_tree": ref.is_tree,
        "is_cycle": ref.is_cycle,
        "leaves": ref.leaves,
        "degree_sequence": ref.degree_sequence,
    }


class Bipartition(NamedTuple):
    side1: frozenset
    side2: frozenset
    nontrivial: bool


def edge_bipartition(tree, edge_id: int, marked: Iterable[VertexId]) -> Bipartition:
    """Split a marked vertex set along a tree edge.

    Removing `edge_id` from the tree leaves two components; the result pairs
    the marked vertices by component, with the side containing the smaller
    endpoint of the removed edge first.  `nontrivial` is True when both sides
    are non-empty.
    """
    ref = as_subgraph(tree)
    if not ref.is_tree:
        raise GraphError("edge_bipartition requires a tree")
    if edge_id not in ref.edge_ids:
        raise GraphError(f"edge {edge_id} is not in the tree")
    marked_set = frozenset(marked)
    stray = marked_set - ref.vertex_ids
    if stray:
        raise GraphError(f"marked vertices {sorted(stray, key=repr)!r} outside the tree")
    edge = ref.host.edge(edge_id)
    anchor = min(edge.u, edge.v)
    seen = {anchor}
    stack = [anchor]
    while stack:
        v = stack.pop()
        for e in ref.incident(v):
            if e.id == edge_id:
                continue
            w = e.other(v)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    side1 = frozenset(x for x in marked_set if x in seen)
    side2 = marked_set - side1
    return Bipartition(side1, side2, bool(side1) and bool(side2))


def suppress_degree_two(graph: WeightedMultigraph) -> WeightedMultigraph:
    """Replace every maximal path through degree-2 vertices by a single edge.

    Total length and the leaf set are preserved and the result has no
    degree-2 vertices.  Rejected when some component is a cycle (the merge
    would have to produce a loop).
    """
    ref = graph.full_ref()
    for comp in ref.components():
        if comp and all(graph.degree(v) == 2 for v in comp):
            raise GraphError("suppression is undefined on a cycle component")

    # Work on a mutable edge list: (u, v, length, birth) where birth is the
    # smallest original edge id merged in, used to fix the output order.
    work = {e.id: (e.u, e.v, e.length, e.id) for e in graph.edges}
    incident: dict = {v: set() for v in graph.vertices}
    for e in graph.edges:
        incident[e.u].add(e.id)
        incident[e.v].add(e.id)

    next_id = graph.num_edges
    queue = sorted(v for v in graph.vertices if len(incident[v]) == 2)
    dropped = set()
    while queue:
        x = queue.pop(0)
        if x in dropped or len(incident[x]) != 2:
            continue
        e1, e2 = sorted(incident[x])
        u1, v1, len1, b1 = work[e1]
        u2, v2, len2, b2 = work[e2]
        a = v1 if u1 == x else u1
        b = v2 if u2 == x else u2
        if a == b:
            raise GraphError("suppression would create a loop")
        for eid, end in ((e1, a), (e2, b)):
            incident[end].discard(eid)
        del work[e1], work[e2]
        merged = (a, b, len1 + len2, min(b1, b2))
        work[next_id] = merged
        incident[a].add(next_id)
        incident[b].add(next_id)
        next_id += 1
        dropped.add(x)
        del incident[x]
        for y in (a, b):
            if len(incident[y]) == 2:
                queue.append(y)
        queue.sort()

    kept_vertices = [v for v in graph.vertices if v not in dropped]
    final = sorted(work.values(), key=lambda item: item[3])
    return WeightedMultigraph(kept_vertices, [(u, v, ln) for u, v, ln, _ in final])


def _iso_signature(graph: WeightedMultigraph, vertex, respect_lengths: bool):
    incident = graph.incident(vertex)
    if respect_lengths:
        return (len(incident), tuple(sorted(e.length for e in incident)))
    return (len(incident),)


def _pair_profile(graph: WeightedMultigraph, u, v, respect_lengths: bool):
    lengths = [e.length for e in graph.incident(u) if e.other(u) == v]
    if respect_lengths:
        return tuple(sorted(lengths))
    return len(lengths)


def multigraph_isomorphic(g1: WeightedMultigraph, g2: WeightedMultigraph, respect_lengths: bool = True) -> bool:
    """Brute-force multigraph isomorphism for desk-scale graphs (<= 16 vertices).

    Preserves edge multiplicities, and edge lengths when `respect_lengths`.
    """
    if max(g1.num_vertices, g2.num_vertices) > ISO_VERTEX_CAP:
        raise CapExceededError(f"isomorphism search is capped at {ISO_VERTEX_CAP} vertices")
    if g1.num_vertices != g2.num_vertices or g1.num_edges != g2.num_edges:
        return False
    sig1 = Counter(_iso_signature(g1, v, respect_lengths) for v in g1.vertices)
    sig2 = Counter(_iso_signature(g2, v, respect_lengths) for v in g2.vertices)
    if sig1 != sig2:
        return False
    if respect_lengths:
        if Counter(e.length for e in g1.edges) != Counter(e.length for e in g2.edges):
            return False

    # Most-constrained-first vertex order: rare signatures first, then degree.
    order = sorted(
        g1.vertices,
        key=lambda v: (sig1[_iso_signature(g1, v, respect_lengths)], -g1.degree(v), v),
    )
    candidates = {
        v: [w for w in g2.vertices if _iso_signature(g2, w, respect_lengths) == _iso_signature(g1, v, respect_lengths)]
        for v in order
    }
    mapping: dict = {}
    used: set = set()

    def backtrack(idx: int) -> bool:
        if idx == len(order):
            return True
        v = order[idx]
        for w in candidates[v]:
            if w in used:
                continue
            ok = True
            for prev, image in mapping.items():
                if _pair_profile(g1, v, prev, respect_lengths) != _pair_profile(g2, w, image, respect_lengths):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if backtrack(idx + 1):
                return True
            del mapping[v]
            used.remove(w)
        return False

    return backtrack(0)


class Walk:
    """Alternating vertex/edge sequence v1 e1 v2 ... ek v(k+1) in a host graph."""

    def __init__(self, host: WeightedMultigraph, vertices: Sequence[VertexId], edge_ids: Sequence[int]):
        vertices = tuple(vertices)
        edge_ids = tuple(edge_ids)
        if not vertices:
            raise GraphError("a walk needs at least one vertex")
        if len(edge_ids) != len(vertices) - 1:
            raise GraphError("walk needs exactly one edge between consecutive vertices")
        for v in vertices:
            if not host.has_vertex(v):
                raise GraphError(f"walk vertex {v!r} not in graph")
        for i, eid in enumerate(edge_ids):
            e = host.edge(eid)
            if {vertices[i], vertices[i + 1]} != {e.u, e.v}:
                raise GraphError(f"edge {eid} does not join {vertices[i]!r} and {vertices[i + 1]!r}")
        self.host = host
        self.vertices = vertices
        self.edge_ids = edge_ids

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @cached_property
    def length(self) -> Fraction:
        return sum((self.host.edge(i).length for i in self.edge_ids), Fraction(0))

    def multiplicities(self) -> dict:
        """Traversal count per edge id, keys sorted."""
        counts = Counter(self.edge_ids)
        return {eid: counts[eid] for eid in sorted(counts)}

    def __repr__(self) -> str:
        return f"Walk(len={format_length(self.length)}, steps={len(self.edge_ids)})"
