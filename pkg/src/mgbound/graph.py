"""Metric graph data model: validation, distances, epsilon-subgraphs,
boundary splitting, and vertex separators.

A metric graph is a finite weighted multigraph whose edges carry positive
finite lengths, together with a designated boundary vertex set that must
contain every degree-1 vertex.  All values are immutable; every operation
here is a pure function.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
import networkx as nx


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float

    def other(self, w: str) -> str:
        if w == self.u:
            return self.v
        if w == self.v:
            return self.u
        raise ValueError(f"vertex {w!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple
    edges: tuple
    boundary: frozenset

    def interior(self):
        return [v for v in self.vertices if v not in self.boundary]

    def total_length(self):
        return sum(e.length for e in self.edges)


def metric_graph(vertices, edges, boundary) -> MetricGraph:
    """Build a MetricGraph with deterministic (sorted) iteration order.

    Edges may be Edge instances or (id, u, v, length) tuples.  No validation
    beyond construction; use validate() for invariant checking.
    """
    es = tuple(sorted(
        (e if isinstance(e, Edge) else Edge(e[0], e[1], e[2], float(e[3])) for e in edges),
        key=lambda e: e.id))
    return MetricGraph(tuple(sorted(vertices)), es, frozenset(boundary))


def adjacency(g: MetricGraph):
    """Vertex -> list of incident edges (sorted by edge id).

    Cached on the instance: rehashing a large frozen graph per call (as an
    lru_cache key would) is quadratic in practice.
    """
    adj = getattr(g, "_adjacency", None)
    if adj is None:
        adj = {v: [] for v in g.vertices}
        for e in g.edges:
            adj[e.u].append(e)
            adj[e.v].append(e)
        object.__setattr__(g, "_adjacency", adj)
    return adj


def degree(g: MetricGraph, v) -> int:
    return len(adjacency(g)[v])


def _components(vertices, edges):
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        if e.u in parent and e.v in parent:
            ru, rv = find(e.u), find(e.v)
            if ru != rv:
                parent[ru] = rv
    groups = {}
    for v in vertices:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def validate(g: MetricGraph) -> list:
    """Return a list of invariant violations (empty iff g is valid).

    Never raises: each violation is a human-readable string naming the
    offending element.
    """
    problems = []
    seen = set()
    for v in g.vertices:
        if v in seen:
            problems.append(f"duplicate vertex id {v!r}")
        seen.add(v)
    vset = set(g.vertices)

    eids = set()
    deg = {v: 0 for v in g.vertices}
    usable = []
    for e in g.edges:
        if e.id in eids:
            problems.append(f"duplicate edge id {e.id!r}")
        eids.add(e.id)
        if e.u not in vset or e.v not in vset:
            problems.append(f"edge {e.id!r} references unknown vertex")
            continue
        if e.u == e.v:
            problems.append(f"edge {e.id!r} is a self-loop at {e.u!r}")
            continue
        if math.isnan(e.length) or not (0 < e.length < math.inf):
            problems.append(f"edge {e.id!r} has invalid length {e.length}")
            continue
        deg[e.u] += 1
        deg[e.v] += 1
        usable.append(e)

    for b in sorted(g.boundary):
        if b not in vset:
            problems.append(f"boundary vertex {b!r} not in graph")

    for v in g.vertices:
        if deg[v] == 0:
            problems.append(f"isolated vertex {v!r}")
        elif deg[v] == 1 and v not in g.boundary:
            problems.append(f"degree-1 vertex {v!r} not in boundary")

    if g.vertices and len(_components(g.vertices, usable)) > 1:
        problems.append("graph is not connected")
    return problems


def require_valid(g: MetricGraph):
    problems = validate(g)
    if problems:
        raise ValueError("invalid metric graph: " + "; ".join(problems))


def multi_source_distance(g: MetricGraph, sources) -> dict:
    """Exact shortest path-length distance from the source set to every vertex."""
    sources = set(sources)
    if not sources:
        raise ValueError("source set is empty")
    unknown = sources - set(g.vertices)
    if unknown:
        raise KeyError(f"unknown vertex ids: {sorted(unknown)}")
    dist = {v: math.inf for v in g.vertices}
    heap = []
    for s in sorted(sources):
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    adj = adjacency(g)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for e in adj[v]:
            w = e.other(v)
            nd = d + e.length
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def epsilon_subgraph(g: MetricGraph, eps: float):
    """Edges of g containing a point at distance >= eps from the boundary.

    An edge (u,v) of length l attains max interior boundary distance
    (d(u) + d(v) + l)/2, so it is kept exactly when that quantity is >= eps.
    Returns (subgraph, relative boundary): the relative boundary consists of
    vertices that are leaves of g or that lost an incident edge.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    dist = multi_source_distance(g, g.boundary)
    keep = [e for e in g.edges if (dist[e.u] + dist[e.v] + e.length) / 2.0 >= eps]
    if not keep:
        raise ValueError(f"eps={eps} exceeds the inradius; epsilon-subgraph is empty")
    kept_ids = {e.id for e in keep}
    verts = sorted({w for e in keep for w in (e.u, e.v)})
    adj = adjacency(g)
    rel = set()
    for v in verts:
        inc = adj[v]
        if len(inc) == 1 or any(e.id not in kept_ids for e in inc):
            rel.add(v)
    return metric_graph(verts, keep, rel), frozenset(rel)


def split_boundary_vertices(g: MetricGraph):
    """Replace every boundary vertex of degree K > 1 with K degree-1 copies.

    Returns (split graph, identification map copy -> original).  The map
    includes identity entries for untouched boundary vertices.  Harmonic
    solves on the split graph with equal values on copies reproduce solves
    on g.
    """
    adj = adjacency(g)
    split = {v for v in g.boundary if len(adj[v]) > 1}
    ident = {v: v for v in g.boundary if v not in split}
    repl = {}  # (edge id, original endpoint) -> copy
    for v in sorted(split):
        for k, e in enumerate(sorted(adj[v], key=lambda e: e.id)):
            c = f"{v}@{k}"
            ident[c] = v
            repl[(e.id, v)] = c
    verts = [v for v in g.vertices if v not in split]
    verts.extend(c for c, o in ident.items() if c != o)
    edges = []
    for e in g.edges:
        u = repl.get((e.id, e.u), e.u)
        v = repl.get((e.id, e.v), e.v)
        edges.append(Edge(e.id, u, v, e.length))
    boundary = set(ident.keys())
    return metric_graph(verts, edges, boundary), ident


def min_vertex_separator(g: MetricGraph, S, T):
    """Minimum-cardinality vertex set whose removal disconnects S from T.

    Unit-capacity vertex-split max-flow (Menger).  Raises if some edge joins
    S and T directly (no separator exists).
    """
    S, T = set(S), set(T)
    if not S or not T:
        raise ValueError("S and T must be nonempty")
    if S & T:
        raise ValueError("S and T must be disjoint")
    unknown = (S | T) - set(g.vertices)
    if unknown:
        raise KeyError(f"unknown vertex ids: {sorted(unknown)}")
    for e in g.edges:
        if (e.u in S and e.v in T) or (e.v in S and e.u in T):
            raise ValueError(
                f"inseparable pair: edge {e.id!r} joins S and T with no intermediate vertex")

    inf = float("inf")
    D = nx.DiGraph()
    for v in g.vertices:
        cap = inf if (v in S or v in T) else 1
        D.add_edge(("in", v), ("out", v), capacity=cap)
    for e in g.edges:
        D.add_edge(("out", e.u), ("in", e.v), capacity=inf)
        D.add_edge(("out", e.v), ("in", e.u), capacity=inf)
    for s in S:
        D.add_edge("src", ("in", s), capacity=inf)
    for t in T:
        D.add_edge(("out", t), "snk", capacity=inf)
    _, (reach, _) = nx.minimum_cut(D, "src", "snk")
    W = sorted(v for v in g.vertices
               if ("in", v) in reach and ("out", v) not in reach)

    # connectivity recheck after removal
    remaining = [v for v in g.vertices if v not in W]
    edges = [e for e in g.edges if e.u not in W and e.v not in W]
    for comp in _components(remaining, edges):
        cs = set(comp)
        if cs & S and cs & T:
            raise RuntimeError("separator verification failed")
    return W
