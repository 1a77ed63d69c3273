"""Weighted undirected graphs, exact shortest-path metrics and flow primitives.

Weights are :class:`fractions.Fraction`.  A :class:`Metric` stores its
distances as an integer matrix over a common denominator, so every distance
and every ratio of distances is an exact rational.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DisconnectedGraphError, GraphFormatError, ResourceCeilingError

Edge = tuple[int, int]

# float64 represents every integer below 2**53 exactly
_EXACT_FLOAT_LIMIT = 2**53


def _as_weight(w) -> Fraction:
    if isinstance(w, float):
        w = Fraction(w).limit_denominator(10**9)
    w = Fraction(w)
    if w <= 0:
        raise ValueError(f"edge weight must be positive, got {w}")
    return w


def _key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Finite undirected graph on vertices ``0..vertex_count-1``.

    Parallel edges collapse to their minimum weight.  Self-loops are
    rejected.  Instances are treated as immutable.
    """

    __slots__ = ("vertex_count", "_weights", "_edges", "_adj", "labels")

    def __init__(self, vertex_count: int, edges: Iterable = (), labels: Mapping[int, str] | None = None):
        if vertex_count < 0:
            raise ValueError("vertex_count must be nonnegative")
        self.vertex_count = int(vertex_count)
        weights: dict[Edge, Fraction] = {}
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = Fraction(1)
            else:
                u, v, w = e
                w = _as_weight(w)
            u, v = int(u), int(v)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{vertex_count - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            k = _key(u, v)
            if k not in weights or w < weights[k]:
                weights[k] = w
        self._weights = weights
        self._edges = tuple(sorted(weights))
        adj: list[list[int]] = [[] for _ in range(vertex_count)]
        for u, v in self._edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        labels = dict(labels or {})
        for v in labels:
            if not 0 <= v < vertex_count:
                raise ValueError(f"label on unknown vertex {v}")
        self.labels = labels

    # -- basic queries -------------------------------------------------

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Edges as sorted ``(u, v)`` pairs with ``u < v``."""
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def weighted_edges(self) -> list[tuple[int, int, Fraction]]:
        return [(u, v, self._weights[(u, v)]) for u, v in self._edges]

    def weight(self, u: int, v: int) -> Fraction:
        return self._weights[_key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return _key(u, v) in self._weights

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def is_unit(self) -> bool:
        return all(w == 1 for w in self._weights.values())

    def is_connected(self) -> bool:
        return len(connected_components(self)) <= 1

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self._weights == other._weights
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.vertex_count, self._edges))

    def __repr__(self):
        return f"Graph(V={self.vertex_count}, E={self.edge_count})"

    def same_structure(self, other: "Graph") -> bool:
        """Equal vertex set and weighted edge set, labels ignored."""
        return self.vertex_count == other.vertex_count and self._weights == other._weights

    def with_labels(self, labels: Mapping[int, str]) -> "Graph":
        return Graph(self.vertex_count, self.weighted_edges(), labels)

    def relabel(self, perm) -> "Graph":
        """Graph with vertex ``v`` renamed ``perm[v]``; ``perm`` is a permutation."""
        perm = list(perm)
        if sorted(perm) != list(range(self.vertex_count)):
            raise ValueError("perm is not a permutation of the vertex ids")
        return Graph(
            self.vertex_count,
            [(perm[u], perm[v], w) for u, v, w in self.weighted_edges()],
            {perm[v]: t for v, t in self.labels.items()},
        )

    def add_edges(self, edges: Iterable) -> "Graph":
        return Graph(self.vertex_count, list(self.weighted_edges()) + list(edges), self.labels)

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``vertices``; also returns new-id -> old-id list."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        sub = [
            (index[u], index[v], w)
            for u, v, w in self.weighted_edges()
            if u in index and v in index
        ]
        return Graph(len(keep), sub), keep


class Metric:
    """Dense symmetric distance matrix ``d = matrix / scale`` with integer entries."""

    __slots__ = ("matrix", "scale")

    def __init__(self, matrix, scale: int = 1):
        m = np.array(matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("metric matrix must be square")
        if scale < 1:
            raise ValueError("scale must be a positive integer")
        m.setflags(write=False)
        self.matrix = m
        self.scale = int(scale)

    @classmethod
    def from_rationals(cls, rows) -> "Metric":
        rows = [[Fraction(x) for x in row] for row in rows]
        den = 1
        for row in rows:
            for x in row:
                den = math.lcm(den, x.denominator)
        mat = [[int(x * den) for x in row] for row in rows]
        return cls(np.array(mat, dtype=np.int64).reshape(len(rows), len(rows)), den)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def d(self, x: int, y: int) -> Fraction:
        return Fraction(int(self.matrix[x, y]), self.scale)

    def as_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.scale) for v in row] for row in self.matrix]

    def scaled(self, factor) -> "Metric":
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        g = math.gcd(factor.numerator, self.scale * factor.denominator)
        return Metric(self.matrix * (factor.numerator // g), self.scale * factor.denominator // g)

    def violations(self) -> list[str]:
        """Metric axioms that fail, as human-readable strings (empty when valid)."""
        m = self.matrix
        out = []
        if np.any(np.diag(m) != 0):
            out.append("nonzero diagonal")
        if np.any(m != m.T):
            out.append("asymmetric")
        if np.any(m < 0):
            out.append("negative distance")
        n = self.size
        if n and n <= 400:
            # d(x, z) <= d(x, y) + d(y, z) for all triples
            via = (m[:, :, None] + m[None, :, :]).min(axis=1)
            if np.any(m > via):
                out.append("triangle inequality")
        return out

    def __eq__(self, other):
        if not isinstance(other, Metric):
            return NotImplemented
        return self.size == other.size and np.array_equal(
            self.matrix * other.scale, other.matrix * self.scale
        )

    def __repr__(self):
        return f"Metric(size={self.size}, scale={self.scale})"


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * g.vertex_count
    comps = []
    for r in range(g.vertex_count):
        if seen[r]:
            continue
        seen[r] = True
        comp = [r]
        q = deque([r])
        while q:
            u = q.popleft()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    q.append(v)
        comps.append(sorted(comp))
    return comps


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distances from ``source``; unreachable vertices get -1."""
    dist = [-1] * g.vertex_count
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def shortest_path_metric(g: Graph) -> Metric:
    """Exact all-pairs shortest-path metric of a connected graph."""
    n = g.vertex_count
    if n == 0:
        return Metric(np.zeros((0, 0), dtype=np.int64))
    if not g.is_connected():
        raise DisconnectedGraphError("shortest-path metric requires a connected graph")
    if n == 1:
        return Metric(np.zeros((1, 1), dtype=np.int64))
    wedges = g.weighted_edges()
    den = 1
    for _, _, w in wedges:
        den = math.lcm(den, w.denominator)
    ints = [int(w * den) for _, _, w in wedges]
    if sum(ints) >= _EXACT_FLOAT_LIMIT:
        raise ResourceCeilingError("path lengths exceed the exactly representable range")
    rows = [u for u, _, _ in wedges]
    cols = [v for _, v, _ in wedges]
    adj = csr_matrix((np.array(ints, dtype=np.float64), (rows, cols)), shape=(n, n))
    unit = all(x == ints[0] for x in ints)
    if unit:
        d = shortest_path(adj, method="D", directed=False, unweighted=True) * ints[0]
    else:
        d = shortest_path(adj, method="D", directed=False)
    mat = np.rint(d).astype(np.int64)
    g_all = int(np.gcd.reduce(mat.ravel()))
    if g_all > 1:
        common = math.gcd(g_all, den)
        mat //= common
        den //= common
    return Metric(mat, den)


def subdivide(g: Graph, k: int) -> Graph:
    """Replace every edge by a path of ``k`` unit edges.

    Original ids are kept.  The ``k-1`` fresh vertices of edge ``(u, v)``
    (taken in sorted edge order) get ids ``V + idx*(k-1) + t`` and the label
    ``sub:u-v:t`` numbered from the ``u`` end.
    """
    if k < 1:
        raise ValueError("subdivision length must be at least 1")
    if not g.is_unit():
        raise ValueError("subdivision is defined for unit-weight graphs")
    if k == 1:
        return Graph(g.vertex_count, g.edges, g.labels)
    n = g.vertex_count
    edges = []
    labels = dict(g.labels)
    nxt = n
    for u, v in g.edges:
        chain = [u] + list(range(nxt, nxt + k - 1)) + [v]
        for t in range(k - 1):
            labels[nxt + t] = f"sub:{u}-{v}:{t}"
        nxt += k - 1
        edges.extend(zip(chain, chain[1:]))
    return Graph(nxt, edges, labels)


def contract_edge(g: Graph, e: Edge) -> tuple[Graph, dict[int, int]]:
    """Contract edge ``e``; returns the minor and the old-id -> new-id map.

    The merged vertex takes the smaller endpoint's position and label.
    Surviving vertices keep their relative order.
    """
    u, v = _key(*e)
    if not g.has_edge(u, v):
        raise ValueError(f"edge {e} not in graph")
    rename = {}
    nxt = 0
    for x in range(g.vertex_count):
        if x == v:
            continue
        rename[x] = nxt
        nxt += 1
    rename[v] = rename[u]
    edges = []
    for a, b, w in g.weighted_edges():
        a2, b2 = rename[a], rename[b]
        if a2 != b2:
            edges.append((a2, b2, w))
    labels = {}
    for x, tag in g.labels.items():
        if x == v and u in g.labels:
            continue
        labels[rename[x]] = tag
    return Graph(nxt, edges, labels), rename


def max_edge_disjoint_paths(g: Graph, s: int, t: int) -> tuple[int, list[list[int]]]:
    """Maximum number of pairwise edge-disjoint ``s``-``t`` paths.

    Unit-capacity Edmonds-Karp on the undirected graph; the net flow is then
    peeled into simple paths.  Search order always prefers the lowest vertex
    id, so the output is deterministic.
    """
    if s == t:
        raise ValueError("source and sink must differ")
    n = g.vertex_count
    if not (0 <= s < n and 0 <= t < n):
        raise ValueError("terminal outside vertex range")
    # flow[(u, v)] in {-1, 0, 1}: net flow along u -> v
    flow: dict[Edge, int] = {}

    def f(u, v):
        if u < v:
            return flow.get((u, v), 0)
        return -flow.get((v, u), 0)

    def push(u, v):
        if u < v:
            flow[(u, v)] = flow.get((u, v), 0) + 1
        else:
            flow[(v, u)] = flow.get((v, u), 0) - 1

    value = 0
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in g.neighbors(u):
                # residual capacity of u -> v is 1 - f(u, v)
                if v not in parent and f(u, v) < 1:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            break
        v = t
        while parent[v] is not None:
            push(parent[v], v)
            v = parent[v]
        value += 1

    out_arcs: dict[int, list[int]] = {}
    for (u, v), x in flow.items():
        if x == 1:
            out_arcs.setdefault(u, []).append(v)
        elif x == -1:
            out_arcs.setdefault(v, []).append(u)
    for arcs in out_arcs.values():
        arcs.sort(reverse=True)

    paths = []
    for _ in range(value):
        walk = [s]
        pos = {s: 0}
        while walk[-1] != t:
            nxt = out_arcs[walk[-1]].pop()
            if nxt in pos:
                # drop the flow cycle just closed
                for x in walk[pos[nxt] + 1 :]:
                    del pos[x]
                del walk[pos[nxt] + 1 :]
            else:
                pos[nxt] = len(walk)
                walk.append(nxt)
        paths.append(walk)
    return value, paths


# -- text formats ------------------------------------------------------


def _fmt_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def format_graph(g: Graph) -> str:
    lines = [f"graph {g.vertex_count} {g.edge_count}"]
    for u, v, w in g.weighted_edges():
        lines.append(f"{u} {v} {_fmt_weight(w)}")
    for v in sorted(g.labels):
        lines.append(f"label {v} {g.labels[v]}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphFormatError("empty graph text")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "graph":
        raise GraphFormatError(f"bad header line: {lines[0]!r}")
    try:
        nv, ne = int(head[1]), int(head[2])
    except ValueError as exc:
        raise GraphFormatError(f"bad header line: {lines[0]!r}") from exc
    edges, labels = [], {}
    for ln in lines[1:]:
        parts = ln.split(maxsplit=2)
        try:
            if parts[0] == "label":
                if len(parts) != 3:
                    raise GraphFormatError(f"bad label line: {ln!r}")
                labels[int(parts[1])] = parts[2]
            else:
                if len(parts) != 3:
                    raise GraphFormatError(f"bad edge line: {ln!r}")
                edges.append((int(parts[0]), int(parts[1]), Fraction(parts[2])))
        except (ValueError, ZeroDivisionError) as exc:
            raise GraphFormatError(f"bad line: {ln!r}") from exc
    if len(edges) != ne:
        raise GraphFormatError(f"header declares {ne} edges, found {len(edges)}")
    try:
        g = Graph(nv, edges, labels)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
    if g.edge_count != ne:
        raise GraphFormatError("duplicate edges in graph text")
    return g


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def to_dot(g: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in range(g.vertex_count):
        if v in g.labels:
            lines.append(f'  {v} [label="{v}\\n{g.labels[v]}"];')
        else:
            lines.append(f"  {v};")
    for u, v, w in g.weighted_edges():
        if w == 1:
            lines.append(f"  {u} -- {v};")
        else:
            lines.append(f'  {u} -- {v} [label="{_fmt_weight(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
