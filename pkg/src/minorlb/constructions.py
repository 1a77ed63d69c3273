"""Generators for the graph families used by the lower-bound constructions.

``h1(n)`` vertex numbering: ``s = 0``, ``t = 1``, left vertices ``2..n+1``,
right vertices ``n+2..2n+1``, then the interior vertices of the terminal
paths.  ``h_i(n, i)`` keeps the numbering of its top-level ``H_1`` and
appends the interiors of the edge copies in edge order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .errors import ResourceCeilingError
from .graph import Graph, subdivide

DEFAULT_MAX_EDGES = 10**6


def complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def complete_bipartite(n: int) -> Graph:
    """K_{n,n}: left side ``0..n-1``, right side ``n..2n-1``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return Graph(2 * n, [(a, n + b) for a in range(n) for b in range(n)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a simple cycle needs at least 3 vertices")
    return Graph(n, [(v, (v + 1) % n) for v in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Graph(n, [(v, v + 1) for v in range(n - 1)])


def grid(n: int) -> Graph:
    """n x n grid; vertex ``(row, col)`` has id ``row*n + col``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    edges = []
    for r in range(n):
        for c in range(n):
            v = r * n + c
            if c + 1 < n:
                edges.append((v, v + 1))
            if r + 1 < n:
                edges.append((v, v + n))
    return Graph(n * n, edges)


def g_nm(n: int, m: int) -> Graph:
    """The m-subdivision of K_{n,n}."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    return subdivide(complete_bipartite(n), m)


@dataclass(frozen=True)
class TerminalGraph:
    graph: Graph
    source: int
    sink: int

    def __post_init__(self):
        n = self.graph.vertex_count
        if self.source == self.sink or not (0 <= self.source < n and 0 <= self.sink < n):
            raise ValueError("terminals must be distinct valid vertices")


@dataclass(frozen=True)
class GCopy:
    """One tracked copy of ``G_{n, L}`` inside a host graph.

    ``paths[(a, b)]`` is the host vertex sequence replacing the K_{n,n} edge
    between left branch vertex ``a`` and right branch vertex ``b`` (indices
    into ``left``/``right``), oriented from left to right.
    """

    level: int
    left: tuple[int, ...]
    right: tuple[int, ...]
    paths: dict

    @property
    def n(self) -> int:
        return len(self.left)

    @property
    def length(self) -> int:
        return len(next(iter(self.paths.values()))) - 1

    @property
    def edges(self) -> frozenset:
        out = set()
        for p in self.paths.values():
            for u, v in zip(p, p[1:]):
                out.add((u, v) if u < v else (v, u))
        return frozenset(out)

    def witness(self) -> dict[int, int]:
        """Host vertex -> vertex of ``g_nm(n, length)`` under the construction map."""
        n, k = self.n, self.length
        phi = {}
        for a, x in enumerate(self.left):
            phi[x] = a
        for b, x in enumerate(self.right):
            phi[x] = n + b
        # g_nm numbers fresh vertices in sorted K_{n,n} edge order, i.e. (a, n+b) lexicographic
        nxt = 2 * n
        for a in range(n):
            for b in range(n):
                for x in self.paths[(a, b)][1:-1]:
                    phi[x] = nxt
                    nxt += 1
        if nxt != 2 * n + n * n * (k - 1):
            raise ValueError("copy paths have unequal lengths")
        return phi

    def mapped(self, vmap) -> "GCopy":
        return GCopy(
            self.level,
            tuple(vmap[x] for x in self.left),
            tuple(vmap[x] for x in self.right),
            {key: tuple(vmap[x] for x in p) for key, p in self.paths.items()},
        )


@dataclass
class CopyCatalog:
    """Tracked edge-disjoint copies of ``G_{n,(2n+1)^j}`` inside ``H_i``.

    ``copies[j]`` holds the copies of ``G_{n,(2n+1)^j}`` for ``j = 0..i-1``;
    level 0 copies are the K_{n,n} cores of the innermost ``H_1`` copies.
    ``paths`` are the ``n^(2i)`` edge-disjoint s-t paths of length ``(2n+1)^i``.
    """

    n: int
    i: int
    copies: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return 2 * self.n**3 + self.n**2

    def count(self, level: int) -> int:
        return len(self.copies.get(level, ()))

    def floor(self, level: int) -> int:
        """Guaranteed copy count ``m^(i-j-1) * n^(2j)`` at a level."""
        return self.m ** (self.i - level - 1) * self.n ** (2 * level)

    def top_level_claim(self) -> int:
        """At least ``n^(2(i-1))`` copies at the outermost level."""
        return self.n ** (2 * (self.i - 1))


def h1_paths(n: int) -> tuple[dict, dict]:
    """Vertex sequences of the terminal paths of ``h1(n)``.

    ``sp[(i, j)]`` runs from ``s`` to left vertex ``i``; ``tp[(i, j)]`` runs
    from right vertex ``i`` to ``t``; ``j`` indexes the n parallel paths.
    """
    s, t = 0, 1
    left = [2 + i for i in range(n)]
    right = [2 + n + j for j in range(n)]
    nxt = 2 + 2 * n
    sp, tp = {}, {}
    for i in range(n):
        for j in range(n):
            inner = list(range(nxt, nxt + n - 1))
            nxt += n - 1
            sp[(i, j)] = [s] + inner + [left[i]]
    for i in range(n):
        for j in range(n):
            inner = list(range(nxt, nxt + n - 1))
            nxt += n - 1
            tp[(i, j)] = [right[i]] + inner + [t]
    return sp, tp


def _h1_oriented_edges(n: int) -> list[tuple[int, int]]:
    """Edges of ``h1(n)`` in canonical order, oriented from s towards t."""
    sp, tp = h1_paths(n)
    out = []
    for i in range(n):
        for j in range(n):
            p = sp[(i, j)]
            out.extend(zip(p, p[1:]))
    for a in range(n):
        for b in range(n):
            out.append((2 + a, 2 + n + b))
    for i in range(n):
        for j in range(n):
            p = tp[(i, j)]
            out.extend(zip(p, p[1:]))
    return out


def h1_canonical_paths(n: int) -> list[list[int]]:
    """The n^2 paths ``sp[i][j] + (l_i, r_j) + tp[j][i]``."""
    sp, tp = h1_paths(n)
    return [sp[(i, j)] + tp[(j, i)] for i in range(n) for j in range(n)]


def _h1_labels(n: int) -> dict[int, str]:
    labels = {0: "source", 1: "sink"}
    for a in range(n):
        labels[2 + a] = f"left:{a}"
        labels[2 + n + a] = f"right:{a}"
    sp, tp = h1_paths(n)
    for (i, j), p in sp.items():
        for k, x in enumerate(p[1:-1], 1):
            labels[x] = f"sp:{i}:{j}:{k}"
    for (i, j), p in tp.items():
        for k, x in enumerate(p[1:-1], 1):
            labels[x] = f"tp:{i}:{j}:{k}"
    return labels


def h1(n: int) -> tuple[TerminalGraph, list[int], list[int]]:
    """K_{n,n} with each left vertex tied to ``s`` and each right vertex tied
    to ``t`` by n internally disjoint paths of length n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        warnings.warn("h1(1) is degenerate: K_{1,1} cannot contain any nontrivial minor", stacklevel=2)
    sp, _ = h1_paths(n)
    vcount = 2 + 2 * n + 2 * n * n * (n - 1)
    g = Graph(vcount, _h1_oriented_edges(n), _h1_labels(n))
    left = [2 + a for a in range(n)]
    right = [2 + n + b for b in range(n)]
    return TerminalGraph(g, 0, 1), left, right


def h_edge_count(n: int, i: int) -> int:
    return (2 * n**3 + n**2) ** i


def h_vertex_count(n: int, i: int) -> int:
    v1 = 2 + 2 * n + 2 * n * n * (n - 1)
    v = v1
    for _ in range(i - 1):
        v = v1 + h_edge_count(n, 1) * (v - 2)
    return v


@dataclass
class _HBuild:
    vertex_count: int
    edges: list
    paths: list
    copies: dict
    # per top-level H_1 edge: (oriented edge, local -> global vertex list of its copy)
    copy_maps: list


def _build_h(n: int, i: int, cache: dict) -> _HBuild:
    if i in cache:
        return cache[i]
    h1_edges = _h1_oriented_edges(n)
    v1 = 2 + 2 * n + 2 * n * n * (n - 1)
    if i == 1:
        core = GCopy(
            0,
            tuple(2 + a for a in range(n)),
            tuple(2 + n + b for b in range(n)),
            {(a, b): (2 + a, 2 + n + b) for a in range(n) for b in range(n)},
        )
        b = _HBuild(v1, list(h1_edges), h1_canonical_paths(n), {0: [core]}, [])
        cache[i] = b
        return b

    inner = _build_h(n, i - 1, cache)
    edges = []
    copy_maps = []
    nxt = v1
    copy_at = {}
    for a, b in h1_edges:
        vmap = [0] * inner.vertex_count
        vmap[0], vmap[1] = a, b
        for x in range(2, inner.vertex_count):
            vmap[x] = nxt
            nxt += 1
        copy_maps.append(((a, b), vmap))
        copy_at[(a, b)] = vmap
        edges.extend((vmap[x], vmap[y]) for x, y in inner.edges)

    def expand(p, q):
        # replace each H_1 edge of path p by the q-th inner path of its copy
        out = [p[0]]
        for x, y in zip(p, p[1:]):
            vmap = copy_at[(x, y)]
            out.extend(vmap[z] for z in inner.paths[q][1:])
        return out

    h1p = h1_canonical_paths(n)
    paths = [expand(p, q) for p in h1p for q in range(len(inner.paths))]

    copies: dict = {}
    for level, lst in inner.copies.items():
        acc = copies.setdefault(level, [])
        for _, vmap in copy_maps:
            acc.extend(c.mapped(vmap) for c in lst)
    top = []
    for q in range(len(inner.paths)):
        top.append(
            GCopy(
                i - 1,
                tuple(2 + a for a in range(n)),
                tuple(2 + n + b for b in range(n)),
                {(a, b): tuple(expand([2 + a, 2 + n + b], q)) for a in range(n) for b in range(n)},
            )
        )
    copies[i - 1] = top
    b = _HBuild(nxt, edges, paths, copies, copy_maps)
    cache[i] = b
    return b


def h_i(n: int, i: int, max_edges: int = DEFAULT_MAX_EDGES) -> tuple[TerminalGraph, CopyCatalog]:
    """Recursive family: every edge of ``h1(n)`` replaced by a copy of
    ``H_{i-1}`` whose terminals are the edge's endpoints (s-side first)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if i < 1:
        raise ValueError("i must be at least 1")
    if h_edge_count(n, i) > max_edges:
        raise ResourceCeilingError(
            f"H_{i}({n}) has {h_edge_count(n, i)} edges, above the ceiling {max_edges}"
        )
    if i == 1:
        tg, _, _ = h1(n)
    b = _build_h(n, i, {})
    if i == 1:
        g = tg.graph
    else:
        labels = {0: "source", 1: "sink"}
        for a in range(n):
            labels[2 + a] = f"left:{a}"
            labels[2 + n + a] = f"right:{a}"
        g = Graph(b.vertex_count, b.edges, labels)
    cat = CopyCatalog(n, i, {lvl: list(v) for lvl, v in sorted(b.copies.items())}, b.paths)
    return TerminalGraph(g, 0, 1), cat


def h_copy_maps(n: int, i: int) -> list:
    """For ``i >= 2``: top-level H_1 edges with the vertex map of their H_{i-1} copy."""
    if i < 2:
        return []
    return _build_h(n, i, {}).copy_maps


def verify_copy(g: Graph, c: GCopy) -> list[str]:
    """Check that a tracked copy really is ``G_{n, length}`` inside ``g``.

    Uses the construction witness: the map must be injective and carry the
    copy's edge set exactly onto the edge set of ``g_nm(n, length)``.
    """
    problems = []
    k = max(len(p) for p in c.paths.values()) - 1
    if set(c.paths) != {(a, b) for a in range(c.n) for b in range(len(c.right))}:
        problems.append("paths do not cover every left/right pair")
    for key, p in c.paths.items():
        a, b = key
        if len(p) != k + 1:
            problems.append(f"path {key} has length {len(p) - 1}, expected {k}")
        if p[0] != c.left[a] or p[-1] != c.right[b]:
            problems.append(f"path {key} has wrong endpoints")
        for u, v in zip(p, p[1:]):
            if not g.has_edge(u, v):
                problems.append(f"path {key} uses non-edge ({u}, {v})")
    if problems:
        return problems
    phi = c.witness()
    if len(set(phi.values())) != len(phi):
        problems.append("construction map is not injective")
    target = g_nm(c.n, k)
    image = set()
    for u, v in c.edges:
        x, y = phi[u], phi[v]
        image.add((x, y) if x < y else (y, x))
    if image != set(target.edges) or len(c.edges) != target.edge_count:
        problems.append("edge image differs from g_nm edge set")
    return problems
