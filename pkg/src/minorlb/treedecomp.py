"""Tree decompositions: validation, width, nice form, the explicit width-(n+1)
decomposition of ``H_i``, and the HSize-balanced partition of a nice
decomposition.

Decomposition text format (1-based ids, PACE style)::

    td <num_bags> <width+1> <num_graph_vertices>
    b <id> <v1> <v2> ...
    <id1> <id2>
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .constructions import DEFAULT_MAX_EDGES, h1_paths, h_copy_maps, h_edge_count
from .errors import GraphFormatError, ResourceCeilingError
from .graph import Graph, connected_components


@dataclass(frozen=True)
class TreeDecomposition:
    tree: Graph
    bags: tuple

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        if self.tree.vertex_count != len(self.bags):
            raise ValueError("one bag per tree node required")

    @property
    def node_count(self) -> int:
        return len(self.bags)

    def vertices(self) -> frozenset:
        return frozenset().union(*self.bags) if self.bags else frozenset()


@dataclass(frozen=True)
class NiceTreeDecomposition(TreeDecomposition):
    root: int = 0

    def children(self) -> list[list[int]]:
        """Children lists for the tree rooted at ``root``."""
        kids: list[list[int]] = [[] for _ in range(self.node_count)]
        seen = {self.root}
        q = deque([self.root])
        while q:
            u = q.popleft()
            for v in self.tree.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    kids[u].append(v)
                    q.append(v)
        return kids

    def node_kind(self, node: int, kids=None) -> str:
        kids = kids or self.children()
        c = kids[node]
        if not c:
            return "leaf"
        if len(c) == 2:
            return "join"
        if len(c) == 1:
            return "introduce" if len(self.bags[node]) > len(self.bags[c[0]]) else "forget"
        return "invalid"


class Violation(NamedTuple):
    kind: str
    witness: object


def _is_tree(t: Graph) -> bool:
    return t.vertex_count >= 1 and t.edge_count == t.vertex_count - 1 and t.is_connected()


def validate(d: TreeDecomposition, g: Graph) -> list[Violation]:
    """Every violated tree-decomposition condition, with a witness."""
    out = []
    if not _is_tree(d.tree):
        out.append(Violation("not-a-tree", (d.tree.vertex_count, d.tree.edge_count)))
    occ: dict[int, list[int]] = {}
    for i, bag in enumerate(d.bags):
        for v in bag:
            if not 0 <= v < g.vertex_count:
                out.append(Violation("unknown-vertex", (i, v)))
            occ.setdefault(v, []).append(i)
    for v in range(g.vertex_count):
        if v not in occ:
            out.append(Violation("uncovered-vertex", v))
    for u, v in g.edges:
        if not any(v in d.bags[i] for i in occ.get(u, ())):
            out.append(Violation("uncovered-edge", (u, v)))
    for v, nodes in sorted(occ.items()):
        if len(nodes) == 1:
            continue
        members = set(nodes)
        seen = {nodes[0]}
        q = deque([nodes[0]])
        while q:
            x = q.popleft()
            for y in d.tree.neighbors(x):
                if y in members and y not in seen:
                    seen.add(y)
                    q.append(y)
        if len(seen) != len(members):
            out.append(Violation("disconnected-occurrence", (v, sorted(members - seen))))
    return out


def width(d: TreeDecomposition) -> int:
    if not d.bags:
        raise ValueError("empty decomposition has no width")
    return max(len(b) for b in d.bags) - 1


def nice_violations(d: NiceTreeDecomposition) -> list[str]:
    """Failures of the four nice-decomposition conditions."""
    out = []
    if not _is_tree(d.tree):
        return ["not a tree"]
    kids = d.children()
    for i, c in enumerate(kids):
        bag = d.bags[i]
        if len(c) > 2:
            out.append(f"node {i} has {len(c)} children")
        elif len(c) == 2:
            if d.bags[c[0]] != bag or d.bags[c[1]] != bag:
                out.append(f"join node {i} children bags differ")
        elif len(c) == 1:
            cb = d.bags[c[0]]
            if not ((bag < cb and len(bag) == len(cb) - 1) or (cb < bag and len(cb) == len(bag) - 1)):
                out.append(f"unary node {i} differs from its child by more than one vertex")
        elif len(bag) != 1:
            out.append(f"leaf {i} has bag of size {len(bag)}")
    return out


def _drop_empty_bags(d: TreeDecomposition) -> TreeDecomposition:
    bags = list(d.bags)
    adj = {i: set(d.tree.neighbors(i)) for i in range(len(bags))}
    for x in range(len(bags)):
        if bags[x] or len(adj) == 1:
            continue
        nbrs = sorted(adj.pop(x))
        for y in nbrs:
            adj[y].discard(x)
        if nbrs:
            hub = nbrs[0]
            for y in nbrs[1:]:
                adj[hub].add(y)
                adj[y].add(hub)
    keep = sorted(adj)
    index = {v: i for i, v in enumerate(keep)}
    edges = {(min(index[a], index[b]), max(index[a], index[b])) for a in keep for b in adj[a]}
    return TreeDecomposition(Graph(len(keep), edges), [bags[v] for v in keep])


def make_nice(d: TreeDecomposition, g: Graph) -> NiceTreeDecomposition:
    """Convert a valid decomposition into a nice one of the same width, rooted at node 0."""
    bad = validate(d, g)
    if bad:
        raise ValueError(f"input decomposition is invalid: {bad[:3]}")
    if g.vertex_count == 0:
        raise ValueError("graph has no vertices")
    d = _drop_empty_bags(d)
    # root the input at node 0
    kids: list[list[int]] = [[] for _ in range(d.node_count)]
    seen = {0}
    q = deque([0])
    while q:
        u = q.popleft()
        for v in d.tree.neighbors(u):
            if v not in seen:
                seen.add(v)
                kids[u].append(v)
                q.append(v)

    bags: list[frozenset] = [d.bags[0]]
    edges: list[tuple[int, int]] = []

    def new(parent: int, bag) -> int:
        bags.append(frozenset(bag))
        edges.append((parent, len(bags) - 1))
        return len(bags) - 1

    tasks: list = [("node", 0, 0)]

    def descend(nid: int, x: frozenset, c: int):
        y = d.bags[c]
        cur, bag = nid, set(x)
        for v in sorted(x - y):
            bag.discard(v)
            cur = new(cur, bag)
        for v in sorted(y - x):
            bag.add(v)
            cur = new(cur, bag)
        tasks.append(("node", c, cur))

    while tasks:
        kind, orig, nid = tasks.pop()
        x = d.bags[orig] if kind == "node" else bags[nid]
        ch = kids[orig] if kind == "node" else orig
        if not ch:
            cur, bag = nid, sorted(x)
            while len(bag) > 1:
                bag.pop()
                cur = new(cur, bag)
        elif len(ch) == 1:
            descend(nid, x, ch[0])
        else:
            left = new(nid, x)
            right = new(nid, x)
            descend(left, x, ch[0])
            if len(ch) == 2:
                descend(right, x, ch[1])
            else:
                tasks.append(("join", ch[1:], right))
    return NiceTreeDecomposition(Graph(len(bags), edges), bags, 0)


def greedy_decomposition(g: Graph) -> TreeDecomposition:
    """Min-degree elimination decomposition (an upper bound on treewidth)."""
    n = g.vertex_count
    if n == 0:
        raise ValueError("graph has no vertices")
    adj = {v: set(g.neighbors(v)) for v in range(n)}
    order, bag_of = [], {}
    remaining = set(range(n))
    while remaining:
        v = min(remaining, key=lambda x: (len(adj[x]), x))
        nb = adj[v]
        bag_of[v] = frozenset(nb | {v})
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
        remaining.discard(v)
        order.append(v)
        del adj[v]
    pos = {v: i for i, v in enumerate(order)}
    edges = []
    roots = []
    for v in order:
        later = [u for u in bag_of[v] if u != v]
        if later:
            p = min(later, key=pos.__getitem__)
            edges.append((pos[v], pos[p]))
        else:
            roots.append(pos[v])
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    return TreeDecomposition(Graph(n, edges), [bag_of[v] for v in order])


def exact_treewidth(g: Graph, cap: int = 12) -> int:
    """Exact treewidth by dynamic programming over vertex subsets (small graphs only)."""
    n = g.vertex_count
    if n > cap:
        raise ValueError(f"exact treewidth search is limited to {cap} vertices")
    if n == 0:
        return -1
    nbr = [0] * n
    for u, v in g.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u

    def q_size(s: int, v: int) -> int:
        # vertices outside s | {v} reachable from v through s
        seen = 1 << v
        frontier = 1 << v
        reach = 0
        while frontier:
            x = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            nx = nbr[x] & ~seen
            seen |= nx
            reach |= nx & ~s
            frontier |= nx & s
        return bin(reach).count("1")

    full = (1 << n) - 1
    tw = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, full + 1):
        best = n
        rest = s
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            prev = s ^ low
            val = max(tw[prev], q_size(prev, v))
            if val < best:
                best = val
        tw[s] = best
    return tw[full]


# -- the explicit decomposition of H_i ---------------------------------


def _h1_decomposition(n: int) -> tuple[list, list]:
    s, t = 0, 1
    left = [2 + a for a in range(n)]
    right = [2 + n + b for b in range(n)]
    bags = [frozenset([s, t, *left])]
    edges = []
    for b in range(n):
        bags.append(frozenset([*left, t, right[b]]))
        edges.append((0, len(bags) - 1))
    sp, tp = h1_paths(n)
    for (a, _), p in sorted(sp.items()):
        first = len(bags)
        for k in range(len(p) - 1):
            bags.append(frozenset([p[k], p[k + 1], left[a]]))
            if k:
                edges.append((len(bags) - 2, len(bags) - 1))
        # the first path bag holds both s and the left vertex
        edges.append((0, first))
    for (b, _), p in sorted(tp.items()):
        for k in range(len(p) - 1):
            bags.append(frozenset([p[k], p[k + 1], right[b]]))
            if k:
                edges.append((len(bags) - 2, len(bags) - 1))
        # the last path bag holds both t and the right vertex
        edges.append((1 + b, len(bags) - 1))
    return bags, edges


def h_i_decomposition(n: int, i: int) -> TreeDecomposition:
    """Width-(n+1) decomposition of ``h_i(n, i)``; bag 0 contains both terminals."""
    if n < 1 or i < 1:
        raise ValueError("n and i must be at least 1")
    if h_edge_count(n, i) > DEFAULT_MAX_EDGES:
        raise ResourceCeilingError("H_i above the construction ceiling")
    base_bags, base_edges = _h1_decomposition(n)
    bags, edges = base_bags, base_edges
    for level in range(2, i + 1):
        inner_bags, inner_edges = bags, edges
        bags, edges = list(base_bags), list(base_edges)
        # build order matches h_i: each H_1 edge's copy of H_{level-1}
        for (a, b), vmap in h_copy_maps(n, level):
            host = next(k for k, bag in enumerate(base_bags) if a in bag and b in bag)
            off = len(bags)
            bags.extend(frozenset(vmap[x] for x in bag) for bag in inner_bags)
            edges.extend((off + x, off + y) for x, y in inner_edges)
            edges.append((host, off))
    return TreeDecomposition(Graph(len(bags), edges), bags)


# -- balanced partition ------------------------------------------------


def hsize(d: TreeDecomposition, nodes) -> int:
    """Number of distinct graph vertices in the bags of ``nodes``."""
    out = set()
    for i in nodes:
        out |= d.bags[i]
    return len(out)


@dataclass
class Split:
    edge: tuple[int, int]
    parent_hsize: int
    sides: tuple[int, int]

    @property
    def balanced(self) -> bool:
        return 3 * min(self.sides) >= self.parent_hsize


@dataclass
class BalancedPartition:
    pieces: list
    cut_bags: list
    deleted_edges: list
    splits: list = field(default_factory=list)
    hsizes: list = field(default_factory=list)

    def incidence(self) -> list[int]:
        """Deleted edges touching each piece."""
        where = {}
        for k, p in enumerate(self.pieces):
            for x in p:
                where[x] = k
        counts = [0] * len(self.pieces)
        for a, b in self.deleted_edges:
            counts[where[a]] += 1
            counts[where[b]] += 1
        return counts


def _side(tree: Graph, piece: set, start: int, cut: tuple[int, int]) -> set:
    seen = {start}
    q = deque([start])
    a, b = cut
    while q:
        u = q.popleft()
        for v in tree.neighbors(u):
            if v in piece and v not in seen and {u, v} != {a, b}:
                seen.add(v)
                q.append(v)
    return seen


def balanced_partition(d: TreeDecomposition, target: int) -> BalancedPartition:
    """Split the decomposition tree into ``ceil(n_G / (3*target))`` pieces.

    Each step cuts the piece of largest HSize at the edge minimizing the
    larger side's HSize (ties: lowest edge index in ``d.tree.edges``).
    """
    total = len(d.vertices())
    if target < 1 or 3 * target > total:
        raise ValueError(f"need 1 <= 3*target <= {total}, got target={target}")
    want = math.ceil(total / (3 * target))
    pieces = [set(range(d.node_count))]
    hs = [total]
    deleted, splits = [], []
    edge_ids = {e: k for k, e in enumerate(d.tree.edges)}
    while len(pieces) < want:
        k = max(range(len(pieces)), key=lambda j: (hs[j], -min(pieces[j])))
        piece = pieces[k]
        best = None
        for e in d.tree.edges:
            a, b = e
            if a not in piece or b not in piece:
                continue
            side = _side(d.tree, piece, a, e)
            ha, hb = hsize(d, side), hsize(d, piece - side)
            key = (max(ha, hb), edge_ids[e])
            if best is None or key < best[0]:
                best = (key, e, side, ha, hb)
        if best is None:
            raise ValueError("largest piece is a single node and cannot be split")
        _, e, side, ha, hb = best
        splits.append(Split(e, hs[k], (ha, hb)))
        deleted.append(e)
        pieces[k] = side
        pieces.append(piece - side)
        hs[k] = ha
        hs.append(hb)
    cut_bags = []
    for a, b in deleted:
        x, y = d.bags[a], d.bags[b]
        cut_bags.append(x if len(x) <= len(y) else y)
    return BalancedPartition([frozenset(p) for p in pieces], cut_bags, deleted, splits, hs)


# -- text format -------------------------------------------------------


def format_td(d: TreeDecomposition, graph_vertices: int) -> str:
    w1 = max((len(b) for b in d.bags), default=0)
    lines = [f"td {d.node_count} {w1} {graph_vertices}"]
    for i, bag in enumerate(d.bags):
        lines.append(" ".join(["b", str(i + 1), *(str(v + 1) for v in sorted(bag))]))
    for a, b in d.tree.edges:
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def parse_td(text: str, nice: bool = False) -> tuple[TreeDecomposition, int]:
    """Parse decomposition text; returns the decomposition and the graph vertex count.

    With ``nice=True`` the result is a :class:`NiceTreeDecomposition` rooted at bag 1.
    """
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("c")]
    if not lines or lines[0][0] != "td" or len(lines[0]) != 4:
        raise GraphFormatError("missing td header")
    try:
        nb, w1, nv = (int(x) for x in lines[0][1:])
        bags: list = [None] * nb
        edges = []
        for parts in lines[1:]:
            if parts[0] == "b":
                bags[int(parts[1]) - 1] = frozenset(int(x) - 1 for x in parts[2:])
            elif len(parts) == 2:
                edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
            else:
                raise GraphFormatError(f"bad line: {' '.join(parts)!r}")
    except (ValueError, IndexError) as exc:
        raise GraphFormatError(str(exc)) from exc
    if any(b is None for b in bags):
        raise GraphFormatError("missing bag lines")
    if max((len(b) for b in bags), default=0) != w1:
        raise GraphFormatError("declared width does not match bags")
    try:
        tree = Graph(nb, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
    if nice:
        return NiceTreeDecomposition(tree, bags, 0), nv
    return TreeDecomposition(tree, bags), nv


def terminal_bag(d: TreeDecomposition, s: int, t: int) -> int | None:
    """Index of the first bag holding both ``s`` and ``t``."""
    return next((k for k, b in enumerate(d.bags) if s in b and t in b), None)


def separates(g: Graph, cut, a, b) -> bool:
    """True when every path between vertex sets ``a`` and ``b`` meets ``cut``."""
    cut = set(cut)
    a = set(a) - cut
    b = set(b) - cut
    if not a or not b:
        return True
    keep = [v for v in range(g.vertex_count) if v not in cut]
    sub, old = g.induced(keep)
    comp_of = {}
    for k, comp in enumerate(connected_components(sub)):
        for v in comp:
            comp_of[old[v]] = k
    return not ({comp_of[x] for x in a} & {comp_of[x] for x in b})
