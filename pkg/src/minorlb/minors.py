"""Exact minor containment for small graphs.

If a host component carries branch sets at all, its leftover vertices can be
absorbed into adjacent branch sets without breaking anything.  So the search
only enumerates partitions of whole components into ``|V(minor)|`` connected
parts, then asks whether the quotient graph contains the minor under some
bijection.  Partitions are generated as restricted-growth label strings over a
BFS vertex order, which removes the relabelling symmetry of the parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from .constructions import complete, complete_bipartite, cycle
from .errors import ResourceCeilingError
from .graph import Graph, connected_components

DEFAULT_HOST_CAP = 25
MINOR_CAP = 6
DEFAULT_MAX_STATES = 10**8


@dataclass(frozen=True)
class MinorWitness:
    branch_sets: dict
    edge_witnesses: dict

    def to_dict(self) -> dict:
        return {
            "branch_sets": {str(k): sorted(v) for k, v in sorted(self.branch_sets.items())},
            "edge_witnesses": [
                {"minor_edge": list(e), "host_edge": list(h)} for e, h in sorted(self.edge_witnesses.items())
            ],
        }


def verify_witness(host: Graph, minor: Graph, w: MinorWitness) -> bool:
    """Check a witness directly against the definition of a minor."""
    if set(w.branch_sets) != set(range(minor.vertex_count)):
        return False
    seen: set = set()
    for a, bs in w.branch_sets.items():
        bs = set(bs)
        if not bs or bs & seen or any(not 0 <= x < host.vertex_count for x in bs):
            return False
        seen |= bs
        start = next(iter(bs))
        reach, stack = {start}, [start]
        while stack:
            x = stack.pop()
            for y in host.neighbors(x):
                if y in bs and y not in reach:
                    reach.add(y)
                    stack.append(y)
        if reach != bs:
            return False
    for a, b in minor.edges:
        he = w.edge_witnesses.get((a, b))
        if he is None:
            return False
        x, y = he
        if not host.has_edge(x, y):
            return False
        ba, bb = w.branch_sets[a], w.branch_sets[b]
        if not ((x in ba and y in bb) or (x in bb and y in ba)):
            return False
    return True


class _PartitionSearch:
    def __init__(self, host: Graph, vertices: list[int], minor: Graph, max_states: int):
        self.host = host
        self.k = minor.vertex_count
        self.minor = minor
        self.min_deg = min((minor.degree(v) for v in range(self.k)), default=0)
        self.order = self._bfs_order(vertices)
        self.pos = {v: i for i, v in enumerate(self.order)}
        self.label = {}
        self.max_states = max_states
        self.states = 0

    def _bfs_order(self, vertices):
        vs = set(vertices)
        order, seen = [], set()
        for r in sorted(vs):
            if r in seen:
                continue
            seen.add(r)
            queue = [r]
            while queue:
                u = queue.pop(0)
                order.append(u)
                for v in self.host.neighbors(u):
                    if v in vs and v not in seen:
                        seen.add(v)
                        queue.append(v)
        return order

    def _is_free(self, v, depth):
        return v in self.pos and self.pos[v] > depth

    def _feasible(self, depth: int, used: int) -> bool:
        g = self.host
        members: list[list[int]] = [[] for _ in range(used)]
        for v in self.order[: depth + 1]:
            members[self.label[v]].append(v)
        for b in range(used):
            group = members[b]
            target = set(group)
            # connected through own vertices and still-unlabelled ones
            reach, stack = {group[0]}, [group[0]]
            found = 1
            open_part = False
            while stack and found < len(target):
                x = stack.pop()
                for y in g.neighbors(x):
                    if y in reach:
                        continue
                    if y in target:
                        reach.add(y)
                        found += 1
                        stack.append(y)
                    elif self._is_free(y, depth):
                        reach.add(y)
                        stack.append(y)
            if found < len(target):
                return False
            for x in group:
                if any(self._is_free(y, depth) for y in g.neighbors(x)):
                    open_part = True
                    break
            if not open_part:
                adj = {self.label[y] for x in group for y in g.neighbors(x) if y in self.label and self.pos[y] <= depth}
                adj.discard(b)
                if len(adj) < self.min_deg:
                    return False
        return True

    def run(self):
        n = len(self.order)
        if n < self.k:
            return None
        return self._rec(0, 0)

    def _rec(self, depth: int, used: int):
        n = len(self.order)
        if depth == n:
            if used != self.k:
                return None
            return self._match()
        v = self.order[depth]
        top = min(used, self.k - 1)
        for lab in range(top + 1):
            nu = used + (lab == used)
            if self.k - nu > n - depth - 1:
                continue
            self.states += 1
            if self.states > self.max_states:
                raise ResourceCeilingError(f"minor search exceeded {self.max_states} states")
            self.label[v] = lab
            if self._feasible(depth, nu):
                hit = self._rec(depth + 1, nu)
                if hit is not None:
                    return hit
            del self.label[v]
        return None

    def _match(self):
        k = self.k
        q_edge = {}
        for u, v in self.host.edges:
            if u in self.label and v in self.label:
                a, b = self.label[u], self.label[v]
                if a != b:
                    q_edge.setdefault((min(a, b), max(a, b)), (u, v))
        for perm in permutations(range(k)):
            # minor vertex x -> part perm[x]
            ok = True
            for a, b in self.minor.edges:
                pa, pb = perm[a], perm[b]
                if (min(pa, pb), max(pa, pb)) not in q_edge:
                    ok = False
                    break
            if ok:
                parts: list[set] = [set() for _ in range(k)]
                for v, lab in self.label.items():
                    parts[lab].add(v)
                branch = {x: frozenset(parts[perm[x]]) for x in range(k)}
                edges = {}
                for a, b in self.minor.edges:
                    pa, pb = perm[a], perm[b]
                    edges[(a, b)] = q_edge[(min(pa, pb), max(pa, pb))]
                return MinorWitness(branch, edges)
        return None


def has_minor(
    host: Graph,
    minor: Graph,
    host_cap: int = DEFAULT_HOST_CAP,
    max_states: int = DEFAULT_MAX_STATES,
) -> tuple[bool, MinorWitness | None]:
    """Exhaustive minor test; a positive answer carries a re-verified witness."""
    k = minor.vertex_count
    if k > MINOR_CAP:
        raise ResourceCeilingError(f"minor has {k} vertices, above the cap {MINOR_CAP}")
    if host.vertex_count > host_cap:
        raise ResourceCeilingError(f"host has {host.vertex_count} vertices, above the cap {host_cap}")
    if k == 0:
        return True, MinorWitness({}, {})
    if k > host.vertex_count or minor.edge_count > host.edge_count:
        return False, None
    comps = connected_components(host)
    if len(connected_components(minor)) == 1:
        choices = [[c] for c in comps]
    else:
        choices = [list(sub) for r in range(1, len(comps) + 1) for sub in combinations(comps, r)]
    states = 0
    for chosen in choices:
        vertices = [v for c in chosen for v in c]
        if len(vertices) < k:
            continue
        search = _PartitionSearch(host, vertices, minor, max_states - states)
        w = search.run()
        states += search.states
        if w is not None:
            if not verify_witness(host, minor, w):
                raise AssertionError("minor search produced an invalid witness")
            return True, w
    return False, None


def named_graph(name: str) -> Graph:
    """Small named minors: ``K3``..``K6``, ``K33`` style bipartite, ``C4`` style cycles."""
    name = name.upper()
    if name.startswith("K") and len(name) == 3 and name[1] == name[2]:
        return complete_bipartite(int(name[1]))
    if name.startswith("K"):
        return complete(int(name[1:]))
    if name.startswith("C"):
        return cycle(int(name[1:]))
    raise ValueError(f"unknown graph name {name!r}")
