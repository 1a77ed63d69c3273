"""Distortion accounting, exhaustive minimum-distortion search, the
edge-colour histogram for ``H_i`` and a randomized dominating-tree sampler.

All ratios are exact :class:`~fractions.Fraction` values; an embedding that
identifies two source points has contraction ``math.inf``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from .errors import ResourceCeilingError
from .graph import Graph, Metric, shortest_path_metric

DEFAULT_ORACLE_CAP = 12
DEFAULT_MAX_STATES = 10**8
MAX_TREE_VERTICES = 10
CSV_FIELDS = ("family", "param", "seed", "mean_edge_distortion", "max_distortion")


@dataclass(frozen=True)
class Embedding:
    map: tuple
    source: Metric
    host: Metric
    source_graph: Graph | None = None

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(x) for x in self.map))
        if len(self.map) != self.source.size:
            raise ValueError("embedding map must cover every source point")
        if any(not 0 <= x < self.host.size for x in self.map):
            raise ValueError("embedding map points outside the host")
        if self.source_graph is not None and self.source_graph.vertex_count != self.source.size:
            raise ValueError("source graph does not match the source metric")


@dataclass
class DistortionReport:
    expansion: Fraction
    contraction: Fraction | float
    distortion: Fraction | float
    per_edge: dict = field(default_factory=dict)
    dominates: bool = False

    def mean_edge_distortion(self) -> Fraction:
        if not self.per_edge:
            raise ValueError("report carries no per-edge distortions")
        return sum(self.per_edge.values(), Fraction(0)) / len(self.per_edge)


def _pairs(n: int):
    return np.triu_indices(n, k=1)


def distortion(e: Embedding) -> DistortionReport:
    n = e.source.size
    mp = np.array(e.map, dtype=np.int64)
    ss, sh = e.source.scale, e.host.scale
    per_edge = {}
    if e.source_graph is not None:
        hm = e.host.matrix
        for u, v, w in e.source_graph.weighted_edges():
            per_edge[(u, v)] = Fraction(int(hm[mp[u], mp[v]]), sh) / w
    if n < 2:
        one = Fraction(1)
        return DistortionReport(one, one, one, per_edge, True)
    iu, ju = _pairs(n)
    src = e.source.matrix[iu, ju].astype(object) * sh
    hst = e.host.matrix[mp[iu], mp[ju]].astype(object) * ss
    if np.any(src <= 0):
        raise ValueError("source metric has a zero distance between distinct points")
    src_f = src.astype(np.float64)
    hst_f = hst.astype(np.float64)
    expansion = _exact_max_ratio_obj(hst, src, hst_f, src_f)
    if np.any(hst == 0):
        contraction = math.inf
    else:
        contraction = _exact_max_ratio_obj(src, hst, src_f, hst_f)
    dom = bool(np.all(hst >= src))
    # a collapsed map is infinite even when every pair collapses (0 * inf)
    total = math.inf if contraction == math.inf else expansion * contraction
    return DistortionReport(expansion, contraction, total, per_edge, dom)


def _exact_max_ratio_obj(num, den, num_f, den_f) -> Fraction:
    approx = num_f / den_f
    top = approx.max()
    cand = np.nonzero(approx >= top * (1 - 1e-9))[0]
    return max(Fraction(int(num[k]), int(den[k])) for k in cand)


def dominates(e: Embedding) -> bool:
    n = e.source.size
    if n < 2:
        return True
    mp = np.array(e.map, dtype=np.int64)
    iu, ju = _pairs(n)
    src = e.source.matrix[iu, ju].astype(object) * e.host.scale
    hst = e.host.matrix[mp[iu], mp[ju]].astype(object) * e.source.scale
    return bool(np.all(hst >= src))


# -- exhaustive minimum-distortion search ------------------------------


def _search_order(source: Metric, source_graph: Graph | None) -> list[int]:
    n = source.size
    if source_graph is not None:
        nbrs = [set(source_graph.neighbors(v)) for v in range(n)]
    else:
        m = source.matrix
        nbrs = []
        for v in range(n):
            row = [int(x) for k, x in enumerate(m[v]) if k != v]
            low = min(row) if row else 0
            nbrs.append({k for k in range(n) if k != v and m[v, k] == low})
    order = [max(range(n), key=lambda v: (len(nbrs[v]), -v))]
    rest = set(range(n)) - set(order)
    while rest:
        placed = set(order)
        v = max(rest, key=lambda x: (len(nbrs[x] & placed), len(nbrs[x]), -x))
        order.append(v)
        rest.discard(v)
    return order


class _BranchAndBound:
    """Injective vertex maps minimizing max(H/S) * max(S/H).

    Scale factors of the two metrics cancel in the product, so the search
    runs on the raw integer matrices.  Incumbent ``(p, q)`` means p/q; ``q=0``
    is infinity.
    """

    def __init__(self, source: Metric, host: Metric, order, max_states: int, incumbent=(1, 0)):
        self.S = source.matrix.tolist()
        self.H = host.matrix.tolist()
        self.ns, self.nh = source.size, host.size
        self.order = list(order)
        self.max_states = max_states
        self.best = incumbent
        self.best_map = None
        self.states = 0

    def run(self):
        self.assign = [None] * self.ns
        self.used = [False] * self.nh
        self._rec(0, 0, 1, 0, 1)
        return self.best_map, self.best

    def _rec(self, depth, a, b, c, d):
        # expansion a/b, contraction c/d over the assigned prefix
        if depth == self.ns:
            p, q = self.best
            if q == 0 or a * c * q < p * b * d:
                self.best = (a * c, b * d)
                self.best_map = list(self.assign)
            return
        x = self.order[depth]
        srow = self.S[x]
        placed = [(self.order[k], self.assign[self.order[k]]) for k in range(depth)]
        p, q = self.best
        for h in range(self.nh):
            if self.used[h]:
                continue
            self.states += 1
            if self.states > self.max_states:
                raise ResourceCeilingError(f"oracle exceeded {self.max_states} search states")
            hrow = self.H[h]
            na, nb, nc, nd = a, b, c, d
            for y, hy in placed:
                hd, sd = hrow[hy], srow[y]
                if hd * nb > na * sd:
                    na, nb = hd, sd
                if sd * nd > nc * hd:
                    nc, nd = sd, hd
            if q != 0 and na * nc * q >= p * nb * nd:
                continue
            self.used[h] = True
            self.assign[x] = h
            self._rec(depth + 1, na, nb, nc, nd)
            self.used[h] = False
            self.assign[x] = None
            p, q = self.best


def min_distortion_into_host(
    source: Metric,
    host: Metric,
    cap: int = DEFAULT_ORACLE_CAP,
    max_states: int = DEFAULT_MAX_STATES,
    source_graph: Graph | None = None,
) -> tuple[Embedding, DistortionReport]:
    """Exhaustive branch-and-bound for a minimum-distortion vertex map.

    Non-injective maps have infinite distortion, so only injective maps are
    searched; when the host is smaller than the source every map is infinite.
    """
    if source.size > cap:
        raise ResourceCeilingError(
            f"source has {source.size} points, above the exhaustive cap {cap}; "
            "use heuristic_distortion_into_host for a non-optimal answer"
        )
    if source.size > host.size or source.size < 2:
        mp = [v % max(host.size, 1) for v in range(source.size)]
        emb = Embedding(mp, source, host, source_graph)
        return emb, distortion(emb)
    order = _search_order(source, source_graph)
    bb = _BranchAndBound(source, host, order, max_states)
    mp, _ = bb.run()
    emb = Embedding(mp, source, host, source_graph)
    return emb, distortion(emb)


def heuristic_distortion_into_host(
    source: Metric,
    host: Metric,
    seed: int = 0,
    restarts: int = 20,
    source_graph: Graph | None = None,
) -> tuple[Embedding, DistortionReport]:
    """Random restarts plus swap descent.  Not optimal; for oversized inputs only."""
    warnings.warn("heuristic mode: the returned distortion is an upper bound, not an optimum", stacklevel=2)
    rng = np.random.default_rng(seed)
    ns, nh = source.size, host.size
    if ns > nh:
        emb = Embedding([v % nh for v in range(ns)], source, host, source_graph)
        return emb, distortion(emb)
    best_emb, best_val = None, math.inf
    for _ in range(restarts):
        mp = list(rng.permutation(nh)[:ns])
        val = distortion(Embedding(mp, source, host)).distortion
        improved = True
        while improved:
            improved = False
            for a in range(ns):
                for h in range(nh):
                    trial = list(mp)
                    if h in trial:
                        k = trial.index(h)
                        trial[a], trial[k] = trial[k], trial[a]
                    else:
                        trial[a] = h
                    tv = distortion(Embedding(trial, source, host)).distortion
                    if tv < val:
                        mp, val, improved = trial, tv, True
        if val < best_val:
            best_emb, best_val = Embedding(mp, source, host, source_graph), val
    return best_emb, distortion(best_emb)


def unit_trees(k: int):
    """Non-isomorphic unit-weight trees on ``k`` vertices."""
    if k == 1:
        yield Graph(1)
        return
    for t in nx.nonisomorphic_trees(k):
        yield Graph(k, sorted(tuple(sorted(e)) for e in t.edges()))


def _weighted_variants(tree: Graph, max_weight: int):
    if max_weight <= 1:
        yield tree
        return
    edges = tree.edges
    for ws in np.ndindex(*([max_weight] * len(edges))):
        yield Graph(tree.vertex_count, [(u, v, w + 1) for (u, v), w in zip(edges, ws)])


def min_distortion_over_trees(
    source: Metric,
    max_tree_vertices: int,
    max_weight: int = 1,
    max_states: int = DEFAULT_MAX_STATES,
    source_graph: Graph | None = None,
) -> tuple[Graph, Embedding, Fraction | float]:
    """Minimum distortion over all trees with at most ``max_tree_vertices``
    vertices (edge weights in ``1..max_weight``), with a witness."""
    if max_tree_vertices > MAX_TREE_VERTICES:
        raise ResourceCeilingError(f"tree enumeration is capped at {MAX_TREE_VERTICES} vertices")
    if max_tree_vertices < 1:
        raise ValueError("max_tree_vertices must be at least 1")
    if source.size > DEFAULT_ORACLE_CAP:
        raise ResourceCeilingError(f"source has more than {DEFAULT_ORACLE_CAP} points")
    ns = source.size
    if ns > max_tree_vertices or ns < 2:
        tree = next(unit_trees(max_tree_vertices)) if ns >= 2 else Graph(1)
        host = shortest_path_metric(tree)
        emb, rep = min_distortion_into_host(source, host, source_graph=source_graph)
        return tree, emb, rep.distortion
    order = _search_order(source, source_graph)
    incumbent = (1, 0)
    best = None
    states = 0
    for k in range(ns, max_tree_vertices + 1):
        for base in unit_trees(k):
            for tree in _weighted_variants(base, max_weight):
                host = shortest_path_metric(tree)
                bb = _BranchAndBound(source, host, order, max_states - states, incumbent)
                mp, val = bb.run()
                states += bb.states
                if mp is not None:
                    incumbent = val
                    best = (tree, mp, host)
    tree, mp, host = best
    emb = Embedding(mp, source, host, source_graph)
    return tree, emb, distortion(emb).distortion


def random_map_distortions(source: Metric, host: Metric, count: int, rng, injective: bool = True) -> np.ndarray:
    """Float distortions of ``count`` uniformly random maps (independent cross-check)."""
    ns, nh = source.size, host.size
    if injective and ns <= nh:
        maps = np.argsort(rng.random((count, nh)), axis=1)[:, :ns]
    else:
        maps = rng.integers(0, nh, size=(count, ns))
    iu, ju = _pairs(ns)
    s = source.matrix[iu, ju].astype(np.float64) / source.scale
    h = host.matrix[maps[:, iu], maps[:, ju]].astype(np.float64) / host.scale
    with np.errstate(divide="ignore", invalid="ignore"):
        exp = (h / s).max(axis=1)
        con = np.where(h == 0, np.inf, s / np.where(h == 0, 1, h)).max(axis=1)
        return np.where(np.isinf(con), np.inf, exp * con)


# -- randomized dominating trees ---------------------------------------


@dataclass
class FRTSample:
    """A hierarchical partition of the source points and its tree metric.

    ``labels[i][x]`` is the cluster of point ``x`` at level ``i``; level
    ``top`` is a single cluster.  A level-``i`` cluster hangs below its
    level-``i+1`` cluster by an edge of length ``2**(i+1)`` (source units).
    """

    metric: Metric
    embedding: Embedding
    labels: list
    top: int
    seed: int

    def tree_graph(self) -> tuple[Graph, list[int]]:
        """The hierarchy as an explicit weighted tree and the leaf of each point."""
        scale = self.metric.scale
        ids = {}
        edges = []
        n = self.metric.size
        full = list(self.labels) + [np.zeros(n, dtype=np.int64)]
        for level in range(self.top, -1, -1):
            for x in range(n):
                key = (level, int(full[level][x]))
                if key not in ids:
                    ids[key] = len(ids)
                    if level < self.top:
                        parent = ids[(level + 1, int(full[level + 1][x]))]
                        edges.append((parent, ids[key], Fraction(2 ** (level + 1), scale)))
        leaves = [ids[(0, int(full[0][x]))] for x in range(n)]
        return Graph(len(ids), edges), leaves


def frt_sample(source: Metric, seed: int, source_graph: Graph | None = None) -> FRTSample:
    """Sample a dominating tree metric (random permutation, random radius in [1, 2))."""
    n = source.size
    d = source.matrix
    rng = np.random.default_rng(seed)
    if n < 2:
        m = Metric(np.zeros((n, n), dtype=np.int64), source.scale)
        return FRTSample(m, Embedding(range(n), source, m, source_graph), [np.zeros(n, dtype=np.int64)], 0, seed)
    diam = int(d.max())
    top = max(1, math.ceil(math.log2(diam)) + 1)
    perm = rng.permutation(n)
    beta = rng.uniform(1.0, 2.0)
    by_perm = d[:, perm]
    labels: list = [None] * top
    current = np.zeros(n, dtype=np.int64)
    for level in range(top - 1, -1, -1):
        radius = beta * 2.0 ** (level - 1)
        first = np.argmax(by_perm <= radius, axis=1)
        _, current = np.unique(current * n + first, return_inverse=True)
        current = current.reshape(n)
        labels[level] = current
    tree = np.zeros((n, n), dtype=np.int64)
    for level in range(top):
        diff = labels[level][:, None] != labels[level][None, :]
        tree[diff] = 2 ** (level + 3) - 4
    metric = Metric(tree, source.scale)
    return FRTSample(metric, Embedding(range(n), source, metric, source_graph), labels, top, seed)


def frt_baseline(source: Metric, seed: int, source_graph: Graph | None = None) -> tuple[Metric, Embedding]:
    s = frt_sample(source, seed, source_graph)
    return s.metric, s.embedding


def edge_stretches(source_graph: Graph, sample_metric: Metric) -> tuple[Fraction, Fraction]:
    """Mean and max per-edge distortion of an identity map onto ``sample_metric``."""
    m = sample_metric.matrix
    total = Fraction(0)
    top = Fraction(0)
    for u, v, w in source_graph.weighted_edges():
        r = Fraction(int(m[u, v]), sample_metric.scale) / w
        total += r
        if r > top:
            top = r
    return total / source_graph.edge_count, top


# -- colour accounting -------------------------------------------------


def color_threshold(n: int, j: int) -> Fraction:
    return Fraction((2 * n + 1) ** j, 6) - Fraction(1, 2)


@dataclass
class ColorHistogram:
    n: int
    i: int
    thresholds: list
    colors: list
    floors: list


def color_histogram(graph: Graph, n: int, i: int, report: DistortionReport) -> ColorHistogram:
    """Count edges per colour ``j = 1..i-1`` and the guaranteed floors ``m^(i-j-1) n^(2j)``."""
    if set(report.per_edge) != set(graph.edges):
        raise ValueError("report per-edge distortions do not match the graph's edge set")
    m = 2 * n**3 + n**2
    thresholds = [color_threshold(n, j) for j in range(1, i)]
    colors = [sum(1 for r in report.per_edge.values() if r >= th) for th in thresholds]
    floors = [m ** (i - j - 1) * n ** (2 * j) for j in range(1, i)]
    return ColorHistogram(n, i, thresholds, colors, floors)


def expected_edge_distortion(source_graph: Graph, samples: list) -> Fraction:
    """Mean over samples of the uniform-edge mean distortion."""
    if not samples:
        raise ValueError("no samples")
    edges = set(source_graph.edges)
    total = Fraction(0)
    for rep in samples:
        if set(rep.per_edge) != edges:
            raise ValueError("sample does not cover every source edge")
        total += rep.mean_edge_distortion()
    return total / len(samples)


def floored_tail_sum(source_graph: Graph, samples: list) -> Fraction:
    """sum_{k>=1} Prob(floor(X) >= k) for X the distortion of a uniform random edge."""
    if not samples:
        raise ValueError("no samples")
    floors = [math.floor(r) for rep in samples for r in rep.per_edge.values()]
    total = len(floors)
    out = Fraction(0)
    k = 1
    while True:
        hits = sum(1 for f in floors if f >= k)
        if not hits:
            break
        out += Fraction(hits, total)
        k += 1
    return out


# -- serialization ---------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _unfmt(s: str):
    return math.inf if s == "inf" else Fraction(s)


def report_to_dict(report: DistortionReport, histogram: ColorHistogram | None = None) -> dict:
    return {
        "expansion": _fmt(report.expansion),
        "contraction": _fmt(report.contraction),
        "distortion": _fmt(report.distortion),
        "dominates": report.dominates,
        "per_edge": [{"u": u, "v": v, "ratio": _fmt(r)} for (u, v), r in sorted(report.per_edge.items())],
        "colors": None if histogram is None else histogram.colors,
        "floors": None if histogram is None else histogram.floors,
    }


def report_from_dict(obj: dict) -> DistortionReport:
    per_edge = {(e["u"], e["v"]): _unfmt(e["ratio"]) for e in obj["per_edge"]}
    return DistortionReport(
        _unfmt(obj["expansion"]),
        _unfmt(obj["contraction"]),
        _unfmt(obj["distortion"]),
        per_edge,
        bool(obj["dominates"]),
    )


def histogram_to_dict(h: ColorHistogram) -> dict:
    return {
        "n": h.n,
        "i": h.i,
        "thresholds": [_fmt(t) for t in h.thresholds],
        "colors": h.colors,
        "floors": h.floors,
    }


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([r[k] for k in CSV_FIELDS])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
    out = []
    for r in reader:
        out.append(
            {
                "family": r["family"],
                "param": r["param"],
                "seed": int(r["seed"]),
                "mean_edge_distortion": _unfmt(r["mean_edge_distortion"]),
                "max_distortion": _unfmt(r["max_distortion"]),
            }
        )
    return out
