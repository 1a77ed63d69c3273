import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minorlb.constructions import complete, cycle, grid, h_i, path
from minorlb.embeddings import (
    CSV_FIELDS,
    Embedding,
    color_histogram,
    color_threshold,
    distortion,
    dominates,
    edge_stretches,
    expected_edge_distortion,
    floored_tail_sum,
    format_csv,
    frt_sample,
    heuristic_distortion_into_host,
    histogram_to_dict,
    min_distortion_into_host,
    min_distortion_over_trees,
    parse_csv,
    random_map_distortions,
    report_from_dict,
    report_to_dict,
    unit_trees,
)
from minorlb.errors import ResourceCeilingError
from minorlb.graph import Graph, Metric, shortest_path_metric

from oracles import floyd_warshall


def brute_distortion(src, host, mp):
    """Reference distortion from Fraction distance tables."""
    n = len(src)
    exp = con = Fraction(0)
    for x, y in itertools.combinations(range(n), 2):
        h = host[mp[x]][mp[y]]
        if h == 0:
            return math.inf
        exp = max(exp, h / src[x][y])
        con = max(con, src[x][y] / h)
    return exp * con


def brute_min(src_graph, host_graph):
    src, host = floyd_warshall(src_graph), floyd_warshall(host_graph)
    n, k = src_graph.vertex_count, host_graph.vertex_count
    return min(brute_distortion(src, host, mp) for mp in itertools.permutations(range(k), n))


def spm(g):
    return shortest_path_metric(g)


def test_identity_distortion():
    m = spm(grid(3))
    rep = distortion(Embedding(range(9), m, m))
    assert rep.distortion == 1 and rep.dominates


def test_c4_onto_path():
    c4, p4 = spm(cycle(4)), spm(path(4))
    rep = distortion(Embedding([0, 1, 2, 3], c4, p4, cycle(4)))
    assert (rep.expansion, rep.contraction, rep.distortion) == (3, 1, 3)
    assert rep.per_edge[(0, 3)] == 3 and rep.dominates


@pytest.mark.parametrize("lam", [2, 3, Fraction(1, 2), Fraction(7, 3)])
def test_host_scaling(lam):
    c4 = spm(cycle(4))
    host = spm(path(4))
    scaled = Metric.from_rationals([[lam * x for x in row] for row in host.as_fractions()])
    a = distortion(Embedding([0, 1, 2, 3], c4, host))
    b = distortion(Embedding([0, 1, 2, 3], c4, scaled))
    assert b.expansion == lam * a.expansion
    assert b.contraction == a.contraction / lam
    assert b.distortion == a.distortion


def test_collapse_is_infinite():
    rep = distortion(Embedding([0, 0, 1], spm(path(3)), spm(path(2))))
    assert rep.contraction == math.inf and rep.distortion == math.inf


def test_dominates_agrees_with_report():
    src = spm(cycle(5))
    half = Metric.from_rationals([[x / 2 for x in row] for row in src.as_fractions()])
    assert dominates(Embedding(range(5), src, src))
    assert not dominates(Embedding(range(5), src, half))
    assert not distortion(Embedding(range(5), src, half)).dominates


def test_embedding_validation():
    with pytest.raises(ValueError):
        Embedding([0, 1], spm(path(3)), spm(path(3)))
    with pytest.raises(ValueError):
        Embedding([0, 1, 5], spm(path(3)), spm(path(3)))


@st.composite
def small_weighted(draw, lo=2, hi=5):
    n = draw(st.integers(lo, hi))
    w = st.integers(1, 4)
    edges = [(v, draw(st.integers(0, v - 1)), draw(w)) for v in range(1, n)]
    for u, v in itertools.combinations(range(n), 2):
        if draw(st.booleans()):
            edges.append((u, v, draw(w)))
    return Graph(n, edges)


@settings(max_examples=40, deadline=None)
@given(small_weighted(), st.data())
def test_distortion_matches_brute_force(g, data):
    h = data.draw(small_weighted(lo=g.vertex_count, hi=6))
    mp = data.draw(st.lists(st.integers(0, h.vertex_count - 1), min_size=g.vertex_count, max_size=g.vertex_count))
    rep = distortion(Embedding(mp, spm(g), spm(h)))
    assert rep.distortion == brute_distortion(floyd_warshall(g), floyd_warshall(h), mp)
    if rep.distortion != math.inf:
        assert rep.distortion >= 1


@settings(max_examples=30, deadline=None)
@given(small_weighted(lo=2, hi=5), st.data())
def test_oracle_matches_exhaustive_enumeration(g, data):
    h = data.draw(small_weighted(lo=g.vertex_count, hi=6))
    emb, rep = min_distortion_into_host(spm(g), spm(h))
    assert rep.distortion == brute_min(g, h)
    assert distortion(emb).distortion == rep.distortion


def test_c6_into_star_is_three():
    star = Graph(7, [(0, k) for k in range(1, 7)])
    _, rep = min_distortion_into_host(spm(cycle(6)), spm(star))
    assert rep.distortion == 3 == brute_min(cycle(6), star)


def test_oracle_host_too_small_is_infinite():
    _, rep = min_distortion_into_host(spm(cycle(5)), spm(path(3)))
    assert rep.distortion == math.inf


def test_oracle_cap():
    with pytest.raises(ResourceCeilingError):
        min_distortion_into_host(spm(grid(4)), spm(grid(4)))
    with pytest.raises(ResourceCeilingError):
        min_distortion_over_trees(spm(cycle(6)), 11)


def test_oracle_state_limit():
    with pytest.raises(ResourceCeilingError):
        min_distortion_into_host(spm(cycle(8)), spm(path(10)), max_states=50)


def test_heuristic_warns_and_bounds():
    src, host = spm(cycle(5)), spm(path(6))
    with pytest.warns(UserWarning):
        _, h = heuristic_distortion_into_host(src, host, restarts=3)
    _, exact = min_distortion_into_host(src, host)
    assert h.distortion >= exact.distortion


def test_unit_tree_counts():
    assert [sum(1 for _ in unit_trees(k)) for k in range(1, 9)] == [1, 1, 1, 2, 3, 6, 11, 23]


# regression anchors, each cross-checked by independent enumeration
@pytest.mark.parametrize("cap,value", [(6, 5), (7, 3)])
def test_c6_tree_anchors(cap, value):
    tree, emb, val = min_distortion_over_trees(spm(cycle(6)), cap, source_graph=cycle(6))
    assert val == value
    assert distortion(emb).distortion == value
    assert tree.edge_count == tree.vertex_count - 1 and tree.is_connected()


def test_c6_tree_anchor_by_brute_force():
    best = min(brute_min(cycle(6), t) for t in unit_trees(6))
    assert best == 5


def test_weighted_trees_never_worse():
    _, _, unit = min_distortion_over_trees(spm(cycle(5)), 5)
    _, _, weighted = min_distortion_over_trees(spm(cycle(5)), 5, max_weight=2)
    assert weighted <= unit


def test_random_maps_never_beat_oracle():
    src = spm(cycle(6))
    star = spm(Graph(7, [(0, k) for k in range(1, 7)]))
    vals = random_map_distortions(src, star, 20000, np.random.default_rng(1))
    assert vals.min() >= 3 - 1e-9


def test_random_maps_match_exact():
    src, host = spm(cycle(5)), spm(path(7))
    rng = np.random.default_rng(3)
    vals = random_map_distortions(src, host, 5, np.random.default_rng(3))
    maps = np.argsort(rng.random((5, 7)), axis=1)[:, :5]
    for v, mp in zip(vals, maps):
        assert v == pytest.approx(float(distortion(Embedding(mp, src, host)).distortion))


def test_frt_uniform_metric_mean_stretch():
    m = spm(complete(4))
    total = Fraction(0)
    for seed in range(10000):
        total += sum(frt_sample(m, seed).metric.as_fractions()[0][1:], Fraction(0))
    assert total / 30000 == 4


def test_frt_deterministic():
    m = spm(grid(4))
    a, b = frt_sample(m, 17), frt_sample(m, 17)
    assert a.metric == b.metric


@pytest.mark.parametrize("seed", range(20))
def test_frt_dominates_and_tree_graph(seed):
    g = grid(4)
    s = frt_sample(spm(g), seed, g)
    assert dominates(s.embedding)
    assert s.metric.violations() == []
    tree, leaves = s.tree_graph()
    assert tree.edge_count == tree.vertex_count - 1 and tree.is_connected()
    tm = spm(tree)
    assert all(
        tm.d(leaves[x], leaves[y]) == s.metric.d(x, y) for x in range(16) for y in range(16)
    )


def test_frt_grid4_regression():
    g = grid(4)
    m = spm(g)
    reps = [distortion(frt_sample(m, seed, g).embedding) for seed in range(1000)]
    mean = expected_edge_distortion(g, reps)
    assert mean == Fraction(50399, 3000)
    assert floored_tail_sum(g, reps) == mean


def test_edge_stretches_agree():
    g = grid(4)
    s = frt_sample(spm(g), 5, g)
    mean, top = edge_stretches(g, s.metric)
    rep = distortion(s.embedding)
    assert mean == rep.mean_edge_distortion()
    assert top == max(rep.per_edge.values())


def test_color_threshold_values():
    assert color_threshold(2, 1) == Fraction(1, 3)
    assert color_threshold(2, 2) == Fraction(11, 3)


@pytest.fixture(scope="module")
def h22():
    return h_i(2, 2)[0].graph


def test_color_histogram_identity(h22):
    m = spm(h22)
    rep = distortion(Embedding(range(h22.vertex_count), m, m, h22))
    hist = color_histogram(h22, 2, 2, rep)
    assert hist.colors == [400] and hist.floors == [4]


def test_color_histogram_frt(h22):
    s = frt_sample(spm(h22), 0, h22)
    rep = distortion(s.embedding)
    hist = color_histogram(h22, 2, 2, rep)
    assert hist.colors == [400] and hist.floors == [4]
    assert histogram_to_dict(hist)["thresholds"] == ["1/3"]


def test_color_histogram_mismatch():
    rep = distortion(Embedding(range(3), spm(path(3)), spm(path(3)), path(3)))
    with pytest.raises(ValueError):
        color_histogram(cycle(3), 2, 2, rep)


def test_json_round_trip():
    c4 = cycle(4)
    rep = distortion(Embedding([0, 1, 2, 3], spm(c4), spm(path(4)), c4))
    obj = json.loads(json.dumps(report_to_dict(rep)))
    assert set(obj) == {"expansion", "contraction", "distortion", "dominates", "per_edge", "colors", "floors"}
    back = report_from_dict(obj)
    assert back == rep


def test_json_round_trip_infinite():
    g = path(3)
    rep = distortion(Embedding([0, 0, 1], spm(g), spm(path(2)), g))
    obj = report_to_dict(rep)
    assert obj["contraction"] == "inf"
    assert report_from_dict(obj).distortion == math.inf


def test_csv_round_trip():
    rows = [
        {"family": "grid", "param": "4", "seed": 7, "mean_edge_distortion": Fraction(5, 3), "max_distortion": Fraction(12)},
        {"family": "grid", "param": "8", "seed": 8, "mean_edge_distortion": Fraction(2), "max_distortion": Fraction(7, 2)},
    ]
    text = format_csv([{**r, "mean_edge_distortion": str(r["mean_edge_distortion"]), "max_distortion": str(r["max_distortion"])} for r in rows])
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    back = parse_csv(text)
    assert [Fraction(b["mean_edge_distortion"]) for b in back] == [r["mean_edge_distortion"] for r in rows]
    assert [b["seed"] for b in back] == [7, 8]


def test_csv_bad_header():
    with pytest.raises(ValueError):
        parse_csv("a,b\n1,2\n")


def test_random_maps_total_collapse_is_infinite():
    vals = random_map_distortions(spm(path(3)), spm(Graph(1)), 4, np.random.default_rng(0))
    assert np.all(np.isinf(vals))
