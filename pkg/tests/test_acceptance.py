"""Acceptance checks.  Run with ``pytest tests/test_acceptance.py -s`` to see
one PASS/FAIL line per criterion."""

import functools
import math
import random
import statistics
import subprocess
import sys
import time
from fractions import Fraction

import networkx as nx
import numpy as np

from minorlb.constructions import complete, complete_bipartite, cycle, g_nm, grid, h1, h_i, subdivide
from minorlb.embeddings import (
    distortion,
    dominates,
    frt_sample,
    min_distortion_over_trees,
    random_map_distortions,
    unit_trees,
)
from minorlb.graph import Graph, bfs_distances, max_edge_disjoint_paths, shortest_path_metric
from minorlb.gridsep import GridSubset, boundary_far_vertices, far_boundary_hypothesis, rows_cols_intersected_not_filled
from minorlb.minors import has_minor, verify_witness
from minorlb.treedecomp import (
    balanced_partition,
    greedy_decomposition,
    h_i_decomposition,
    make_nice,
    nice_violations,
    terminal_bag,
    validate,
    width,
)

MASTER_SEED = 12345


def verdict(number, title, ok, detail, elapsed=None, budget=None):
    timed = budget is None or elapsed <= budget
    status = "PASS" if ok and timed else "FAIL"
    clock = "" if elapsed is None else f" [{elapsed:.2f}s / {budget}s]"
    print(f"\ncriterion {number:>2} {title}: {status} {detail}{clock}")
    assert ok, detail
    assert timed, f"over the {budget}s budget"


def test_c01_h1_structure():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (2, 3):
        tg, _, _ = h1(n)
        count, paths = max_edge_disjoint_paths(tg.graph, tg.source, tg.sink)
        lengths = {len(p) - 1 for p in paths}
        good = tg.graph.edge_count == 2 * n**3 + n**2 and count == n * n and lengths == {2 * n + 1}
        ok &= good
        parts.append(f"n={n}: E={tg.graph.edge_count} paths={count} len={sorted(lengths)}")
    verdict(1, "H_1 structure", ok, "; ".join(parts), time.perf_counter() - t0, 1)


def test_c02_h_i_structure():
    t0 = time.perf_counter()
    tg, cat = h_i(2, 2)
    g = tg.graph
    dist = bfs_distances(g, tg.source)[tg.sink]
    copies = cat.copies[1]
    seen, disjoint = set(), True
    for c in copies:
        disjoint &= not (seen & c.edges)
        seen |= c.edges
    target = g_nm(2, 5)
    ref = nx.Graph(list(target.edges))
    equal = all(
        c.length == 5
        and nx.is_isomorphic(nx.Graph(list(c.edges)), ref)
        and {tuple(sorted((c.witness()[u], c.witness()[v]))) for u, v in c.edges} == set(target.edges)
        for c in copies
    )
    ok = g.edge_count == 400 and dist == 25 and len(copies) >= 4 and disjoint and equal
    detail = f"E={g.edge_count} d(s,t)={dist} copies={len(copies)} disjoint={disjoint} equal_to_g_nm(2,5)={equal}"
    verdict(2, "H_i structure", ok, detail, time.perf_counter() - t0, 5)


def test_c03_treewidth_bound():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n, i in ((2, 1), (3, 1), (2, 2)):
        tg, _ = h_i(n, i)
        d = h_i_decomposition(n, i)
        viol = validate(d, tg.graph)
        w = width(d)
        tb = terminal_bag(d, tg.source, tg.sink)
        nd = make_nice(d, tg.graph)
        nice_ok = nice_violations(nd) == [] and validate(nd, tg.graph) == [] and width(nd) == w
        good = not viol and w <= n + 1 and tb is not None and nice_ok
        ok &= good
        parts.append(f"({n},{i}): violations={len(viol)} width={w} st_bag={tb} nice_ok={nice_ok}")
    verdict(3, "treewidth bound", ok, "; ".join(parts), time.perf_counter() - t0, 10)


@functools.lru_cache(maxsize=None)
def tree_oracle(k, cap):
    src = subdivide(complete(3), k)
    return min_distortion_over_trees(shortest_path_metric(src), cap, source_graph=src)


def _random_maps_over_trees(source, sizes, total, seed):
    """Minimum float distortion over ``total`` random injective maps spread across every tree of the given sizes."""
    trees = [t for k in sizes for t in unit_trees(k)]
    per = math.ceil(total / len(trees))
    rng = np.random.default_rng(seed)
    best, drawn = math.inf, 0
    for t in trees:
        host = shortest_path_metric(t)
        for start in range(0, per, 50000):
            batch = min(50000, per - start)
            best = min(best, float(random_map_distortions(source, host, batch, rng).min()))
            drawn += batch
    return best, drawn


def test_c04_girth_oracle_bound():
    t0 = time.perf_counter()
    c9 = cycle(9)
    m9 = shortest_path_metric(c9)
    bound = Fraction(9, 3) - 1
    # literal check: every map of 9 points into <= 7 tree vertices collapses a pair
    _, _, v7 = tree_oracle(3, 7)
    lit_best, lit_drawn = _random_maps_over_trees(m9, range(2, 8), 10**6, MASTER_SEED)
    literal = v7 >= bound and lit_best >= v7
    # non-vacuous companions on trees large enough for injective maps
    _, _, v9 = tree_oracle(3, 9)
    tree10, _, v10 = tree_oracle(3, 10)
    comp_best, comp_drawn = _random_maps_over_trees(m9, (9, 10), 10**6, MASTER_SEED + 1)
    companion = v9 >= bound and v10 >= bound and comp_best >= float(v10) - 1e-9
    ok = literal and companion
    detail = (
        f"trees<=7: min={v7} (vacuous, no injective map), {lit_drawn} random maps best={lit_best}; "
        f"trees<=9: min={v9}; trees<=10: min={v10} (host degree seq {sorted(tree10.degree(v) for v in range(tree10.vertex_count))}); "
        f"{comp_drawn} random injective maps on all 9/10-vertex trees best={comp_best:.6g}; bound={bound}"
    )
    verdict(4, "girth/oracle bound", ok, detail, time.perf_counter() - t0, 600)


# frozen regression anchors, cross-checked by brute force during development
ANCHORS = {(2, 6): Fraction(5), (2, 7): Fraction(3), (3, 7): math.inf, (3, 9): Fraction(8), (3, 10): Fraction(4)}


def test_c05_subdivision_consistency():
    t0 = time.perf_counter()
    parts, ok = [], True
    for (k, cap), anchor in ANCHORS.items():
        _, emb, val = tree_oracle(k, cap)
        floor = Fraction(k, 6) - Fraction(1, 2)
        good = val >= floor and val == anchor and distortion(emb).distortion == val
        ok &= good
        parts.append(f"C_{3 * k} trees<={cap}: {val} (>= {floor}, anchor {anchor})")
    verdict(5, "subdivision consistency", ok, "; ".join(parts), time.perf_counter() - t0, 600)


def _random_blob(rng, n, size):
    start = (rng.randrange(n), rng.randrange(n))
    cells, frontier = {start}, [start]
    while len(cells) < size:
        r, c = rng.choice(frontier)
        dr, dc = rng.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
        nb = (r + dr, c + dc)
        if 0 <= nb[0] < n and 0 <= nb[1] < n and nb not in cells:
            cells.add(nb)
            frontier.append(nb)
    return GridSubset(n, cells)


def _random_subset(rng, n, size):
    if rng.random() < 0.5:
        return _random_blob(rng, n, size)
    return GridSubset(n, rng.sample([(r, c) for r in range(n) for c in range(n)], size))


def test_c06_grid_separators():
    t0 = time.perf_counter()
    rng = random.Random(MASTER_SEED)
    n = 8
    bad3 = 0
    for _ in range(1000):
        a = _random_subset(rng, n, rng.randint(1, n * n // 2))
        rows, cols = rows_cols_intersected_not_filled(a)
        bad3 += max(rows, cols) ** 2 < a.beta_squared
    bad4, trials4 = 0, 0
    while trials4 < 1000:
        a = _random_subset(rng, n, rng.randint(16, n * n // 2))
        b = set(rng.sample(sorted(a.cells), 1))
        if not far_boundary_hypothesis(a, b):
            continue
        trials4 += 1
        bad4 += 4 * len(boundary_far_vertices(a, b)) ** 2 < a.beta_squared
    ok = bad3 == 0 and bad4 == 0
    detail = f"row-col bound violations {bad3}/1000; far-boundary bound violations {bad4}/{trials4}"
    verdict(6, "grid separators", ok, detail, time.perf_counter() - t0, 30)


def test_c07_balanced_partition():
    t0 = time.perf_counter()
    cases = [("grid(4)", grid(4), None), ("grid(6)", grid(6), None), ("h1(2)", h1(2)[0].graph, None)]
    cases.append(("h1(2) explicit decomposition", h1(2)[0].graph, h_i_decomposition(2, 1)))
    parts, ok = [], True
    for name, g, d in cases:
        nd = make_nice(d if d is not None else greedy_decomposition(g), g)
        w = width(nd)
        runs = bad = 0
        for target in range(1, g.vertex_count // 3 + 1):
            bp = balanced_partition(nd, target)
            inc = bp.incidence()
            good = (
                all(s.balanced for s in bp.splits)
                and all(len(c) <= w + 1 for c in bp.cut_bags)
                and 2 * sum(1 for x in inc if x <= 4) >= len(inc)
            )
            runs += 1
            bad += not good
        ok &= bad == 0
        parts.append(f"{name}: {runs} targets, {bad} failures")
    verdict(7, "balanced partition", ok, "; ".join(parts), time.perf_counter() - t0, 10)


def test_c08_domination():
    t0 = time.perf_counter()
    m = shortest_path_metric(grid(8))
    fails = sum(not dominates(frt_sample(m, MASTER_SEED + t).embedding) for t in range(10**4))
    verdict(8, "domination", fails == 0, f"{10**4 - fails}/{10**4} FRT samples dominate", time.perf_counter() - t0, 120)


def _edge_means(n, trials=200):
    g = grid(n)
    m = shortest_path_metric(g)
    return [float(distortion(frt_sample(m, MASTER_SEED + t, g).embedding).mean_edge_distortion()) for t in range(trials)]


def test_c09_growth_trend():
    t0 = time.perf_counter()
    stats = {}
    for n in (4, 8, 16):
        xs = _edge_means(n)
        stats[n] = (statistics.fmean(xs), statistics.stdev(xs) / math.sqrt(len(xs)))
    gaps = []
    ok = True
    for a, b in ((4, 8), (8, 16)):
        gap = stats[b][0] - stats[a][0]
        pooled = math.hypot(stats[a][1], stats[b][1])
        gaps.append(f"{a}->{b}: gap={gap:.3f} ({gap / pooled:.1f} SE)")
        ok &= gap > 3 * pooled
    means = ", ".join(f"grid({n})={mu:.3f}±{se:.3f}" for n, (mu, se) in stats.items())
    verdict(9, "growth trend", ok, f"{means}; {'; '.join(gaps)}", time.perf_counter() - t0, 600)


def test_c10_minor_facts():
    t0 = time.perf_counter()
    results, witnesses_ok = [], True
    for n in (3, 4):
        found, w = has_minor(complete_bipartite(n), complete(n))
        witnesses_ok &= found and verify_witness(complete_bipartite(n), complete(n), w)
        results.append(found)
    k5, _ = has_minor(grid(3), complete(5))
    rng = random.Random(MASTER_SEED)
    tree_hits = 0
    for _ in range(1000):
        size = rng.randint(1, 20)
        t = Graph(size, [(v, rng.randrange(v)) for v in range(1, size)])
        found, w = has_minor(t, complete(3))
        tree_hits += found
        if found:
            witnesses_ok &= verify_witness(t, complete(3), w)
    ok = all(results) and not k5 and tree_hits == 0 and witnesses_ok
    detail = f"K33>K3={results[0]} K44>K4={results[1]} grid(3)>K5={k5} trees with K3 minor {tree_hits}/1000 witnesses_ok={witnesses_ok}"
    verdict(10, "minor facts", ok, detail, time.perf_counter() - t0, 60)


CLI_RUNS = [
    ["construct", "h_i", "--n", "2", "--i", "2", "--out", "{d}/h.graph"],
    ["construct", "grid", "--n", "4", "--format", "dot", "--out", "{d}/g.dot"],
    ["decompose", "--hi", "2", "2", "--nice", "--out", "{d}/h.td"],
    ["decompose", "grid:5", "--out", "{d}/g.td"],
    ["embed", "grid:8", "--frt", "--seed", "7", "--out", "{d}/e.json"],
    ["embed", "cycle:4", "--host", "path:4", "--map", "0,1,2,3", "--out", "{d}/m.json"],
    ["minor-check", "complete_bipartite:4", "K4", "--out", "{d}/k.json"],
    ["oracle", "cycle:6", "--trees", "7", "--out", "{d}/o.json"],
    ["oracle", "cycle:5", "--host", "path:6", "--out", "{d}/p.json"],
    ["experiment", "--family", "grid", "--n", "4", "8", "--trials", "20", "--seed", "42", "--out", "{d}/x.csv", "--summary", "{d}/x.json"],
    ["experiment", "--family", "h_i", "--n", "2", "--i", "2", "--trials", "5", "--seed", "1", "--out", "{d}/y.csv", "--summary", "{d}/y.json"],
]


def _cli_snapshot(base, k):
    d = base / str(k)
    d.mkdir()
    streams = []
    for argv in CLI_RUNS:
        res = subprocess.run(
            [sys.executable, "-m", "minorlb", *(a.format(d=d) for a in argv)], capture_output=True, check=False
        )
        streams.append((res.returncode, res.stdout.replace(str(d).encode(), b"D"), res.stderr))
    files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    return streams, files


def test_c11_determinism(tmp_path):
    t0 = time.perf_counter()
    a_streams, a_files = _cli_snapshot(tmp_path, 0)
    b_streams, b_files = _cli_snapshot(tmp_path, 1)
    codes = [c for c, _, _ in a_streams]
    ok = a_streams == b_streams and a_files == b_files and all(c == 0 for c in codes)
    differing = sorted(k for k in a_files if a_files[k] != b_files.get(k))
    detail = f"{len(CLI_RUNS)} commands, {len(a_files)} output files, exit codes {sorted(set(codes))}, differing={differing}"
    verdict(11, "determinism", ok, detail, time.perf_counter() - t0, 60)
