"""Command-line front end.

Graph arguments accept either a path to a graph text file or a builtin spec
``family:args`` such as ``grid:4``, ``g_nm:2,3``, ``h1:2`` or ``h_i:2,2``.

Exit codes: 0 ok, 1 property violation, 2 input error, 3 resource ceiling.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
from fractions import Fraction

from . import constructions as C
from .embeddings import (
    Embedding,
    color_histogram,
    distortion,
    format_csv,
    frt_sample,
    histogram_to_dict,
    min_distortion_into_host,
    min_distortion_over_trees,
    report_to_dict,
    floored_tail_sum,
)
from .errors import GraphFormatError, ResourceCeilingError
from .graph import format_graph, read_graph, shortest_path_metric, to_dot
from .minors import has_minor, named_graph
from .treedecomp import (
    format_td,
    greedy_decomposition,
    h_i_decomposition,
    make_nice,
    nice_violations,
    terminal_bag,
    validate,
    width,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CEILING = 0, 1, 2, 3


class InputError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def build_family(family: str, n=None, m=None, i=None, max_edges=C.DEFAULT_MAX_EDGES):
    """Returns ``(graph, extra)`` where ``extra`` holds terminals / (n, i) when relevant."""

    def need(x, name):
        if x is None:
            raise InputError(f"family {family} needs --{name}")
        return x

    if family == "grid":
        return C.grid(need(n, "n")), {}
    if family == "complete":
        return C.complete(need(n, "n")), {}
    if family == "complete_bipartite":
        return C.complete_bipartite(need(n, "n")), {}
    if family == "cycle":
        return C.cycle(need(n, "n")), {}
    if family == "path":
        return C.path(need(n, "n")), {}
    if family == "g_nm":
        return C.g_nm(need(n, "n"), need(m, "m")), {}
    if family == "h1":
        tg, _, _ = C.h1(need(n, "n"))
        return tg.graph, {"n": n, "i": 1, "source": tg.source, "sink": tg.sink}
    if family == "h_i":
        tg, _ = C.h_i(need(n, "n"), need(i, "i"), max_edges=max_edges)
        return tg.graph, {"n": n, "i": i, "source": tg.source, "sink": tg.sink}
    raise InputError(f"unknown family {family!r}")


def load_graph(arg: str, max_edges=C.DEFAULT_MAX_EDGES):
    if os.path.exists(arg):
        return read_graph(arg), {}
    if ":" in arg:
        family, _, rest = arg.partition(":")
        try:
            nums = [int(x) for x in rest.split(",") if x]
        except ValueError as exc:
            raise InputError(f"bad builtin spec {arg!r}") from exc
        if family == "g_nm":
            return build_family(family, *nums[:2], max_edges=max_edges)
        if family == "h_i":
            n, i = (nums + [None, None])[:2]
            return build_family(family, n=n, i=i, max_edges=max_edges)
        return build_family(family, n=nums[0] if nums else None, max_edges=max_edges)
    raise InputError(f"no such graph file or builtin spec: {arg!r}")


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands -------------------------------------------------------


def cmd_construct(args) -> int:
    g, _ = build_family(args.family, args.n, args.m, args.i, max_edges=args.max_edges)
    text = to_dot(g) if args.format == "dot" else format_graph(g)
    _write(args.out, text)
    counts = f"vertices {g.vertex_count} edges {g.edge_count}\n"
    if args.out in (None, "-"):
        sys.stderr.write(counts)
    else:
        if args.format != "dot":
            _write(os.path.splitext(args.out)[0] + ".dot", to_dot(g))
        sys.stdout.write(counts)
    return EXIT_OK


def cmd_decompose(args) -> int:
    if args.hi:
        n, i = args.hi
        tg, _ = C.h_i(n, i, max_edges=args.max_edges)
        g = tg.graph
        d = h_i_decomposition(n, i)
    elif args.graph:
        g, _ = load_graph(args.graph, args.max_edges)
        d = greedy_decomposition(g)
    else:
        raise InputError("give a graph or --hi N I")
    report = {"width": width(d), "bags": d.node_count}
    if args.hi:
        report["terminal_bag"] = terminal_bag(d, 0, 1)
        report["width_bound"] = args.hi[0] + 1
    viol = validate(d, g)
    report["violations"] = [[v.kind, str(v.witness)] for v in viol]
    status = EXIT_VIOLATION if viol else EXIT_OK
    if args.nice and not viol:
        d = make_nice(d, g)
        nv = nice_violations(d)
        report["nice_violations"] = nv
        report["nice_width"] = width(d)
        report["bags"] = d.node_count
        if nv or validate(d, g) or report["nice_width"] != report["width"]:
            status = EXIT_VIOLATION
    if args.hi and report["width"] > args.hi[0] + 1:
        status = EXIT_VIOLATION
    _write(args.out, format_td(d, g.vertex_count))
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    stream.write(_dump(report))
    return status


def cmd_embed(args) -> int:
    g, extra = load_graph(args.source, args.max_edges)
    src = shortest_path_metric(g)
    if args.frt:
        emb = frt_sample(src, args.seed, g).embedding
    elif args.host:
        hg, _ = load_graph(args.host, args.max_edges)
        host = shortest_path_metric(hg)
        if not args.map:
            raise InputError("--host needs --map")
        try:
            mp = [int(x) for x in args.map.split(",")]
        except ValueError as exc:
            raise InputError("--map must be comma separated vertex ids") from exc
        try:
            emb = Embedding(mp, src, host, g)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    else:
        raise InputError("give --frt or --host/--map")
    rep = distortion(emb)
    hist = None
    if extra.get("i"):
        hist = color_histogram(g, extra["n"], extra["i"], rep)
    _write(args.out, _dump(report_to_dict(rep, hist)))
    return EXIT_OK


def cmd_minor_check(args) -> int:
    host, _ = load_graph(args.host)
    if os.path.exists(args.minor):
        minor = read_graph(args.minor)
    else:
        try:
            minor = named_graph(args.minor)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    found, w = has_minor(host, minor, max_states=args.max_states)
    out = {"contains": found, "witness": w.to_dict() if w else None}
    _write(args.out, _dump(out))
    return EXIT_OK


def cmd_oracle(args) -> int:
    g, _ = load_graph(args.source)
    src = shortest_path_metric(g)
    if args.trees:
        tree, emb, val = min_distortion_over_trees(
            src, args.trees, max_weight=args.max_weight, max_states=args.max_states, source_graph=g
        )
        out = {
            "distortion": _fmt(val),
            "map": list(emb.map),
            "tree": {"vertices": tree.vertex_count, "edges": [[u, v, _fmt(w)] for u, v, w in tree.weighted_edges()]},
        }
    elif args.host:
        hg, _ = load_graph(args.host)
        emb, rep = min_distortion_into_host(src, shortest_path_metric(hg), max_states=args.max_states, source_graph=g)
        out = {"distortion": _fmt(rep.distortion), "map": list(emb.map)}
    else:
        raise InputError("give --trees K or --host GRAPH")
    _write(args.out, _dump(out))
    return EXIT_OK


def run_trials(g, extra, trials: int, seed: int):
    """One FRT sample per trial with stream seed ``seed + t``."""
    src = shortest_path_metric(g)
    reports = []
    for t in range(trials):
        sample = frt_sample(src, seed + t, g)
        rep = distortion(sample.embedding)
        reports.append((seed + t, rep))
    return src, reports


def cmd_experiment(args) -> int:
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    params = args.n or [None]
    rows, summary = [], {"family": args.family, "host": args.host, "seed": args.seed, "trials": args.trials, "runs": []}
    failures = 0
    for n in params:
        g, extra = build_family(args.family, n, args.m, args.i, max_edges=args.max_edges)
        param = f"n={n}"
        if args.family == "g_nm":
            param += f";m={args.m}"
        if args.family == "h_i":
            param += f";i={args.i}"
        _, reports = run_trials(g, extra, args.trials, args.seed)
        means = []
        for s, rep in reports:
            if not rep.dominates:
                failures += 1
            mean = rep.mean_edge_distortion()
            means.append(mean)
            rows.append(
                {
                    "family": args.family,
                    "param": param,
                    "seed": s,
                    "mean_edge_distortion": f"{float(mean):.12g}",
                    "max_distortion": f"{float(max(rep.per_edge.values())):.12g}",
                }
            )
        fm = [float(x) for x in means]
        sd = statistics.stdev(fm) if len(fm) > 1 else 0.0
        run = {
            "param": param,
            "vertices": g.vertex_count,
            "edges": g.edge_count,
            "mean_edge_distortion": _fmt(sum(means, Fraction(0)) / len(means)),
            "mean_edge_distortion_float": float(sum(means, Fraction(0)) / len(means)),
            "stddev": sd,
            "stderr": sd / math.sqrt(len(fm)),
            "tail_sum": _fmt(floored_tail_sum(g, [r for _, r in reports])),
            "domination_failures": sum(1 for _, r in reports if not r.dominates),
        }
        if extra.get("i"):
            hists = [color_histogram(g, extra["n"], extra["i"], r) for _, r in reports]
            h0 = histogram_to_dict(hists[0])
            run["colors"] = {
                "thresholds": h0["thresholds"],
                "floors": h0["floors"],
                "mean_counts": [
                    _fmt(Fraction(sum(h.colors[j] for h in hists), len(hists))) for j in range(len(h0["colors"]))
                ],
            }
        summary["runs"].append(run)
    _write(args.out, format_csv(rows))
    if args.summary:
        _write(args.summary, _dump(summary))
    elif args.out not in (None, "-"):
        sys.stdout.write(_dump(summary))
    return EXIT_VIOLATION if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minorlb", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-edges", type=int, default=C.DEFAULT_MAX_EDGES)
    common.add_argument("--max-states", type=int, default=10**8)
    sub = p.add_subparsers(dest="command", required=True)
    families = ["grid", "complete", "complete_bipartite", "cycle", "path", "g_nm", "h1", "h_i"]

    c = sub.add_parser("construct", parents=[common], help="generate a graph family")
    c.add_argument("family", choices=families)
    c.add_argument("--n", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--i", type=int)
    c.add_argument("--out")
    c.add_argument("--format", choices=["graph", "dot"], default="graph")
    c.set_defaults(func=cmd_construct)

    d = sub.add_parser("decompose", parents=[common], help="tree decomposition with validation report")
    d.add_argument("graph", nargs="?")
    d.add_argument("--hi", type=int, nargs=2, metavar=("N", "I"))
    d.add_argument("--nice", action="store_true")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    e = sub.add_parser("embed", parents=[common], help="distortion report of an embedding")
    e.add_argument("source")
    e.add_argument("--host")
    e.add_argument("--map")
    e.add_argument("--frt", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.add_argument("--format", choices=["json"], default="json")
    e.set_defaults(func=cmd_embed)

    m = sub.add_parser("minor-check", parents=[common], help="exhaustive minor containment")
    m.add_argument("host")
    m.add_argument("minor")
    m.add_argument("--out")
    m.add_argument("--format", choices=["json"], default="json")
    m.set_defaults(func=cmd_minor_check)

    x = sub.add_parser("experiment", parents=[common], help="FRT baseline sweep")
    x.add_argument("--family", choices=["grid", "h_i", "g_nm", "cycle"], required=True)
    x.add_argument("--n", type=int, nargs="+")
    x.add_argument("--m", type=int)
    x.add_argument("--i", type=int)
    x.add_argument("--trials", type=int, default=100)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--host", choices=["frt-tree"], default="frt-tree")
    x.add_argument("--out")
    x.add_argument("--summary")
    x.add_argument("--format", choices=["csv"], default="csv")
    x.set_defaults(func=cmd_experiment)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive minimum distortion")
    o.add_argument("source")
    o.add_argument("--host")
    o.add_argument("--trees", type=int)
    o.add_argument("--max-weight", type=int, default=1)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ResourceCeilingError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CEILING
    except (InputError, GraphFormatError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
