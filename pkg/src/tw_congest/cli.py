"""Command-line harness: build an instance, run one pipeline, emit JSON records.

Every flag can also be given through an environment variable named
``TW_CONGEST_<FLAG>`` (upper case, dashes as underscores); explicit flags
win over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import deque

from . import __version__
from .apps import GirthConfig, MatchingTrace, NotBipartite, girth_directed, girth_undirected, max_matching
from .generators import make_instance
from .graph import INF, derive_comm_graph, validate_tree_decomposition
from .labels import build_labels, decode
from .network import Network, ProductNetwork
from .oracles import oracle_apsp, oracle_balance, oracle_constrained_walks, oracle_girth, oracle_matching
from .separator import Disconnected, find_balanced_separator, profile
from .sim import SimulationError
from .treedecomp import DecompositionTrace, build_tree_decomposition
from .walks import BOT, ColoredConstraint, CountConstraint, build_product_graph, cdl_build, cdl_decode

FAMILIES = ("ktree", "path", "cycle", "grid", "star", "bipartite-ktree")
COMMANDS = ("separator", "td", "dl", "walks", "matching", "girth")
ENV_PREFIX = "TW_CONGEST_"

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _jsonable(x):
    if x == INF:
        return "inf"
    return x


def _diameter(comm) -> int:
    """Largest eccentricity over the components (0 for an empty graph)."""
    best = 0
    for s in comm.vertices:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in comm.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        best = max(best, max(dist.values()))
    return best


# ---------------------------------------------------------------------------
# pipelines: each returns (summary, verdict or None)


def _run_separator(g, args, cfg, net):
    sep = find_balanced_separator(g, None, cfg, args.seed, net)
    balanced = oracle_balance(derive_comm_graph(g), sep, None, cfg.alpha)
    bound = cfg.size_bound(sep.t) if sep.t else 0
    summary = {"size": len(sep), "t": sep.t, "step": sep.step, "size_bound": bound,
               "balance": balanced, "separator": sorted(sep)}
    verdict = (balanced and len(sep) <= bound) if args.verify else None
    return summary, verdict


def _run_td(g, args, cfg, net):
    trace = DecompositionTrace()
    td = build_tree_decomposition(g, cfg, args.seed, net, trace)
    report = validate_tree_decomposition(g, td)
    bound = trace.separator_bound(cfg) * (td.depth() + 1)
    summary = {"bags": len(td.bags), "width": td.width(), "depth": td.depth(), "max_t": trace.max_t,
               "width_bound": bound, "valid": report["valid"]}
    verdict = (report["valid"] and td.width() + 1 <= max(bound, 1)) if args.verify else None
    return summary, verdict


def _decomposition(g, args, cfg, net):
    if args.td == "build" or g.witness is None:
        return build_tree_decomposition(g, cfg, args.seed, net)
    return g.witness


def _run_dl(g, args, cfg, net):
    td = _decomposition(g, args, cfg, net)
    labels = build_labels(g, td, net)
    summary = {"max_label": max((len(lab) for lab in labels.values()), default=0)}
    verdict = None
    if args.verify:
        truth = oracle_apsp(g)
        bad = sum(decode(labels[u], labels[v]) != d for (u, v), d in truth.items())
        summary["mismatches"] = bad
        verdict = bad == 0
    return summary, verdict


def _run_walks(g, args, cfg, net):
    td = _decomposition(g, args, cfg, net)
    edges = sorted(g.gamma)
    if args.constraint == "colored":
        c = ColoredConstraint({e: i % 2 for i, e in enumerate(edges)}, palette=[0, 1])
    else:
        c = CountConstraint({e: int(i % 3 == 0) for i, e in enumerate(edges)}, 1)
    pg = build_product_graph(g, c)
    pnet = ProductNetwork(pg, net.bandwidth_factor, net.max_rounds)
    labels = cdl_build(g, c, td, pnet, pg)
    net.charge("cdl", pnet.stats.rounds, pnet.stats.messages_sent, pnet.stats.max_message_bits)
    states = [q for q in c.states if q != BOT]
    summary = {"constraint": args.constraint, "states": len(c.states),
               "logical_rounds": pnet.logical_rounds}
    verdict = None
    if args.verify:
        table = oracle_constrained_walks(g, c, len(c.states) * g.n)
        bad = 0
        for s in g.vertices:
            for t in g.vertices:
                for q in states:
                    bad += cdl_decode(q, labels[s], labels[t]) != table.get((s, t, q), INF)
        summary["mismatches"] = bad
        verdict = bad == 0
    return summary, verdict


def _run_matching(g, args, cfg, net):
    trace = MatchingTrace()
    m = max_matching(g, cfg, args.seed, net=net, leaf_size=args.leaf_size, trace=trace)
    summary = {"size": len(m), "levels": len(trace.levels), "augmentations": trace.augmentations,
               "central_pieces": trace.central_pieces}
    verdict = None
    if args.verify:
        best = oracle_matching(g)
        summary["oracle"] = best
        verdict = len(m) == best
    return summary, verdict


def _run_girth(g, args, cfg, net):
    if g.directed:
        td = _decomposition(g, args, cfg, net)
        value = girth_directed(g, td, net)
    else:
        value = girth_undirected(g, GirthConfig(c1=args.c1), args.seed, None, net)
    summary = {"girth": _jsonable(value)}
    verdict = None
    if args.verify:
        truth = oracle_girth(g)
        summary["oracle"] = _jsonable(truth)
        verdict = value == truth
    return summary, verdict


PIPELINES = {"separator": _run_separator, "td": _run_td, "dl": _run_dl, "walks": _run_walks,
             "matching": _run_matching, "girth": _run_girth}
DIRECTED_BY_DEFAULT = {"dl", "girth"}


# ---------------------------------------------------------------------------
# records


def run_one(command: str, args, n: int, k: int, seed: int) -> dict:
    directed = args.directed if args.directed is not None else command in DIRECTED_BY_DEFAULT
    family = args.family or ("bipartite-ktree" if command == "matching" else "ktree")
    g = make_instance(family, n, k, args.keep_prob, seed, (1, args.max_weight), directed)
    cfg = profile(args.profile)
    comm = derive_comm_graph(g)
    net = Network(comm, max_rounds=args.max_rounds)
    instance = {"family": family, "n": n, "k": k, "keep_prob": args.keep_prob, "directed": g.directed,
                "max_weight": args.max_weight, "vertices": g.n, "edges": g.m, "diameter": _diameter(comm)}
    record = {"command": command, "instance": instance, "seed": seed, "profile": cfg.name}
    local = argparse.Namespace(**vars(args))
    local.seed = seed
    try:
        summary, verdict = PIPELINES[command](g, local, cfg, net)
    except (SimulationError, NotBipartite, Disconnected) as exc:
        summary, verdict = {"error": f"{type(exc).__name__}: {exc}"}, "error"
    record["summary"] = summary
    if verdict is None:
        verdict = "not-run"
    elif verdict != "error":
        verdict = "pass" if verdict else "fail"
    record["verdict"] = verdict
    record["stats"] = net.stats.to_dict()
    return record


def _aggregate(records: list) -> list:
    cells: dict = {}
    for r in records:
        key = (r["instance"]["n"], r["instance"]["k"])
        cells.setdefault(key, []).append(r)
    rows = []
    for (n, k), rs in sorted(cells.items()):
        rounds = [r["stats"]["rounds"] for r in rs]
        rows.append({"n": n, "k": k, "runs": len(rs),
                     "mean_rounds": sum(rounds) / len(rounds), "max_rounds": max(rounds),
                     "mean_diameter": sum(r["instance"]["diameter"] for r in rs) / len(rs)})
    return rows


# ---------------------------------------------------------------------------
# argument handling


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"expected a probability in (0, 1], got {text}")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--keep-prob", type=_probability, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("paper", "desk"), default="desk")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--max-rounds", type=_positive, default=1_000_000)
    p.add_argument("--max-weight", type=_positive, default=1)
    p.add_argument("--td", choices=("witness", "build"), default="witness",
                   help="decomposition fed to labeling (generator witness or built)")
    p.add_argument("--out", help="append records to this file instead of stdout")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true", default=None)
    d.add_argument("--undirected", dest="directed", action="store_false")
    p.add_argument("--constraint", choices=("colored", "count"), default="colored")
    p.add_argument("--leaf-size", type=int, default=None)
    p.add_argument("--c1", type=_positive, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tw-congest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        p.add_argument("--n", type=_positive, default=100)
    p = sub.add_parser("sweep", help="run one pipeline over a grid of n and k")
    _common(p)
    p.add_argument("--algorithm", choices=COMMANDS, default="dl")
    p.add_argument("--ns", type=_positive, nargs="*", default=[50, 100, 200])
    p.add_argument("--ks", type=_positive, nargs="*", default=None)
    p.add_argument("--repeat", type=_positive, default=1)
    return parser


def _env_defaults(parser: argparse.ArgumentParser, argv: list) -> None:
    """Apply TW_CONGEST_* variables as defaults of the chosen subcommand."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((a for a in argv if a in sub.choices), None)
    if cmd is None:
        return
    target = sub.choices[cmd]
    overrides = {}
    for action in target._actions:
        if not action.option_strings or action.dest in ("help",):
            continue
        key = ENV_PREFIX + action.dest.upper()
        if key not in os.environ:
            continue
        raw = os.environ[key]
        try:
            if action.nargs == "*":
                value = [action.type(x) for x in raw.split()]
            elif isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                value = raw.lower() in ("1", "true", "yes")
            else:
                value = action.type(raw) if action.type else raw
            if action.choices is not None and value not in action.choices:
                raise ValueError(f"{value!r} not in {sorted(action.choices)}")
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{key}: {exc}") from exc
        overrides[action.dest] = value
    target.set_defaults(**overrides)


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _env_defaults(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"tw-congest: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    records = []
    try:
        if args.command == "sweep":
            ks = args.ks if args.ks is not None else [args.k]
            cell = 0
            for n in args.ns:
                for k in ks:
                    for _ in range(args.repeat):
                        records.append(run_one(args.algorithm, args, n, k, args.seed ^ cell))
                        cell += 1
            records.append({"command": "sweep", "algorithm": args.algorithm, "profile": args.profile,
                            "seed": args.seed, "aggregate": _aggregate(records)})
        else:
            records.append(run_one(args.command, args, args.n, args.k, args.seed))
    except ValueError as exc:
        print(f"tw-congest: {exc}", file=sys.stderr)
        return EXIT_USAGE

    lines = [json.dumps(r, sort_keys=True) for r in records]
    if args.out:
        with open(args.out, "a", encoding="utf-8") as fh:
            fh.write("".join(line + "\n" for line in lines))
    else:
        for line in lines:
            print(line)
    failed = any(r.get("verdict") in ("fail", "error") for r in records)
    return EXIT_MISMATCH if failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
