"""``lossywl`` command line.

Subcommands: ``gen``, ``mpc``, ``bounds``, ``wl``, ``exact``. Exit codes:
0 success (also for infinite MPC), 2 usage or parameter error, 3 input parse
error, 4 resource cap exceeded (enumeration cap, generator retry budget).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .analysis import (
    Propagate,
    Retain,
    bound_retain,
    bound_ring,
    bound_transfer,
    exact_probability,
)
from .errors import (
    EmptyDataset,
    EnumerationTooLarge,
    GenerationExhausted,
    LossyWLError,
    MissingTargets,
    NodeOutOfRange,
    ParseError,
)
from .exact import nats
from .experiment import GEN_KINDS, ExperimentConfig, GenSpec, run
from .graph import Dataset
from .io import load_dataset, load_graph, save_graph
from .records import to_csv, to_json
from .transforms import Arch
from .wl import uniqueness_fraction, wl_graph_hash, wl_refine, wlc

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CAP = 0, 2, 3, 4
DEDUPE_NOTE = "isomorphic duplicates approximated by byte-identical serialisation"


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, list):
        return [_jsonable(y) for y in x]
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_gen_args(p, seed_flag: str) -> None:
    p.add_argument("--kind", choices=GEN_KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--ring-size", type=int)
    p.add_argument(seed_flag, type=int, default=0, dest="gen_seed")
    p.add_argument("--unique", action="store_true", help="planted ring must be the only short cycle at v")


def _gen_spec(args, count: int = 1) -> GenSpec:
    if args.n is None:
        raise argparse.ArgumentTypeError("--n is required for generated graphs")
    return GenSpec(args.kind, args.n, args.r, args.p, args.ring_size, args.gen_seed, count, args.unique)


def _single_graph(args):
    """``(graph, v, cycle)`` from ``--graph`` or the generator flags."""
    if (args.graph is None) == (args.kind is None):
        raise argparse.ArgumentTypeError("give exactly one of --graph or --kind")
    if args.graph is not None:
        return load_graph(args.graph), None, None
    return _gen_spec(args).generate()[0]


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    g, v, cycle = _gen_spec(args).generate()[0]
    save_graph(g, args.out)
    info = {"out": args.out, "n": g.n, "edges": len(g.edges), "wl_hash": f"{wl_graph_hash(g, 3):032x}"}
    if cycle is not None:
        info["v"] = v
        info["cycle"] = list(cycle.nodes)
    print(json.dumps(info))
    return EXIT_OK


def cmd_mpc(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        gen = None
        if args.kind is not None:
            gen = _gen_spec(args, args.count)
        cfg = ExperimentConfig(
            arch=tuple(args.arch or ["gcn"]), task=args.task, trials=args.trials, seed=args.seed,
            layers=args.layers, graph=args.graph, gen=gen, v=args.v, u=args.u,
            distances=tuple(args.distances) if args.distances else None,
            ring_size=args.ring_size if args.graph else None, max_cycle=args.max_cycle,
            readout=args.readout, format=args.format, out=args.out,
        )
    records = run(cfg)
    if cfg.format == "csv":
        text = to_csv(records)
    else:
        text = to_json(records, meta={"config": cfg.to_dict()})
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    arch = Arch.parse(args.arch, max_cycle=args.max_cycle)
    if args.task == "retain":
        if args.graph is None or args.layers is None:
            raise argparse.ArgumentTypeError("retain bounds need --graph and --layers")
        bounds = [bound_retain(load_graph(args.graph), args.layers)]
    elif args.task == "transfer":
        if args.n is None or args.r is None:
            raise argparse.ArgumentTypeError("transfer bounds need --n and --r")
        bounds = list(bound_transfer(arch, args.n, args.r, args.D))
    else:
        if args.s is None or args.r is None:
            raise argparse.ArgumentTypeError("ring bounds need --s and --r")
        bounds = list(bound_ring(arch, args.s, args.r))
    if args.json:
        print(json.dumps([
            {"direction": b.direction.value, "value_nats": _jsonable(b.value_nats),
             "formula_id": b.formula_id, "provenance": b.provenance.value, "note": b.note}
            for b in bounds
        ]))
    else:
        for b in bounds:
            print(f"{b.provenance.value}\t{b.direction.value}\t{_fmt(b.value_nats)}\t{b.formula_id}")
    return EXIT_OK


def cmd_wl(args) -> int:
    graphs = []
    targets = []
    for path in args.paths:
        ds = load_dataset(path)
        graphs += list(ds.graphs)
        targets.append(ds.targets)
    # targets survive only if every input carried them
    all_targets = None
    if all(t is not None for t in targets):
        all_targets = [x for t in targets for x in t]
    ds = Dataset(tuple(graphs), all_targets)
    if not len(ds):
        raise EmptyDataset("no graphs found")
    arch = Arch.parse(args.arch, max_cycle=args.max_cycle) if args.arch else None
    if args.mode == "colors":
        out = {"colors": [[f"{c:032x}" for c in wl_refine(g, args.layers).final()] for g in ds.graphs]}
    elif args.mode == "hash":
        out = {"hashes": [f"{wl_graph_hash(g, args.layers):032x}" for g in ds.graphs]}
    elif args.mode == "unique":
        frac = uniqueness_fraction(ds, args.layers)
        out = {"unique_fraction": round(frac, 4), "exact": frac, "note": DEDUPE_NOTE}
    else:
        if ds.targets is None:
            raise MissingTargets("wlc mode needs a 'targets' field in every graph file")
        vals = wlc(ds, args.layers, arch)
        out = {"wlc": _jsonable(vals), "max": _jsonable(max((max(v, default=0) for v in vals), default=0))}
    print(json.dumps(out))
    return EXIT_OK


def cmd_exact(args) -> int:
    g, v0, _ = _single_graph(args)
    arch = Arch.parse(args.arch, max_cycle=args.max_cycle, readout=args.readout)
    v = args.v if args.v is not None else (v0 if v0 is not None else 0)
    if args.task == "retain":
        task = Retain(v)
    else:
        if args.u is None:
            raise argparse.ArgumentTypeError("propagate needs --u")
        task = Propagate(args.u, v)
    p = exact_probability(g, arch, task, args.layers, cap=args.cap)
    print(f"p={p}\tp_float={float(p)!r}\tmpc_nats={_fmt(nats(p))}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lossywl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph file")
    _add_gen_args(p, "--seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mpc", help="Monte Carlo MPC records (CSV or JSON)")
    p.add_argument("--config", help="JSON experiment config (overrides the flags)")
    p.add_argument("--graph", help="graph file, JSON list or directory")
    _add_gen_args(p, "--graph-seed")
    p.add_argument("--count", type=int, default=1, help="number of generated graphs")
    p.add_argument("--arch", action="append", help="repeatable; default gcn")
    p.add_argument("--task", choices=("retain", "propagate", "ring"), default="propagate")
    p.add_argument("--layers", type=int)
    p.add_argument("--distances", type=int, nargs="+")
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo base seed")
    p.add_argument("--max-cycle", type=int, default=6)
    p.add_argument("--readout", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mpc)

    p = sub.add_parser("bounds", help="analytic MPC bounds")
    p.add_argument("--task", choices=("retain", "transfer", "ring"), required=True)
    p.add_argument("--arch", default="gcn")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--s", type=int)
    p.add_argument("--graph")
    p.add_argument("--layers", type=int)
    p.add_argument("--max-cycle", type=int, default=6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("wl", help="WL colours, hashes, uniqueness and WLC")
    p.add_argument("paths", nargs="+")
    p.add_argument("--mode", choices=("colors", "hash", "unique", "wlc"), required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--arch")
    p.add_argument("--max-cycle", type=int, default=6)
    p.set_defaults(func=cmd_wl)

    p = sub.add_parser("exact", help="exact success probability by enumeration")
    p.add_argument("--graph")
    _add_gen_args(p, "--graph-seed")
    p.add_argument("--arch", default="gcn")
    p.add_argument("--task", choices=("retain", "propagate"), required=True)
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--cap", type=int, default=24)
    p.add_argument("--max-cycle", type=int, default=6)
    p.add_argument("--readout", action="store_true")
    p.set_defaults(func=cmd_exact)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, MissingTargets, EmptyDataset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EnumerationTooLarge, GenerationExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (argparse.ArgumentTypeError, NodeOutOfRange, LossyWLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
