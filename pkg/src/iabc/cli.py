"""Command-line front end: ``iabc generate | check | simulate | analyze``.

Exit codes: 0 success, 1 condition violated / not converged / invariant
failed, 2 usage or input error. Any path argument may be ``-`` for
stdin/stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kernels
from .adversaries import ADVERSARIES, Fixed, adversary_from_dict, resolve_split, split_from_witness, split_inputs
from .analysis import report, report_csv
from .diagnostics import ConfigError
from .engine import SimConfig, Trace, run, validate_config
from .generators import GENERATORS
from .graph import GraphError, check_condition, dump_graph, find_witness, load_graph

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _node_list(text: str) -> list[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


def cmd_generate(args) -> int:
    kind = args.type
    if kind == "hypercube":
        if args.d is None:
            raise UsageError("--d is required for hypercube")
        g = GENERATORS[kind](args.d)
    elif kind == "complete":
        if args.n is None:
            raise UsageError("--n is required for complete")
        g = GENERATORS[kind](args.n)
    else:
        if args.n is None or args.f is None:
            raise UsageError(f"--n and --f are required for {kind}")
        g = GENERATORS[kind](args.n, args.f)
    _write(args.output, dump_graph(g))
    msg = f"{kind}: {g.n} nodes, {len(g.edges)} edges"
    print(msg, file=sys.stderr if args.output == "-" else sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    g = load_graph(_read(args.graph))
    if args.faulty is not None:
        w = find_witness(g, args.f, _node_list(args.faulty), force=args.force)
        violated = w is not None
    else:
        verdict = check_condition(g, args.f, force=args.force)
        w, violated = verdict.witness, not verdict.satisfied
    if violated:
        print("VIOLATED")
        print(json.dumps(w.to_dict()))
        return EXIT_FAIL
    print("SATISFIES")
    return EXIT_OK


def _load_config_file(path: str) -> dict:
    d = json.loads(_read(path))
    if isinstance(d.get("graph"), str):
        gpath = Path(d["graph"])
        if path != "-" and not gpath.is_absolute():
            gpath = Path(path).parent / gpath
        d["graph"] = json.loads(gpath.read_text())
    return d


def _build_config(args) -> SimConfig:
    d = _load_config_file(args.config) if args.config else {}
    if args.graph:
        d["graph"] = json.loads(_read(args.graph))
    if "graph" not in d:
        raise UsageError("a graph is required (-g or --config)")
    g = load_graph(json.dumps(d["graph"]))
    for key, val in (("f", args.f), ("max_rounds", args.rounds), ("epsilon", args.epsilon), ("seed", args.seed)):
        if val is not None:
            d[key] = val
    if "f" not in d:
        raise UsageError("--f is required")
    f = int(d["f"])
    faulty = _node_list(args.faulty) if args.faulty is not None else d.get("faulty")

    if args.inputs:
        raw = json.loads(_read(args.inputs))
        d["inputs"] = raw["inputs"] if isinstance(raw, dict) else raw
    elif args.inputs_uniform:
        a, b = (float(x) for x in args.inputs_uniform.split(","))
        d["inputs"] = [a + (b - a) * i / (g.n - 1) for i in range(g.n)]

    adv = {"kind": args.adversary} if args.adversary else d.get("adversary")
    if adv is None:
        raise UsageError("--adversary is required")

    if adv["kind"] == "split" and (args.adversary or adv.get("from_witness")):
        w = resolve_split(g, f, None if faulty is None else frozenset(faulty), force=args.force)
        faulty = sorted(w.F)
        if "inputs" not in d:
            d["inputs"] = split_inputs(w, g.n)
        adversary = split_from_witness(w, d["inputs"])
    else:
        if "inputs" not in d:
            raise UsageError("inputs are required (--inputs or --inputs-uniform)")
        if adv["kind"] == "fixed" and "values" not in adv:
            honest = [x for i, x in enumerate(d["inputs"]) if i not in set(faulty or [])]
            value = args.fixed_value if args.fixed_value is not None else max(honest) + 1.0
            adversary = Fixed({j: value for j in faulty or []})
        else:
            adversary = adversary_from_dict(adv)

    d["graph"], d["faulty"], d["adversary"] = g, faulty or [], adversary
    config = SimConfig.from_dict(d)
    if len(config.inputs) != g.n:
        raise UsageError(f"expected {g.n} inputs, got {len(config.inputs)}")
    return config


def cmd_simulate(args) -> int:
    config = _build_config(args)
    diags = validate_config(config, check_graph=config.graph.n <= 15 or args.force)
    errors = [d for d in diags if d.is_error]
    if errors:
        for d in errors:
            print(d, file=sys.stderr)
        return EXIT_USAGE
    for d in diags:
        print(d, file=sys.stderr)
    trace = run(config, check_graph=False)
    if args.trace:
        _write(args.trace, trace.dumps())
    if args.csv:
        _write(args.csv, trace.states_csv())
    T = len(trace.rounds)
    gap = trace.gap_at(T)
    out = sys.stderr if args.trace == "-" or args.csv == "-" else sys.stdout
    if gap <= config.epsilon:
        print(f"CONVERGED at round {T} (gap {gap!r})", file=out)
        return EXIT_OK
    print(f"NON-CONVERGED after {T} rounds (gap {gap!r})", file=out)
    return EXIT_FAIL


def cmd_analyze(args) -> int:
    try:
        trace = Trace.loads(_read(args.trace))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed trace: {exc!r}") from None
    rep = report(trace)
    out = rep.to_dict()
    if args.summary:
        for key in ("u_series", "mu_series", "gap_series"):
            out.pop(key)
    text = json.dumps(out, indent=1) + "\n"
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        g, f = trace.config.graph, trace.config.f
        _write(args.csv, report_csv(rep, g.n - f - 1))
    return EXIT_OK if rep.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iabc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s (kernel backend: {kernels.BACKEND})")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a generated topology as graph JSON")
    gen.add_argument("--type", required=True, choices=sorted(GENERATORS))
    gen.add_argument("--n", type=int)
    gen.add_argument("--f", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("-o", "--output", default="-")
    gen.set_defaults(func=cmd_generate)

    chk = sub.add_parser("check", help="decide the partition condition for f faults")
    chk.add_argument("-g", "--graph", required=True)
    chk.add_argument("--f", type=int, required=True)
    chk.add_argument("--faulty", help="restrict the search to witnesses with this F, e.g. 5,6")
    chk.add_argument("--force", action="store_true", help="enumerate past the n <= 15 guard")
    chk.set_defaults(func=cmd_check)

    sim = sub.add_parser("simulate", help="run the trimmed-mean iteration under an adversary")
    sim.add_argument("-g", "--graph")
    sim.add_argument("--config", help="SimConfig JSON; flags override its fields")
    sim.add_argument("--f", type=int)
    sim.add_argument("--faulty", help="comma-separated faulty node ids")
    src = sim.add_mutually_exclusive_group()
    src.add_argument("--inputs", help="JSON list of n inputs (or {\"inputs\": [...]})")
    src.add_argument("--inputs-uniform", metavar="A,B", help="evenly spaced inputs from A (node 0) to B (node n-1)")
    sim.add_argument("--adversary", choices=sorted(ADVERSARIES))
    sim.add_argument("--fixed-value", type=float, help="value sent by every faulty node under 'fixed' (default: max input + 1)")
    sim.add_argument("--rounds", type=int, help="max rounds (default 1000)")
    sim.add_argument("--epsilon", type=float, help="stop once the fault-free gap is <= epsilon (default 1e-6)")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--trace", help="write the trace JSON here")
    sim.add_argument("--csv", help="write round,node,value rows here")
    sim.add_argument("--force", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="check a trace against validity and convergence bounds")
    ana.add_argument("trace")
    ana.add_argument("-o", "--output", help="write report JSON here instead of stdout")
    ana.add_argument("--csv", help="write t,U,mu,gap,bound rows here")
    ana.add_argument("--summary", action="store_true", help="omit the per-round series from the JSON")
    ana.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, GraphError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
