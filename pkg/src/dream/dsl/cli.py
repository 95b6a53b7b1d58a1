"""Command-line entry point: ``run``, ``bench``, ``check`` and ``models``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..core import Port, format_interaction
from ..errors import DreamError, WellFormednessError
from ..pil import interactions_over
from ..pilops import ops_of, satisfies
from ..system import SEARCH_MODES, run
from .bench import bench, to_csv
from .lexer import ParseError
from .parser import parse
from .printer import ops as print_ops
from .scenarios import load

OK, DIAGNOSTICS, RUNTIME = 0, 1, 2


def trace_csv(trace) -> str:
    lines = ["step,metric,value"]
    for step, metric, value in trace.rows():
        lines.append(f"{step},{metric},{value}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    system = load(args.scenario, steps=args.steps, seed=args.seed, size=args.size, range=args.range)
    trace = run(system, debug=args.debug, search=args.search)
    _emit(trace_csv(trace), args.out)
    if trace.quiescent:
        print(f"quiescent after {len(trace.steps)} steps", file=sys.stderr)
    return OK


def cmd_bench(args) -> int:
    fixed = {k: v for k, v in (("size", args.size), ("range", args.range)) if v is not None}
    try:
        rows = bench(args.scenario, args.sweep, args.reps, args.steps, args.seed, args.search, fixed)
    except ValueError as exc:
        raise DreamError(str(exc)) from None
    _emit(to_csv(rows), args.out)
    return OK


def cmd_check(args) -> int:
    parse(Path(args.file).read_text(encoding="utf-8"))
    print("ok")
    return OK


def cmd_models(args) -> int:
    system = parse(Path(args.file).read_text(encoding="utf-8"))
    if args.term not in system.motifs:
        raise DreamError(f"no motif named {args.term!r}; motifs are {', '.join(system.motifs)}")
    cfg = system.initial
    term = system.motifs[args.term].expand(cfg)
    st = cfg.motifs[args.term]
    universe = [Port(cid, p) for cid in sorted(st.instances) for p in st.instances[cid].type.ports]
    count = 0
    for a in interactions_over(universe, args.limit):
        if satisfies(a, cfg, term, args.term):
            count += 1
            print(f"{format_interaction(a)} -> {print_ops(ops_of(a, cfg, term, args.term))}")
    print(f"{count} satisfying interactions over {len(universe)} ports", file=sys.stderr)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dream", description="Run and inspect coordination scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a built-in scenario or a scenario file and write metrics as CSV")
    r.add_argument("scenario")
    r.add_argument("--steps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--size", type=int)
    r.add_argument("--range", type=int)
    r.add_argument("--out")
    r.add_argument("--debug", action="store_true", help="re-check invariants after every step")
    r.add_argument("--search", choices=SEARCH_MODES, default="vector")
    r.set_defaults(fn=cmd_run)

    b = sub.add_parser("bench", help="time a parameter sweep of a built-in scenario")
    b.add_argument("scenario")
    b.add_argument("--sweep", required=True, help="name=v1,v2,... or name=lo..hi")
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--steps", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--size", type=int)
    b.add_argument("--range", type=int)
    b.add_argument("--search", choices=SEARCH_MODES, default="vector")
    b.add_argument("--out")
    b.set_defaults(fn=cmd_bench)

    c = sub.add_parser("check", help="parse a scenario file and check well-formedness")
    c.add_argument("file")
    c.set_defaults(fn=cmd_check)

    m = sub.add_parser("models", help="list the interactions satisfying a motif's term in the initial state")
    m.add_argument("file")
    m.add_argument("--term", required=True, help="motif name")
    m.add_argument("--limit", type=int, default=24, help="maximum number of ports to enumerate")
    m.set_defaults(fn=cmd_models)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{getattr(args, 'file', None) or getattr(args, 'scenario', '')}:{d}", file=sys.stderr)
        return DIAGNOSTICS
    except WellFormednessError as exc:
        for p in exc.problems:
            print(p, file=sys.stderr)
        return DIAGNOSTICS
    except (DreamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME


if __name__ == "__main__":
    sys.exit(main())
