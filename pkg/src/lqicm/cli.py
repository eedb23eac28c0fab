"""Command-line front end: ``lqicm analyze|optimize|run|bench|difftest``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .analysis import INF, LoopAnalysis, analyze_program
from .dfg import to_dot
from .harness import GenConfig, bench_complexity, iter_campaign, literal_rule_optimize
from .interp import Status, run
from .lang import ParseError, one_line, parse, pretty
from .transform import optimize, optimize_with_report

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_PARSE, EXIT_RUNTIME, EXIT_FUEL = 0, 1, 2, 3


def _degree_json(d) -> int:
    return -1 if d == INF else int(d)


def _degree_text(d) -> str:
    return "∞" if d == INF else str(d)


def loop_record(a: LoopAnalysis) -> dict:
    span = a.loop.span
    return {
        "loop_id": a.loop_id,
        "source_span": None if span is None else {"start_line": span[0], "end_line": span[1]},
        "chunks": [
            {"index": c.position,
             "source_text": one_line(c.command),
             "raw_degree": _degree_json(a.raw_degree[c.position]),
             "effective_degree": _degree_json(a.effective_degree[c.position])}
            for c in a.chunks],
        "peel_count": a.peel_count,
        "lemma1": {"fixpoint_index": a.lemma1[0], "bound": a.lemma1[1]},
        "relation": a.relation.to_json(),
    }


def analysis_report(analyses: Sequence[LoopAnalysis], source: Optional[str] = None) -> dict:
    loops = sorted(analyses, key=lambda a: a.loop_id)
    return {"schema_version": SCHEMA_VERSION, "source": source,
            "loops": [loop_record(a) for a in loops]}


def format_table(analyses: Sequence[LoopAnalysis]) -> str:
    lines = []
    for a in sorted(analyses, key=lambda a: a.loop_id):
        span = a.loop.span
        where = f" (lines {span[0]}-{span[1]})" if span else ""
        k, bound = a.lemma1
        lines.append(f"loop {a.loop_id}{where}: peel {a.peel_count}, "
                     f"fixpoint index {k} <= {bound}")
        lines.append(f"  {'#':>3} {'raw':>4} {'eff':>4}  chunk")
        for c in a.chunks:
            lines.append(f"  {c.position:>3} {_degree_text(a.raw_degree[c.position]):>4} "
                         f"{_degree_text(a.effective_degree[c.position]):>4}  {one_line(c.command)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _load(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    try:
        return parse(text)
    except ParseError as e:
        print(f"{path}:{e}", file=sys.stderr)
        return None


def _bindings(pairs: Sequence[str]) -> dict[str, int]:
    out = {}
    for p in pairs:
        name, sep, value = p.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected name=value, got {p!r}")
        out[name.strip()] = int(value)
    return out


def cmd_analyze(args) -> int:
    prog = _load(args.file)
    if prog is None:
        return EXIT_PARSE
    analyses = analyze_program(prog)
    if args.dot:
        outdir = Path(args.dot)
        outdir.mkdir(parents=True, exist_ok=True)
        for a in analyses:
            (outdir / f"loop{a.loop_id}.dot").write_text(
                to_dot(a.relation, f"loop{a.loop_id}"), encoding="utf-8")
    if args.json:
        json.dump(analysis_report(analyses, args.file), sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(format_table(analyses))
    return EXIT_OK


def cmd_optimize(args) -> int:
    prog = _load(args.file)
    if prog is None:
        return EXIT_PARSE
    new, report = optimize_with_report(prog)
    text = pretty(new)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for loop_id, p in sorted(report):
        print(f"loop {loop_id}: peeled {p} time{'s' if p != 1 else ''}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    prog = _load(args.file)
    if prog is None:
        return EXIT_PARSE
    out = run(prog, _bindings(args.input), args.fuel)
    for line in out.trace_lines():
        print(line)
    for name in sorted(out.store):
        print(f"{name} = {out.store[name]}")
    if args.count_steps:
        print(f"steps: {out.steps}")
    if out.status is Status.RUNTIME_ERROR:
        print(f"runtime error: {out.error}", file=sys.stderr)
        return EXIT_RUNTIME
    if out.status is Status.FUEL_EXHAUSTED:
        print(f"fuel exhausted after {out.steps} steps", file=sys.stderr)
        return EXIT_FUEL
    return EXIT_OK


def cmd_bench(args) -> int:
    prog = _load(args.file)
    if prog is None:
        return EXIT_PARSE
    sizes = [int(x) for x in args.values.split(",") if x.strip()]
    params = args.param or ["n"]
    fixed = _bindings(args.input)
    table = bench_complexity(prog, sizes, lambda n: {**fixed, **{p: n for p in params}},
                             fuel=args.fuel)
    print(f"{'n':>8} {'original':>12} {'optimized':>12}  traces")
    for r in table.rows:
        a = "fuel" if r.steps_original is None else str(r.steps_original)
        b = "fuel" if r.steps_optimized is None else str(r.steps_optimized)
        print(f"{r.n:>8} {a:>12} {b:>12}  {'same' if r.traces_match else 'DIFFER'}")

    def fmt(s):
        return "n/a" if s is None else f"{s:.3f}"
    print(f"log-log slope: original {fmt(table.slope_original)}, "
          f"optimized {fmt(table.slope_optimized)}")
    return EXIT_OK


def cmd_difftest(args) -> int:
    cfg = GenConfig(seed=args.seed, max_depth=args.max_depth)
    transform = literal_rule_optimize if args.literal_copy_rule else optimize
    failures = 0
    for res in iter_campaign(cfg, args.count, args.stores, args.fuel, transform):
        failures += res.status == "fail"
        print(json.dumps(res.to_json(), sort_keys=True))
    print(f"{args.count} programs, {failures} failures", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lqicm", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print invariance degrees of every loop")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the JSON analysis report")
    p.add_argument("--dot", metavar="DIR", help="write loop<id>.dot per loop relation")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="peel loops and print the transformed program")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("run", help="interpret a program")
    p.add_argument("file")
    p.add_argument("--input", nargs="*", default=[], metavar="NAME=VALUE")
    p.add_argument("--fuel", type=int, default=1_000_000)
    p.add_argument("--count-steps", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="step counts before and after optimization")
    p.add_argument("file")
    p.add_argument("--values", required=True, help="comma-separated sizes")
    p.add_argument("--param", action="append", help="variable bound to the size (repeatable, default n)")
    p.add_argument("--input", nargs="*", default=[], metavar="NAME=VALUE")
    p.add_argument("--fuel", type=int, default=50_000_000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("difftest", help="differential campaign on generated programs (JSON lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--stores", type=int, default=5)
    p.add_argument("--fuel", type=int, default=100_000)
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--literal-copy-rule", action="store_true",
                   help="peel from raw degrees (known unsound, for harness mutation testing)")
    p.set_defaults(func=cmd_difftest)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
