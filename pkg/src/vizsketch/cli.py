"""Command line entry points: synthesize one task, benchmark a suite,
or serve the engine over HTTP.

Exit codes for ``synth``: 0 when at least one solution is found, 2 when
the search comes back empty, 1 on any input error (with a diagnostic on
stderr).  Result files are byte-identical across runs with the same task
and options.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import load_suite, run_suite, write_report
from .errors import VizSketchError
from .synthesis import synthesize
from .taskio import dump_result, load_task, resolve_options, result_to_json
from . import __version__

OVERRIDE_KEYS = ("budget", "top_k", "max_stmts", "seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vizsketch",
        description="Synthesize visualization scripts from partial drawings.",
    )
    parser.add_argument("--version", action="version", version=f"vizsketch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize programs for one task file")
    synth.add_argument("task", help="task file (tables, sketch, options)")
    synth.add_argument("--budget", type=float, default=None, help="time budget in seconds")
    synth.add_argument("--top-k", dest="top_k", type=int, default=None,
                       help="number of distinct renderings to collect")
    synth.add_argument("--max-stmts", dest="max_stmts", type=int, default=None,
                       help="table statements allowed per layer")
    synth.add_argument("--seed", type=int, default=None, help="seed recorded in the result")
    synth.add_argument("--out", default=None, help="result file (default: stdout)")
    synth.add_argument("-v", "--verbose", action="store_true",
                       help="print search statistics to stderr")

    bench = sub.add_parser("bench", help="run a benchmark suite directory")
    bench.add_argument("dir", help="directory of task files with ground-truth targets")
    bench.add_argument("--budgets", default="1,10,60,600",
                       help="comma-separated budgets in seconds")
    bench.add_argument("--n", default="4",
                       help="comma-separated sketch sizes (elements sampled per layer)")
    bench.add_argument("--seed", type=int, default=0, help="sketch sampling seed")
    bench.add_argument("--out", default="bench_report",
                       help="report directory for the CSV and figures")
    bench.add_argument("--no-prune", dest="prune", action="store_false",
                       help="disable search pruning (baseline measurements)")

    serve = sub.add_parser("serve", help="serve the engine over HTTP")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--max-concurrent", dest="max_concurrent", type=int, default=4,
                       help="simultaneous synthesis requests before 429")
    return parser


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_synth(args) -> int:
    try:
        task = load_task(args.task)
        options = dict(task.options)
        for key in OVERRIDE_KEYS:
            value = getattr(args, key)
            if value is not None:
                options[key] = value
        options = resolve_options(options)
    except (OSError, json.JSONDecodeError, VizSketchError) as exc:
        return _fail(str(exc))

    stats: dict = {}
    solutions = synthesize(
        task.tables,
        task.sketch,
        budget=options["budget"],
        top_k=options["top_k"],
        max_stmts=options["max_stmts"],
        stats=stats,
    )
    text = dump_result(result_to_json(options, solutions))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    if args.verbose:
        for key in sorted(stats):
            print(f"{key}: {stats[key]}", file=sys.stderr)
        print(f"solutions: {len(solutions)}", file=sys.stderr)
    return 0 if solutions else 2


def cmd_bench(args) -> int:
    try:
        budgets = tuple(float(part) for part in args.budgets.split(","))
        ns = tuple(int(part) for part in args.n.split(","))
    except ValueError as exc:
        return _fail(f"bad flag value: {exc}")
    if any(b < 0 for b in budgets) or any(n < 1 for n in ns):
        return _fail("budgets must be >= 0 and sketch sizes >= 1")
    try:
        tasks, skipped = load_suite(args.dir)
    except (OSError, json.JSONDecodeError, VizSketchError) as exc:
        return _fail(str(exc))
    for name in skipped:
        print(f"warning: {name}: no ground-truth target, skipped", file=sys.stderr)
    if not tasks:
        return _fail("no benchmark cases with ground truth found")

    def progress(result):
        rank = "-" if result.target_rank is None else str(result.target_rank)
        print(
            f"{result.case} n={result.n} budget={result.budget:g}s: "
            f"{result.n_solutions} solutions, target rank {rank} "
            f"({result.wall_time:.2f}s)",
            file=sys.stderr,
        )

    results = run_suite(
        tasks, budgets=budgets, ns=ns, seed=args.seed, prune=args.prune,
        progress=progress,
    )
    report = write_report(results, args.out)
    sys.stdout.write(report["text"])
    print(f"report written to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_concurrent=args.max_concurrent)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args)
    if args.command == "bench":
        return cmd_bench(args)
    return cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
