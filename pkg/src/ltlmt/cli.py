"""Command-line front end.

Exit codes: 0 satisfiable, 1 unsatisfiable, 2 unknown, 3 usage or parse
error, 4 backend/engine failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed

from .backend import BackendError, SolverConfig
from .bench import (
    BenchError,
    BenchFamily,
    compile_transition_system,
    gen_text,
    gen_benchmark,
    parse_transition_system,
)
from .flatten import FlattenError
from .parser import ParseError, parse
from .solver import EngineDivergence, SolveOptions, SolveOutcome, solve

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_BACKEND = 4


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ltlmt",
        description="Satisfiability checker for linear temporal logic over "
        "finite traces with first-order theory atoms",
    )
    p.add_argument("--solver", metavar="PATH", help="external SMT solver executable (default: bundled solver)")
    p.add_argument("--logic", metavar="NAME", help="SMT logic name (default: inferred)")
    p.add_argument("--max-k", type=int, default=300, metavar="K", help="bound on the unraveling depth, 0 = unbounded (default 300)")
    p.add_argument("--engine", choices=("encoding", "tableau", "both"), default="encoding")
    p.add_argument("--dump-smt", metavar="PATH", help="write the solver transcript to PATH")
    p.add_argument("--dump-tableau", metavar="PATH", help="write the explored tableau as DOT to PATH")
    p.add_argument("--check-timeout", type=int, default=60, metavar="S", help="per-check solver time limit in seconds (default 60)")
    sub = p.add_subparsers(dest="command", required=True)

    solve_p = sub.add_parser("solve", help="solve a .ltlmt formula file")
    solve_p.add_argument("file")
    solve_p.add_argument("--model", action="store_true", help="print the witness trace as JSON")
    solve_p.add_argument("--verify", action="store_true", help="verify the witness against the trace semantics")

    bench_p = sub.add_parser("bench", help="run a benchmark family, CSV on stdout")
    bench_p.add_argument("--family", required=True)
    bench_p.add_argument("--from", dest="from_n", type=int, required=True)
    bench_p.add_argument("--to", dest="to_n", type=int, required=True)
    bench_p.add_argument("--timeout", type=int, default=300, metavar="S", help="wall-clock limit per instance in seconds")
    bench_p.add_argument("--jobs", type=int, default=1)

    gen_p = sub.add_parser("gen", help="print a benchmark instance as a .ltlmt file")
    gen_p.add_argument("--family", required=True)
    gen_p.add_argument("--n", type=int, required=True)

    ts_p = sub.add_parser("check-ts", help="solve a transition-system file (init/trans/property)")
    ts_p.add_argument("file")
    ts_p.add_argument("--model", action="store_true")
    ts_p.add_argument("--verify", action="store_true")
    return p


def _config(args) -> SolverConfig:
    return SolverConfig(
        executable=args.solver,
        logic=args.logic,
        timeout_ms=args.check_timeout * 1000,
        trace_log=args.dump_smt,
    )


def _options(args) -> SolveOptions:
    return SolveOptions(
        max_k=args.max_k,
        backend=_config(args),
        engine=args.engine,
        dump_tableau=args.dump_tableau,
    )


def _report(outcome: SolveOutcome, args, out) -> int:
    if outcome.status == "sat":
        out.write("SAT\n")
        code = EXIT_SAT
    elif outcome.status == "unsat":
        out.write("UNSAT\n")
        code = EXIT_UNSAT
    else:
        out.write(f"UNKNOWN ({outcome.reason})\n")
        code = EXIT_UNKNOWN
    if getattr(args, "model", False) and outcome.trace is not None:
        out.write(outcome.trace.to_json() + "\n")
    if getattr(args, "verify", False) and outcome.status == "sat":
        if outcome.verified is True:
            out.write("witness: verified\n")
        elif outcome.verified is None:
            out.write("witness: unknown (solver could not confirm)\n")
        else:
            out.write("witness: FAILED verification\n")
            return EXIT_BACKEND
    return code


def _cmd_solve(args, out) -> int:
    with open(args.file) as fh:
        text = fh.read()
    sig, phi = parse(text, filename=args.file)
    opts = _options(args)
    opts.verify = args.verify
    outcome = solve(phi, sig, opts)
    return _report(outcome, args, out)


def _cmd_check_ts(args, out) -> int:
    with open(args.file) as fh:
        text = fh.read()
    ts = parse_transition_system(text, filename=args.file)
    phi = compile_transition_system(ts)
    opts = _options(args)
    opts.verify = args.verify
    outcome = solve(phi, ts.sig, opts)
    return _report(outcome, args, out)


def _cmd_gen(args, out) -> int:
    out.write(gen_text(BenchFamily(args.family, args.n)))
    return EXIT_SAT


def _cmd_bench(args, out) -> int:
    if args.to_n < args.from_n:
        raise BenchError("--to must be >= --from")
    lock = threading.Lock()
    out.write("family,N,result,k,wall_ms\n")
    out.flush()

    def run(n: int):
        sig, phi = gen_benchmark(BenchFamily(args.family, n))
        opts = _options(args)
        opts.wall_deadline = time.monotonic() + args.timeout
        t0 = time.monotonic()
        outcome = solve(phi, sig, opts)
        wall_ms = int((time.monotonic() - t0) * 1000)
        result = {"sat": "SAT", "unsat": "UNSAT", "unknown": "UNKNOWN"}[outcome.status]
        k = "" if outcome.k is None else str(outcome.k)
        with lock:
            out.write(f"{args.family},{n},{result},{k},{wall_ms}\n")
            out.flush()
        return outcome

    ns = list(range(args.from_n, args.to_n + 1))
    if args.jobs <= 1:
        for n in ns:
            run(n)
    else:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(run, n) for n in ns]
            for fut in as_completed(futures):
                fut.result()
    return EXIT_SAT


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_SAT
    try:
        if args.command == "solve":
            return _cmd_solve(args, out)
        if args.command == "bench":
            return _cmd_bench(args, out)
        if args.command == "gen":
            return _cmd_gen(args, out)
        if args.command == "check-ts":
            return _cmd_check_ts(args, out)
        return EXIT_USAGE
    except (ParseError, FlattenError, BenchError, FileNotFoundError) as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except EngineDivergence as e:
        print(f"ENGINE DIVERGENCE: {e}", file=sys.stderr)
        return EXIT_BACKEND
    except BackendError as e:
        print(f"backend failure: {e}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
