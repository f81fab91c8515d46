"""``tabmc`` command line: check, encode and generate models."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from . import benchmarks
from .core import ModelError, Network
from .encoder import EncoderOptions, EncodingError, encode_network
from .parser import ParseError, parse_network, validate_network
from .query import Query, QueryError, encode_query, parse_query, witness_positions
from .solver import SolverConfig, SolverError, Verdict, check_model, solve
from .terms import emit_smtlib2
from .trace import LassoTrace, TraceError, decode_trace, format_structured, format_table, validate_trace

__all__ = ["RunReport", "run_check", "build_script", "main", "EXIT_OK", "EXIT_FOUND",
           "EXIT_ERROR", "EXIT_UNKNOWN", "EXIT_BAD_TRACE"]

EXIT_OK = 0          # invariant holds up to k, or reachability witness found
EXIT_FOUND = 1       # invariant violated, or target not reachable up to k
EXIT_ERROR = 2       # input, encoding or solver errors
EXIT_UNKNOWN = 3     # solver gave up or timed out
EXIT_BAD_TRACE = 4   # decoded trace failed replay: an internal bug

log = logging.getLogger("tabmc")


@dataclass
class RunReport:
    verdict: Verdict
    k: int
    query: Query
    encode_time: float
    solve_time: float
    trace: Optional[LassoTrace] = None
    violations: list = field(default_factory=list)
    witness: list = field(default_factory=list)
    model_mismatch: list = field(default_factory=list)
    trace_paths: list = field(default_factory=list)
    model: Optional[dict] = None

    @property
    def trace_ok(self) -> bool:
        return self.trace is not None and not self.violations and not self.model_mismatch and bool(self.witness)

    @property
    def exit_code(self) -> int:
        if self.verdict in (Verdict.UNKNOWN, Verdict.TIMEOUT):
            return EXIT_UNKNOWN
        if self.verdict is Verdict.SAT and not self.trace_ok:
            return EXIT_BAD_TRACE
        sat = self.verdict is Verdict.SAT
        if self.query.kind == "invariant":
            return EXIT_FOUND if sat else EXIT_OK
        return EXIT_OK if sat else EXIT_FOUND

    def summary(self) -> str:
        q, k = self.query, self.k
        timing = f"(encode {self.encode_time:.2f}s, solve {self.solve_time:.2f}s)"
        if self.verdict is Verdict.UNSAT:
            if q.kind == "invariant":
                text = f"UNSAT: property holds for all lasso runs up to bound k={k}"
            else:
                text = f"UNSAT: no lasso run up to bound k={k} reaches the target"
        elif self.verdict is Verdict.SAT:
            what = "counterexample" if q.kind == "invariant" else "witness"
            status = "validated" if self.trace_ok else "FAILED VALIDATION"
            text = f"SAT: {what} found at k={k}, trace {status}; positions {self.witness}"
        else:
            text = f"{self.verdict.value.upper()}: no answer at k={k}"
        return f"{text} {timing}"


def build_script(net: Network, query: Query, k: int, options: EncoderOptions):
    script, hook = encode_network(net, k, options)
    script.extend(encode_query(hook, query, k))
    return script


def run_check(net: Network, query: Query, k: int, options: EncoderOptions = EncoderOptions(),
              solver_cfg: Optional[SolverConfig] = None, logic: str = "ALL",
              emit: Optional[str] = None, recheck_threshold: int = 20000) -> RunReport:
    """Encode, solve, and on SAT decode and replay the trace."""
    t0 = time.monotonic()
    script = build_script(net, query, k, options)
    text = emit_smtlib2(script, logic)
    encode_time = time.monotonic() - t0
    if emit:
        with open(emit, "w") as fh:
            fh.write(text)
    result = solve(text, solver_cfg or SolverConfig(), script.declarations, script.definitions)
    report = RunReport(result.verdict, k, query, encode_time, result.elapsed)
    if result.verdict is Verdict.SAT:
        report.model = result.model
        report.model_mismatch = check_model(script, result.model, recheck_threshold)
        report.trace = decode_trace(result.model, net, k)
        report.violations = validate_trace(report.trace, net)
        report.witness = witness_positions(report.trace.configs, net, query)
    return report


def _read_network(path: str) -> Network:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    net = parse_network(text, path)
    for d in validate_network(net):
        if d.severity == "warning":
            print(f"{path}:{d}", file=sys.stderr)
    return net


def _seeds(text: str) -> tuple:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers: {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _bound(text: str) -> int:
    k = int(text)
    if k < 2:
        raise argparse.ArgumentTypeError("bound must be at least 2")
    return k


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tabmc", description="Bounded model checker for timed automata networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def encoding_flags(sp):
        sp.add_argument("model", help="model file")
        sp.add_argument("-k", type=_bound, required=True, help="bound (>= 2)")
        sp.add_argument("--edges", choices=["free", "right-closed"], default="right-closed")
        sp.add_argument("--liveness", choices=["none", "strong"], default="strong")
        sp.add_argument("--logic", default="ALL", help="SMT-LIB logic name (default ALL)")
        sp.add_argument("--emit", help="also write the SMT-LIB2 script to this file")

    c = sub.add_parser("check", help="check a query")
    encoding_flags(c)
    c.add_argument("--check", required=True, help='query, e.g. "invariant !(P1.cs && P2.cs)"')
    c.add_argument("--solver", default=None, help="solver executable (default: $TABMC_SOLVER or z3)")
    c.add_argument("--timeout", type=float, default=120.0)
    c.add_argument("--seeds", type=_seeds, default=(1, 2))
    c.add_argument("--trace-format", choices=["table", "structured"], default="table")
    c.add_argument("--trace-out", help="write the trace here instead of stdout")

    e = sub.add_parser("encode", help="write the SMT-LIB2 encoding without solving")
    encoding_flags(e)
    e.add_argument("--check", help="optional query to append")

    g = sub.add_parser("gen", help="print a benchmark model")
    g.add_argument("family", choices=["fischer", "token-ring", "demo"])
    g.add_argument("n", type=int, nargs="?", default=2)
    g.add_argument("--broken", action="store_true", help="Fischer without the id re-check")
    g.add_argument("-o", "--output")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            return _gen(args)
        net = _read_network(args.model)
        options = EncoderOptions(edges=args.edges, liveness=args.liveness)
        if args.command == "encode":
            return _encode(args, net, options)
        return _check(args, net, options)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{exc.source_name}:{d}", file=sys.stderr)
        return EXIT_ERROR
    except (QueryError, EncodingError, ModelError, SolverError, TraceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _gen(args) -> int:
    if args.family == "fischer":
        text = benchmarks.gen_fischer(args.n, broken=args.broken)
    elif args.family == "token-ring":
        text = benchmarks.gen_token_ring(args.n)
    else:
        text = benchmarks.demo_model()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _encode(args, net, options) -> int:
    script, hook = encode_network(net, args.k, options)
    if args.check:
        script.extend(encode_query(hook, parse_query(args.check), args.k))
    text = emit_smtlib2(script, args.logic)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _check(args, net, options) -> int:
    query = parse_query(args.check)
    cfg_kwargs = dict(timeout=args.timeout, seeds=args.seeds)
    if args.solver:
        cfg_kwargs["executable"] = args.solver
    report = run_check(net, query, args.k, options, SolverConfig(**cfg_kwargs), args.logic, args.emit)
    if report.trace is not None:
        fmt = format_table if args.trace_format == "table" else format_structured
        text = fmt(report.trace, net)
        if args.trace_out:
            with open(args.trace_out, "w") as fh:
                fh.write(text + "\n")
            report.trace_paths.append(args.trace_out)
        else:
            print(text)
        for v in report.violations:
            print(f"trace violation: {v}", file=sys.stderr)
        if report.model_mismatch:
            print(f"model re-check failed on {len(report.model_mismatch)} assertion(s)", file=sys.stderr)
    print(report.summary())
    if report.trace_paths:
        print("trace written to " + ", ".join(report.trace_paths))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
