"""Command-line interface.

Subcommands: check (parse+typecheck), run (interpret on a logged state),
symexec (dump the decision logic), query (resolve one query file), session
(replay a session file), bench (run fixture suites), serve (HTTP service).
Machine-readable JSON with --json; human-readable tables otherwise.

Exit codes: 0 success; 1 verdict mismatch for `query --expect` and failed
bench expectations; 2 errors; 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from typing import Any, Optional

from .errors import DepositionError
from .formula import parse_query_json
from .lang.ast import StepBudget
from .lang.interp import interpret
from .lang.parse import parse_program
from .model import parse_trace_log, restrict, state_at, value_to_json
from .oracle import Oracle, make_query
from .smtlib import emit_smt
from .solver import SolverConfig, SolverRunner
from .sym import free_vars
from .symexec import sym_execute
from . import fixtures

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="deposition",
        description="Interrogate deterministic decision programs with "
                    "factual and counterfactual queries.",
    )
    parser.add_argument("--solver", help="solver command (SMT-LIB v2 on stdin); "
                                         "default: the bundled reference solver")
    parser.add_argument("--solver-timeout", type=float, default=None,
                        help="seconds per solver call")
    parser.add_argument("--debug-dir", help="directory for solver transcripts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check")
    p_check.add_argument("program")
    p_check.add_argument("--catalog-out",
                         help="write the variable catalog document here")
    p_check.add_argument("--json", action="store_true")

    p_run = sub.add_parser("run")
    p_run.add_argument("--program", required=True)
    p_run.add_argument("--trace", required=True)
    p_run.add_argument("--step", type=int, default=0)
    p_run.add_argument("--budget", type=int, default=10_000)
    p_run.add_argument("--json", action="store_true")

    p_sym = sub.add_parser("symexec")
    p_sym.add_argument("--program", required=True)
    p_sym.add_argument("--trace")
    p_sym.add_argument("--keyframe", type=int)
    p_sym.add_argument("--query", help="query file providing the precondition")
    p_sym.add_argument("--out", help="directory for per-path SMT snippets")
    p_sym.add_argument("--budget", type=int, default=10_000)
    p_sym.add_argument("--mode", choices=("eager", "deferred"), default="eager")
    p_sym.add_argument("--json", action="store_true")

    p_query = sub.add_parser("query")
    p_query.add_argument("--program", required=True)
    p_query.add_argument("--trace", required=True)
    p_query.add_argument("--query", required=True)
    p_query.add_argument("--keyframe", type=int,
                         help="override the query file's keyframe")
    p_query.add_argument("--expect", choices=("true", "false", "unknown",
                                              "empty_family"))
    p_query.add_argument("--might-form", choices=("guarded", "direct"),
                         default="guarded")
    p_query.add_argument("--json", action="store_true")

    p_sess = sub.add_parser("session")
    p_sess.add_argument("--file", required=True)
    p_sess.add_argument("--program", help="current program text to check "
                                          "facts against")
    p_sess.add_argument("--replay", action="store_true",
                        help="re-pose every recorded query")
    p_sess.add_argument("--json", action="store_true")

    p_bench = sub.add_parser("bench")
    p_bench.add_argument("--suite", choices=fixtures.suite_names(),
                         required=True)
    p_bench.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("serve")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8750)
    p_serve.add_argument("--session-dir")
    return parser


def solver_config(args: argparse.Namespace) -> SolverConfig:
    cfg = SolverConfig.from_env()
    if args.solver:
        cfg.command = shlex.split(args.solver)
        cfg.persistent = False
    if args.solver_timeout is not None:
        cfg.timeout_s = args.solver_timeout
    if args.debug_dir:
        cfg.debug_dir = args.debug_dir
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except DepositionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "symexec":
        return _cmd_symexec(args)
    if args.command == "query":
        return _cmd_query(args)
    if args.command == "session":
        return _cmd_session(args)
    if args.command == "bench":
        return _cmd_bench(args)
    if args.command == "serve":
        return _cmd_serve(args)
    raise AssertionError(args.command)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _emit(args: argparse.Namespace, doc: dict[str, Any], human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=1))
    else:
        print(human)


def _cmd_check(args: argparse.Namespace) -> int:
    from .model import catalog_to_json

    program = parse_program(_read(args.program))
    doc = {
        "ok": True,
        "variables": [
            {"name": d.name, "class": d.klass.value, "domain": str(d.domain)}
            for d in program.catalog
        ],
        "leaf_hint": program.leaf_count_hint(),
    }
    if args.catalog_out:
        with open(args.catalog_out, "w") as fh:
            json.dump(catalog_to_json(program.catalog), fh, indent=1)
            fh.write("\n")
    _emit(args, doc, f"ok: {len(program.catalog)} variables, "
                     f"{program.leaf_count_hint()} static leaves")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.program))
    trace = parse_trace_log(_read(args.trace), program.catalog)
    inputs = restrict(state_at(trace, args.step), "input")
    final, steps = interpret(program, inputs, StepBudget(args.budget))
    decisions = {
        n: final[n] for n in program.catalog.decision_names
    }
    doc = {
        "step": args.step,
        "steps_executed": steps,
        "decisions": {
            n: value_to_json(program.catalog.decl(n).domain, v)
            for n, v in decisions.items()
        },
        "logged": {
            n: value_to_json(program.catalog.decl(n).domain,
                             state_at(trace, args.step)[n])
            for n in program.catalog.decision_names
        },
    }
    human = "\n".join(
        f"{n} = {v!r} (logged {state_at(trace, args.step)[n]!r})"
        for n, v in decisions.items()
    )
    _emit(args, doc, human + f"\n{steps} steps")
    return 0


def _precondition(args: argparse.Namespace, program) -> Any:
    from .formula import Free, mk_relaxation, tight_relaxation

    if args.query:
        trace = parse_trace_log(_read(args.trace), program.catalog)
        doc = json.loads(_read(args.query))
        parsed = parse_query_json(doc, program.catalog, trace)
        return parsed.relaxation
    if args.trace is not None and args.keyframe is not None:
        trace = parse_trace_log(_read(args.trace), program.catalog)
        return tight_relaxation(
            program.catalog, restrict(state_at(trace, args.keyframe), "input")
        )
    return mk_relaxation(
        program.catalog,
        {n: Free() for n in program.catalog.input_names},
    )


def _cmd_symexec(args: argparse.Namespace) -> int:
    import os

    from .solver import SolverFeasibility

    program = parse_program(_read(args.program))
    pre = _precondition(args, program)
    runner = SolverRunner(solver_config(args))
    try:
        logic = sym_execute(
            program, pre, StepBudget(args.budget),
            SolverFeasibility(runner), mode=args.mode,
        )
        index = []
        for i, p in enumerate(logic.paths + logic.pruned):
            entry = {
                "path_id": p.path_id,
                "pi_size": len(str(p.constraint)),
                "steps": p.steps,
                "feasible": p.feasible,
            }
            index.append(entry)
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                symbols = sorted(free_vars(p.formula()), key=lambda v: v.name)
                script = emit_smt(symbols, [p.formula()])
                name = (f"path{p.path_id:03d}.smt2" if p.path_id >= 0
                        else f"pruned{i:03d}.smt2")
                with open(os.path.join(args.out, name), "w") as fh:
                    fh.write(script.render())
        if args.out:
            with open(os.path.join(args.out, "index.json"), "w") as fh:
                json.dump({"ct": logic.ct, "paths": index}, fh, indent=1)
        doc = {"ct": logic.ct, "paths": index}
        _emit(args, doc, f"ct = {logic.ct}\n" + "\n".join(
            f"  path {e['path_id']}: steps={e['steps']} feasible={e['feasible']}"
            for e in index
        ))
        return 0
    finally:
        runner.close()


def _cmd_query(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.program))
    trace = parse_trace_log(_read(args.trace), program.catalog)
    doc = json.loads(_read(args.query))
    if args.keyframe is not None:
        doc["keyframe"] = args.keyframe
    parsed = parse_query_json(doc, program.catalog, trace)
    query = make_query(parsed, trace)
    runner = SolverRunner(solver_config(args))
    try:
        oracle = Oracle(program, runner)
        response = oracle.resolve(query, might_form=args.might_form)
    finally:
        runner.close()
    out = response.to_json()
    human = [f"verdict: {response.verdict}   ct={response.ct}   "
             f"total {response.timings.total:.3f}s "
             f"(symbolic {response.timings.symbolic:.3f}s, "
             f"solving {response.timings.solving:.3f}s)"]
    if response.witness is not None:
        human.append("witness inputs:")
        for n, v in response.witness.inputs.values.items():
            human.append(f"  {n} = {v!r}")
    _emit(args, out, "\n".join(human))
    if args.expect is not None and response.verdict != args.expect:
        return 1
    return 0


def _cmd_session(args: argparse.Namespace) -> int:
    from .session import load_session, pose

    current = _read(args.program) if args.program else None
    session = load_session(args.file, current)
    doc: dict[str, Any] = {
        "name": session.name,
        "queries": len(session.records),
        "facts": [f.to_json() for f in session.facts],
    }
    drift = []
    if args.replay:
        runner = SolverRunner(solver_config(args))
        try:
            replayed = load_session(args.file, current)
            replayed.records = []
            replayed.facts = []
            for record in session.records:
                response, _ = pose(replayed, record.doc, runner)
                old = record.response["verdict"]
                if response.verdict != old:
                    drift.append({
                        "query_id": record.query_id,
                        "was": old,
                        "now": response.verdict,
                    })
        finally:
            runner.close()
        doc["replay_drift"] = drift
    lines = [f"session {session.name!r}: {len(session.records)} queries, "
             f"{len(session.facts)} facts"
             + (" (stale)" if any(f.stale for f in session.facts) else "")]
    for f in session.facts:
        lines.append(f"  [{f.fact_id}] {f.property['statement']}")
    if args.replay:
        lines.append(f"replay drift: {len(drift)}")
    _emit(args, doc, "\n".join(lines))
    return 1 if drift else 0


def _cmd_bench(args: argparse.Namespace) -> int:
    runner = SolverRunner(solver_config(args))
    results = []
    failures = 0
    try:
        for entry in fixtures.load_suite(args.suite):
            oracle = Oracle(entry.program, runner)
            query = make_query(entry.query, entry.trace)
            response = oracle.resolve(query)
            ok = response.verdict == entry.expect and (
                entry.expect_ct is None or response.ct == entry.expect_ct
            )
            failures += 0 if ok else 1
            results.append({
                "program": entry.program_name,
                "query": entry.query_name,
                "verdict": response.verdict,
                "expect": entry.expect,
                "ct": response.ct,
                "ok": ok,
                "total_s": round(response.timings.total, 4),
            })
    finally:
        runner.close()
    matched = len(results) - failures
    doc = {"suite": args.suite, "matched": matched, "total": len(results),
           "results": results}
    lines = [
        f"{'OK ' if r['ok'] else 'FAIL'} {r['program']:34} "
        f"{r['query']:34} {r['verdict']:12} ct={r['ct']}"
        for r in results
    ]
    lines.append(f"{matched}/{len(results)} matrix matches")
    _emit(args, doc, "\n".join(lines))
    return 0 if failures == 0 else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, serve

    cfg = ServiceConfig(
        host=args.host,
        port=args.port,
        solver=solver_config(args),
        session_dir=args.session_dir,
    )
    serve(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
