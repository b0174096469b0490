"""Executable case studies: three intersection policies with one crash log,
and a decision-tree health screen with an implicit unit-conversion bug.

Programs, traces, query documents, suite manifests with expected verdicts,
and golden decision tables all ship as package data; `bench` consumes the
manifests and every expected verdict is reproduced by the oracle (and by
brute force where domains permit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Any, Iterator

from ..formula import ParsedQuery, parse_query_json
from ..lang.ast import Program
from ..lang.interp import interpret
from ..lang.parse import parse_program
from ..model import ConcreteState, Trace, parse_trace_log

INTERSECTION_POLICIES = ("standard", "impatient", "pathological")

#: Positions the brute-force-checkable variants sample inside [1.0, 1.5].
POSX_PROBE_POINTS = (1.0, 1.05, 1.1, 1.15, 1.2, 1.3, 1.376, 1.45, 1.5)


def _data_root():
    return resources.files(__package__) / "data"


def data_text(relpath: str) -> str:
    return (_data_root() / relpath).read_text()


def load_program(name: str) -> Program:
    if not name.endswith(".decl"):
        name += ".decl"
    return parse_program(data_text(name))


def load_trace(name: str, program: Program) -> Trace:
    if not name.endswith(".jsonl"):
        name += ".jsonl"
    return parse_trace_log(data_text(name), program.catalog)


def load_query(relpath: str, program: Program, trace: Trace) -> ParsedQuery:
    doc = json.loads(data_text(relpath))
    return parse_query_json(doc, program.catalog, trace)


def build_intersection_policies() -> dict[str, Program]:
    """The three stand-in policies sharing one catalog and one crash log."""
    return {
        name: load_program(f"intersection_{name}")
        for name in INTERSECTION_POLICIES
    }


def build_dt_health() -> tuple[Program, Program]:
    """The buggy screen and its corrected-units variant."""
    return load_program("dt_health"), load_program("dt_health_corrected")


@dataclass
class SuiteEntry:
    program_name: str
    program: Program
    trace: Trace
    query: ParsedQuery
    query_name: str
    expect: str
    expect_ct: int | None


def load_suite(name: str) -> list[SuiteEntry]:
    manifest = json.loads(data_text(f"suites/{name}.json"))
    entries: list[SuiteEntry] = []
    programs: dict[str, Program] = {}
    traces: dict[tuple[str, str], Trace] = {}
    for raw in manifest["entries"]:
        pname = raw["program"]
        if pname not in programs:
            programs[pname] = load_program(pname)
        program = programs[pname]
        tkey = (manifest["trace"], pname)
        if tkey not in traces:
            traces[tkey] = load_trace(manifest["trace"], program)
        trace = traces[tkey]
        if "query" in raw:
            query = load_query(raw["query"], program, trace)
            qname = raw["query"]
        else:
            query = parse_query_json(raw["query_inline"], program.catalog, trace)
            qname = f"inline:{raw['query_inline']['behavior']}"
        entries.append(SuiteEntry(
            program_name=pname,
            program=program,
            trace=trace,
            query=query,
            query_name=qname,
            expect=raw["expect"],
            expect_ct=raw.get("expect_ct"),
        ))
    return entries


def suite_names() -> list[str]:
    return ["table2", "table3"]


# --- golden decision tables --------------------------------------------------------

def policy_decision_table(program: Program, trace: Trace, keyframe: int) -> list[dict[str, Any]]:
    """Enumerate (signal, position, arrived_first) over the probe grid and
    record the interpreted decision; everything else stays at the keyframe."""
    from ..model import restrict, state_at

    base = restrict(state_at(trace, keyframe), "input")
    rows: list[dict[str, Any]] = []
    catalog = program.catalog
    for signal in catalog.decl("agent1_signal").domain.members:
        for pos in POSX_PROBE_POINTS:
            for first in (False, True):
                values = dict(base.values)
                values["agent1_signal"] = signal
                values["agent1_pos_x"] = pos
                values["arrived_first"] = first
                final, _ = interpret(program, ConcreteState(catalog, values))
                rows.append({
                    "agent1_signal": signal,
                    "agent1_pos_x": pos,
                    "arrived_first": first,
                    "move": final["move"],
                })
    return rows


def golden_table(name: str) -> list[dict[str, Any]]:
    return json.loads(data_text(f"golden/{name}.json"))


def iter_policy_goldens() -> Iterator[tuple[str, list[dict[str, Any]]]]:
    for name in INTERSECTION_POLICIES:
        yield name, golden_table(f"decision_table_{name}")
