"""The investigation loop: session state, query history, the facts ledger.

Each posed query appends to the history; provable verdicts append facts.
A factual verdict yields a keyframe-based fact; a universal counterfactual
result (would-true, might-false) yields a family-level fact described by
its scenario, since the family is usually infinite; an existential result
(might-true, would-false) yields a witness-level fact carrying the model.
False verdicts record the negated behavior. Unknown and empty-family
responses stay in the history but never enter the ledger: facts are proven.

The ledger is append-only and the loop has no auto-stop; closing the
session is the investigator's call.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import CorruptFile, NoWitness, SchemaVersionMismatch
from .formula import parse_query_json, relaxation_to_json, tight_relaxation
from .lang.ast import Program
from .lang.parse import parse_program
from .model import Trace, parse_trace_log, restrict, serialize_trace, state_at
from .oracle import (
    FALSE_VERDICT,
    Oracle,
    OracleResponse,
    TRUE_VERDICT,
    make_query,
)
from .solver import SolverRunner, WitnessModel

SCHEMA_VERSION = 1


def program_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class Fact:
    fact_id: int
    basis: dict[str, Any]  # keyframe | witness | family descriptor
    property: dict[str, Any]
    provenance: dict[str, Any]  # query id, verdict, transcript reference
    stale: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.fact_id,
            "basis": self.basis,
            "property": self.property,
            "provenance": self.provenance,
            "stale": self.stale,
        }


@dataclass
class QueryRecord:
    query_id: int
    doc: dict[str, Any]
    response: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {"id": self.query_id, "doc": self.doc, "response": self.response}


@dataclass
class Session:
    program: Program
    program_text: str
    trace: Trace
    records: list[QueryRecord] = field(default_factory=list)
    facts: list[Fact] = field(default_factory=list)
    name: str = "session"

    @property
    def hash(self) -> str:
        return program_hash(self.program_text)

    def fact(self, fact_id: int) -> Fact:
        for f in self.facts:
            if f.fact_id == fact_id:
                return f
        raise KeyError(f"no fact {fact_id}")


def open_session(program_text: str, trace_text: str, name: str = "session") -> Session:
    program = parse_program(program_text)
    trace = parse_trace_log(trace_text, program.catalog)
    return Session(program=program, program_text=program_text, trace=trace, name=name)


# --- posing queries -----------------------------------------------------------------

def pose(
    session: Session,
    doc: dict[str, Any],
    runner: SolverRunner,
    might_form: str = "guarded",
) -> tuple[OracleResponse, list[Fact]]:
    """Resolve one query document and fold the result into the session."""
    parsed = parse_query_json(doc, session.program.catalog, session.trace)
    query = make_query(parsed, session.trace)
    oracle = Oracle(session.program, runner)
    transcript_mark = runner.stats.queries
    response = oracle.resolve(query, might_form=might_form)
    query_id = len(session.records) + 1
    session.records.append(
        QueryRecord(query_id=query_id, doc=dict(doc), response=response.to_json())
    )
    added = _facts_for(session, query_id, parsed.mode, doc, response,
                       transcript_mark, runner)
    session.facts.extend(added)
    return response, added


def _facts_for(
    session: Session,
    query_id: int,
    mode: str,
    doc: dict[str, Any],
    response: OracleResponse,
    transcript_mark: int,
    runner: SolverRunner,
) -> list[Fact]:
    if response.verdict not in (TRUE_VERDICT, FALSE_VERDICT):
        return []
    negated = response.verdict == FALSE_VERDICT
    behavior = doc["behavior"]
    keyframe = doc["keyframe"]
    scenario = doc.get("constraints", {})
    provenance = {
        "query_id": query_id,
        "verdict": response.verdict,
        "transcripts": _transcript_ref(runner, transcript_mark),
    }
    prop = {
        "operator": "factual" if mode == "factual" else "counterfactual",
        "mode": mode,
        "keyframe": keyframe,
        "scenario": scenario,
        "behavior": behavior,
        "negated": negated,
        "statement": _render_statement(mode, keyframe, behavior, negated),
    }
    if mode == "factual":
        basis: dict[str, Any] = {"kind": "keyframe", "keyframe": keyframe}
    elif (mode == "would") == negated:
        # would-false and might-true carry the concrete counterfactual
        assert response.witness is not None
        basis = {"kind": "witness", "model": _witness_json(session, response.witness)}
    else:
        # would-true and might-false describe the whole family intensionally
        basis = {
            "kind": "family",
            "ctx": {"keyframe": keyframe, "constraints": scenario},
        }
    fact_id = len(session.facts) + 1
    return [Fact(fact_id=fact_id, basis=basis, property=prop, provenance=provenance)]


def _render_statement(mode: str, keyframe: int, behavior: str, negated: bool) -> str:
    shown = f"not ({behavior})" if negated else behavior
    if mode == "factual":
        return f"at step {keyframe}, the program decided {shown}"
    if mode == "would":
        if negated:
            return (f"a counterfactual at step {keyframe} exists whose "
                    f"decision satisfies {shown} (witness recorded)")
        return (f"every counterfactual in the family at step {keyframe} "
                f"decides {shown}")
    if negated:
        return (f"no counterfactual in the family at step {keyframe} "
                f"decides {behavior}")
    return (f"some counterfactual at step {keyframe} decides {shown} "
            f"(witness recorded)")


def _witness_json(session: Session, witness: WitnessModel) -> dict[str, Any]:
    from .model import value_to_json

    cat = session.program.catalog
    return {
        "inputs": {
            n: value_to_json(cat.decl(n).domain, v)
            for n, v in witness.inputs.values.items()
        },
        "outputs": {
            n: value_to_json(cat.decl(n).domain, v)
            for n, v in witness.outputs.items()
        },
    }


def _transcript_ref(runner: SolverRunner, mark: int) -> dict[str, Any]:
    ref: dict[str, Any] = {"query_range": [mark, runner.stats.queries]}
    if runner.config.debug_dir:
        ref["debug_dir"] = runner.config.debug_dir
    return ref


# --- adaptive basis derivation -------------------------------------------------------

def derive_basis(session: Session, fact: Fact) -> dict[str, Any]:
    """Seed the next query from a fact's witness: an all-equality constraint
    set matching the witness inputs, ready to drop into a query document."""
    if fact.basis.get("kind") != "witness":
        raise NoWitness(f"fact {fact.fact_id} carries no witness model")
    raw_inputs = fact.basis["model"]["inputs"]
    cat = session.program.catalog
    from .model import ConcreteState, value_from_json

    values = {
        n: value_from_json(cat.decl(n).domain, raw_inputs[n], n)
        for n in cat.input_names
    }
    relaxation = tight_relaxation(cat, ConcreteState(cat, values))
    return relaxation_to_json(relaxation)


def derive_basis_keyframe(session: Session, t: int) -> dict[str, Any]:
    """Tight constraints matching a logged keyframe (the query default)."""
    inputs = restrict(state_at(session.trace, t), "input")
    return relaxation_to_json(tight_relaxation(session.program.catalog, inputs))


def witness_trace(session: Session, fact: Fact) -> str:
    """Replay a witness into a one-step trace log.

    The witness inputs run through the interpreter; the resulting decisions
    complete a full state. Opening a session on this log turns the
    counterfactual into a new factual basis for follow-up queries.
    """
    if fact.basis.get("kind") != "witness":
        raise NoWitness(f"fact {fact.fact_id} carries no witness model")
    from .lang.interp import interpret
    from .model import ConcreteState, Trace, value_from_json

    cat = session.program.catalog
    raw_inputs = fact.basis["model"]["inputs"]
    values = {
        n: value_from_json(cat.decl(n).domain, raw_inputs[n], n)
        for n in cat.input_names
    }
    final, _ = interpret(session.program, ConcreteState(cat, values))
    return serialize_trace(Trace(cat, [final]))


# --- persistence ---------------------------------------------------------------------

def session_to_json(session: Session) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": session.name,
        "program_hash": session.hash,
        "program_text": session.program_text,
        "trace_log": serialize_trace(session.trace),
        "queries": [r.to_json() for r in session.records],
        "facts": [f.to_json() for f in session.facts],
    }


def save_session(session: Session, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(session_to_json(session), fh, indent=1)
        fh.write("\n")


def load_session(
    path: str, current_program_text: Optional[str] = None
) -> Session:
    """Load a session file.

    If the current program text differs from the hash recorded at save time,
    facts are marked stale instead of rejected: proofs no longer bind, but
    the history is still useful.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"cannot read session file: {exc}") from None
    return session_from_json(doc, current_program_text)


def session_from_json(
    doc: dict[str, Any], current_program_text: Optional[str] = None
) -> Session:
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptFile("not a session document")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"session schema {doc['schema_version']}, expected {SCHEMA_VERSION}"
        )
    try:
        text = doc["program_text"]
        session = open_session(text, doc["trace_log"], doc.get("name", "session"))
        session.records = [
            QueryRecord(r["id"], r["doc"], r["response"]) for r in doc["queries"]
        ]
        session.facts = [
            Fact(f["id"], f["basis"], f["property"], f["provenance"],
                 f.get("stale", False))
            for f in doc["facts"]
        ]
    except (KeyError, TypeError) as exc:
        raise CorruptFile(f"session file misses {exc}") from None
    if doc.get("program_hash") != session.hash:
        raise CorruptFile("program text does not match its recorded hash")
    if current_program_text is not None and \
            program_hash(current_program_text) != session.hash:
        for f in session.facts:
            f.stale = True
    return session
