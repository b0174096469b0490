"""Variable catalog, concrete states, traces, and trace-log ingestion.

The catalog partitions variables into environment (external inputs), state
(internal inputs) and decision (outputs) classes; every value carries a
declared domain. Traces are ordered sequences of full states read from
newline-delimited JSON logs. Floats round-trip bit-exactly: the serialized
form carries both a decimal rendering and the 64-bit pattern, and the bit
pattern is authoritative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    CatalogError,
    DomainViolation,
    EmptyTrace,
    MissingVariable,
    NonMonotonicStep,
    StepOutOfRange,
    TraceFormatError,
    UnknownVariable,
)
from .fp import bits_to_float, float_to_bits


class VarClass(Enum):
    ENV = "env"
    STATE = "state"
    DECISION = "decision"


#: Selector for restrict(): a concrete class, or "input" for env+state.
ClassSelector = Union[VarClass, str]

_SELECTORS: dict[str, tuple[VarClass, ...]] = {
    "env": (VarClass.ENV,),
    "state": (VarClass.STATE,),
    "decision": (VarClass.DECISION,),
    "input": (VarClass.ENV, VarClass.STATE),
}


def _selector_classes(selector: ClassSelector) -> tuple[VarClass, ...]:
    if isinstance(selector, VarClass):
        return (selector,)
    try:
        return _SELECTORS[selector]
    except KeyError:
        raise ValueError(f"unknown class selector {selector!r}") from None


# --- domains -----------------------------------------------------------------

@dataclass(frozen=True)
class BoolDomain:
    kind: str = field(default="bool", init=False)

    def contains(self, value: Any) -> bool:
        return isinstance(value, bool)

    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntDomain:
    width: int
    signed: bool = True
    kind: str = field(default="int", init=False)

    def __post_init__(self) -> None:
        if self.width < 1 or self.width > 64:
            raise CatalogError(f"int width must be in [1, 64], got {self.width}")

    @property
    def lo(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def hi(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def contains(self, value: Any) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def wrap(self, value: int) -> int:
        """Two's-complement wrap of an unbounded int into this domain."""
        value &= (1 << self.width) - 1
        if self.signed and value > self.hi:
            value -= 1 << self.width
        return value

    def to_unsigned(self, value: int) -> int:
        return value & ((1 << self.width) - 1)

    def __str__(self) -> str:
        return f"{'int' if self.signed else 'uint'}<{self.width}>"


@dataclass(frozen=True)
class FloatDomain:
    kind: str = field(default="float", init=False)

    def contains(self, value: Any) -> bool:
        return isinstance(value, float)

    def __str__(self) -> str:
        return "float"


@dataclass(frozen=True)
class EnumDomain:
    members: tuple[str, ...]
    kind: str = field(default="enum", init=False)

    def __post_init__(self) -> None:
        if not self.members:
            raise CatalogError("enum domains need at least one member")
        if len(set(self.members)) != len(self.members):
            raise CatalogError(f"duplicate enum members in {self.members}")

    def contains(self, value: Any) -> bool:
        return isinstance(value, str) and value in self.members

    def code(self, member: str) -> int:
        return self.members.index(member)

    @property
    def code_width(self) -> int:
        """Width of the unsigned bitvector encoding, at least one bit."""
        return max(1, (len(self.members) - 1).bit_length())

    def __str__(self) -> str:
        return "enum {" + ", ".join(self.members) + "}"


Domain = Union[BoolDomain, IntDomain, FloatDomain, EnumDomain]


def value_equal(domain: Domain, a: Any, b: Any) -> bool:
    """Domain-aware equality; floats compare by bit pattern."""
    if isinstance(domain, FloatDomain):
        return float_to_bits(a) == float_to_bits(b)
    return a == b


# --- declarations and catalog ---------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    name: str
    klass: VarClass
    domain: Domain


class VarCatalog:
    """Ordered variable declarations with unique names.

    A catalog must declare at least one decision variable: a decision
    program has to decide something.
    """

    def __init__(self, decls: Iterable[VarDecl]):
        self.decls: tuple[VarDecl, ...] = tuple(decls)
        self._by_name: dict[str, VarDecl] = {}
        for d in self.decls:
            if d.name in self._by_name:
                raise CatalogError(f"duplicate variable {d.name!r}")
            self._by_name[d.name] = d
        if not any(d.klass is VarClass.DECISION for d in self.decls):
            raise CatalogError("catalog declares no decision variable")

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[VarDecl]:
        return iter(self.decls)

    def __len__(self) -> int:
        return len(self.decls)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VarCatalog) and self.decls == other.decls

    def decl(self, name: str) -> VarDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariable(f"variable {name!r} not in catalog") from None

    def names(self, selector: ClassSelector = None) -> tuple[str, ...]:  # type: ignore[assignment]
        if selector is None:
            return tuple(d.name for d in self.decls)
        classes = _selector_classes(selector)
        return tuple(d.name for d in self.decls if d.klass in classes)

    @property
    def env_names(self) -> tuple[str, ...]:
        return self.names(VarClass.ENV)

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.names(VarClass.STATE)

    @property
    def input_names(self) -> tuple[str, ...]:
        return self.names("input")

    @property
    def decision_names(self) -> tuple[str, ...]:
        return self.names(VarClass.DECISION)


# --- concrete states ---------------------------------------------------------

class ConcreteState:
    """An immutable name -> value map validated against a catalog.

    A full state covers all variables; a restricted one covers exactly one
    class partition (env, state, input, or decision).
    """

    def __init__(self, catalog: VarCatalog, values: Mapping[str, Any]):
        self.catalog = catalog
        vals: dict[str, Any] = {}
        for name, value in values.items():
            decl = catalog.decl(name)
            if not decl.domain.contains(value):
                raise DomainViolation(
                    f"value {value!r} outside domain {decl.domain} of {name!r}"
                )
            vals[name] = value
        # catalog order, so that iteration and serialization are stable
        self.values: dict[str, Any] = {
            d.name: vals[d.name] for d in catalog.decls if d.name in vals
        }

    def __getitem__(self, name: str) -> Any:
        try:
            return self.values[name]
        except KeyError:
            raise MissingVariable(f"state does not cover {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConcreteState):
            return NotImplemented
        if self.values.keys() != other.values.keys():
            return False
        return all(
            value_equal(self.catalog.decl(n).domain, v, other.values[n])
            for n, v in self.values.items()
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v!r}" for n, v in self.values.items())
        return f"ConcreteState({inner})"

    def covers(self, selector: ClassSelector) -> bool:
        return set(self.values) >= set(self.catalog.names(selector))

    def is_full(self) -> bool:
        return len(self.values) == len(self.catalog)


def restrict(state: ConcreteState, selector: ClassSelector) -> ConcreteState:
    """Project a state onto one class partition, values unchanged."""
    names = state.catalog.names(selector)
    missing = [n for n in names if n not in state.values]
    if missing:
        raise MissingVariable(
            f"state does not cover {missing[0]!r}; cannot restrict to {selector}"
        )
    return ConcreteState(state.catalog, {n: state.values[n] for n in names})


# --- traces -------------------------------------------------------------------

class Trace:
    """Ordered full states at steps 0, 1, 2, ... with no gaps."""

    def __init__(self, catalog: VarCatalog, steps: Sequence[ConcreteState]):
        self.catalog = catalog
        self.steps: tuple[ConcreteState, ...] = tuple(steps)
        if not self.steps:
            raise EmptyTrace("trace has no steps")
        for i, st in enumerate(self.steps):
            if not st.is_full():
                missing = set(catalog.names()) - set(st.values)
                raise MissingVariable(
                    f"trace step {i} does not cover {sorted(missing)[0]!r}"
                )

    def __len__(self) -> int:
        return len(self.steps)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Trace)
            and self.catalog == other.catalog
            and self.steps == other.steps
        )


def state_at(trace: Trace, t: int) -> ConcreteState:
    if not 0 <= t < len(trace):
        raise StepOutOfRange(f"step {t} outside trace of length {len(trace)}")
    return trace.steps[t]


# --- value (de)serialization ---------------------------------------------------

#: Records may carry extra telemetry under this key; it is ignored.
RESERVED_META_KEY = "meta"


def value_to_json(domain: Domain, value: Any) -> Any:
    if isinstance(domain, FloatDomain):
        return {"dec": _float_dec(value), "bits": f"{float_to_bits(value):016x}"}
    return value


def value_from_json(domain: Domain, raw: Any, var: str) -> Any:
    if isinstance(domain, BoolDomain):
        if not isinstance(raw, bool):
            raise DomainViolation(f"{var}: expected a boolean, got {raw!r}")
        return raw
    if isinstance(domain, IntDomain):
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise DomainViolation(f"{var}: expected an integer, got {raw!r}")
        if not domain.contains(raw):
            raise DomainViolation(f"{var}: {raw} outside {domain}")
        return raw
    if isinstance(domain, EnumDomain):
        if not domain.contains(raw):
            raise DomainViolation(f"{var}: {raw!r} not a member of {domain}")
        return raw
    # float: plain number, or {"dec":..., "bits":...} with bits authoritative
    if isinstance(raw, dict):
        bits = raw.get("bits")
        if not isinstance(bits, str) or len(bits) != 16:
            raise DomainViolation(f"{var}: float bits must be 16 hex chars")
        try:
            return bits_to_float(int(bits, 16))
        except ValueError:
            raise DomainViolation(f"{var}: bad float bits {bits!r}") from None
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    raise DomainViolation(f"{var}: expected a float, got {raw!r}")


def _float_dec(x: float) -> float | str:
    # JSON has no inf/nan literals; fall back to strings for the dec field
    if math.isinf(x) or math.isnan(x):
        return repr(x)
    return x


# --- trace log parsing ----------------------------------------------------------

def parse_trace_log(document: bytes | str, catalog: VarCatalog) -> Trace:
    """Parse a newline-delimited trace log against a catalog.

    Each record is ``{"t": <int>, "vars": {<name>: <value>}}``; float values
    may be ``{"dec": <decimal>, "bits": <16 hex chars>}``. Extra fields under
    the reserved ``meta`` key are ignored.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    steps: list[ConcreteState] = []
    expected_t = 0
    for lineno, line in enumerate(document.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {lineno}: not valid JSON ({exc})") from None
        if not isinstance(record, dict) or "t" not in record or "vars" not in record:
            raise TraceFormatError(f"line {lineno}: record needs 't' and 'vars'")
        t = record["t"]
        if not isinstance(t, int):
            raise TraceFormatError(f"line {lineno}: step index must be an int")
        if t != expected_t:
            raise NonMonotonicStep(
                f"line {lineno}: expected step {expected_t}, got {t}"
            )
        expected_t += 1
        raw_vars = record["vars"]
        if not isinstance(raw_vars, dict):
            raise TraceFormatError(f"line {lineno}: 'vars' must be an object")
        values: dict[str, Any] = {}
        for name, raw in raw_vars.items():
            if name == RESERVED_META_KEY:
                continue
            if name not in catalog:
                raise UnknownVariable(f"line {lineno}: unknown variable {name!r}")
            values[name] = value_from_json(catalog.decl(name).domain, raw, name)
        steps.append(ConcreteState(catalog, values))
    if not steps:
        raise EmptyTrace("trace log contains no records")
    return Trace(catalog, steps)


def serialize_trace(trace: Trace) -> str:
    lines = []
    for t, st in enumerate(trace.steps):
        vars_json = {
            n: value_to_json(trace.catalog.decl(n).domain, v)
            for n, v in st.values.items()
        }
        lines.append(json.dumps({"t": t, "vars": vars_json}, sort_keys=False))
    return "\n".join(lines) + "\n"


# --- catalog file format ----------------------------------------------------------

def domain_to_json(domain: Domain) -> dict[str, Any]:
    if isinstance(domain, BoolDomain):
        return {"kind": "bool"}
    if isinstance(domain, IntDomain):
        return {"kind": "int", "width": domain.width, "signed": domain.signed}
    if isinstance(domain, FloatDomain):
        return {"kind": "float"}
    return {"kind": "enum", "members": list(domain.members)}


def domain_from_json(raw: dict[str, Any]) -> Domain:
    kind = raw.get("kind")
    if kind == "bool":
        return BoolDomain()
    if kind == "int":
        return IntDomain(width=int(raw["width"]), signed=bool(raw.get("signed", True)))
    if kind == "float":
        return FloatDomain()
    if kind == "enum":
        return EnumDomain(tuple(raw["members"]))
    raise CatalogError(f"unknown domain kind {kind!r}")


def catalog_to_json(catalog: VarCatalog) -> dict[str, Any]:
    return {
        "variables": [
            {"name": d.name, "class": d.klass.value, "domain": domain_to_json(d.domain)}
            for d in catalog.decls
        ]
    }


def catalog_from_json(raw: dict[str, Any]) -> VarCatalog:
    try:
        entries = raw["variables"]
    except (TypeError, KeyError):
        raise CatalogError("catalog document needs a 'variables' list") from None
    decls = [
        VarDecl(e["name"], VarClass(e["class"]), domain_from_json(e["domain"]))
        for e in entries
    ]
    return VarCatalog(decls)
