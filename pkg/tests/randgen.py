"""Random small decision programs and queries for the equivalence suites.

Programs stay within the enumerable fragment: bool, small-int, and enum
inputs (plus at most one float, which queries always pin to finite values),
one or two decision variables, nested branching, and the occasional bounded
loop. Queries are built around a factual input point so punctures are always
valid, and scenario products stay under the brute-force cap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Optional

from deposition.formula import (
    Behavior,
    Eq,
    Free,
    Member,
    Range,
    Relaxation,
    behavior_from_text,
    mk_relaxation,
)
from deposition.lang import parse_program
from deposition.lang.ast import Program
from deposition.model import (
    BoolDomain,
    ConcreteState,
    EnumDomain,
    FloatDomain,
    IntDomain,
)

MAX_ASSIGNMENTS = 512


@dataclass
class GeneratedCase:
    program: Program
    source: str
    factual: ConcreteState
    mode: str
    relaxation: Relaxation
    behavior: Behavior


def _decl_type(rng: random.Random, allow_float: bool) -> tuple[str, Any]:
    kinds = ["bool", "enum", "int"]
    if allow_float:
        kinds.append("float")
    kind = rng.choice(kinds)
    if kind == "bool":
        return "bool", BoolDomain()
    if kind == "float":
        return "float", FloatDomain()
    if kind == "enum":
        members = tuple(f"M{i}" for i in range(rng.randint(2, 4)))
        return "enum { " + ", ".join(members) + " }", EnumDomain(members)
    width = rng.randint(2, 4)
    signed = rng.random() < 0.5
    return (f"{'int' if signed else 'uint'}<{width}>",
            IntDomain(width, signed))


def _random_value(rng: random.Random, domain: Any) -> Any:
    if isinstance(domain, BoolDomain):
        return rng.random() < 0.5
    if isinstance(domain, EnumDomain):
        return rng.choice(domain.members)
    if isinstance(domain, FloatDomain):
        return rng.choice([-2.5, -1.0, -0.0, 0.0, 0.5, 1.25, 3.0, 10.0])
    return rng.randint(domain.lo, domain.hi)


def _literal(domain: Any, value: Any) -> str:
    if isinstance(domain, BoolDomain):
        return "true" if value else "false"
    if isinstance(domain, FloatDomain):
        return repr(float(value))
    if isinstance(domain, EnumDomain):
        return value
    return str(value)


class _ProgramGen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.inputs: dict[str, Any] = {}
        self.decisions: dict[str, Any] = {}
        self.locals: dict[str, Any] = {}
        self.lines: list[str] = []

    def generate(self) -> str:
        rng = self.rng
        decls = []
        n_inputs = rng.randint(2, 4)
        float_used = False
        for i in range(n_inputs):
            text, domain = _decl_type(rng, allow_float=not float_used)
            if isinstance(domain, FloatDomain):
                float_used = True
            name = f"in{i}"
            klass = "env" if rng.random() < 0.7 else "state"
            self.inputs[name] = domain
            decls.append(f"{klass} {name}: {text};")
        for j in range(rng.randint(1, 2)):
            text, domain = _decl_type(rng, allow_float=False)
            name = f"out{j}"
            self.decisions[name] = domain
            init = _literal(domain, _random_value(rng, domain))
            decls.append(f"decision {name}: {text} = {init};")
        body = self._block(depth=0, budget=rng.randint(3, 7))
        return "\n".join(decls + [""] + body) + "\n"

    # --- statements

    def _block(self, depth: int, budget: int) -> list[str]:
        rng = self.rng
        out: list[str] = []
        while budget > 0:
            budget -= 1
            roll = rng.random()
            if roll < 0.45 or depth >= 2:
                out.append(self._assign(depth))
            elif roll < 0.8:
                cond = self._bool_expr(depth=0)
                then = self._block(depth + 1, rng.randint(1, 3))
                if rng.random() < 0.6:
                    orelse = self._block(depth + 1, rng.randint(1, 3))
                    out.append(f"if ({cond}) {{ " + " ".join(then)
                               + " } else { " + " ".join(orelse) + " }")
                else:
                    out.append(f"if ({cond}) {{ " + " ".join(then) + " }")
            elif roll < 0.9 and depth == 0 and self._int_locals():
                name = rng.choice(self._int_locals())
                domain = self.locals[name]
                bound = rng.randint(1, 3)
                hi = _literal(domain, min(domain.hi, 3))
                body = self._assign(depth + 1)
                out.append(
                    f"while ({name} < {hi}) bound {bound} "
                    f"{{ {name} := {name} + 1; {body} }}"
                )
            else:
                out.append("return;")
                break
        if not out:
            out.append(self._assign(depth))
        return out

    def _int_locals(self) -> list[str]:
        return [n for n, d in self.locals.items() if isinstance(d, IntDomain)]

    def _assign(self, depth: int) -> str:
        rng = self.rng
        # locals only at top level: they are block-scoped for visibility
        if depth == 0 and rng.random() < 0.25 and len(self.locals) < 2:
            name = f"tmp{len(self.locals)}"
            domain = IntDomain(4, signed=True)
            init = self._num_expr(domain, 0)
            self.locals[name] = domain
            return f"local {name}: int<4> = {init};"
        name = rng.choice(sorted(self.decisions))
        domain = self.decisions[name]
        return f"{name} := {self._expr_of(domain, 0)};"

    # --- expressions

    def _expr_of(self, domain: Any, depth: int) -> str:
        if isinstance(domain, BoolDomain):
            return self._bool_expr(depth)
        if isinstance(domain, EnumDomain):
            return self._enum_expr(domain)
        return self._num_expr(domain, depth)

    def _vars_of(self, domain: Any) -> list[str]:
        pools = [self.inputs, self.decisions, self.locals]
        return sorted(
            name for pool in pools for name, d in pool.items() if d == domain
        )

    def _enum_expr(self, domain: EnumDomain) -> str:
        rng = self.rng
        candidates = self._vars_of(domain)
        if candidates and rng.random() < 0.4:
            return rng.choice(candidates)
        return rng.choice(domain.members)

    def _num_expr(self, domain: Any, depth: int) -> str:
        rng = self.rng
        if depth >= 2 or rng.random() < 0.45:
            candidates = self._vars_of(domain)
            if candidates and rng.random() < 0.7:
                return rng.choice(candidates)
            return _literal(domain, _random_value(rng, domain))
        op = rng.choice(["+", "-", "*"])
        lhs = self._num_expr(domain, depth + 1)
        rhs = self._num_expr(domain, depth + 1)
        return f"({lhs} {op} {rhs})"

    def _bool_expr(self, depth: int) -> str:
        rng = self.rng
        roll = rng.random()
        if depth < 2 and roll < 0.3:
            op = rng.choice(["&&", "||"])
            return (f"({self._bool_expr(depth + 1)} {op} "
                    f"{self._bool_expr(depth + 1)})")
        if depth < 2 and roll < 0.4:
            return f"!{self._bool_expr(depth + 1)}"
        # a comparison over some shared domain
        domains = [d for d in self.inputs.values()]
        domain = rng.choice(domains)
        if isinstance(domain, BoolDomain):
            name = rng.choice(self._vars_of(domain))
            return name if rng.random() < 0.6 else f"({name} == {self._bool_literal()})"
        if isinstance(domain, EnumDomain):
            name = rng.choice(self._vars_of(domain))
            op = rng.choice(["==", "!="])
            return f"({name} {op} {rng.choice(domain.members)})"
        op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
        lhs = self._num_expr(domain, depth + 1)
        rhs = self._num_expr(domain, depth + 1)
        return f"({lhs} {op} {rhs})"

    def _bool_literal(self) -> str:
        return "true" if self.rng.random() < 0.5 else "false"


def random_program(rng: random.Random) -> tuple[Program, str]:
    for _ in range(50):
        gen = _ProgramGen(rng)
        source = gen.generate()
        try:
            return parse_program(source), source
        except Exception:
            continue
    raise AssertionError("could not generate a valid program")


def _atom_around(rng: random.Random, domain: Any, factual: Any):
    """A random predicate guaranteed to admit the factual value."""
    roll = rng.random()
    if isinstance(domain, FloatDomain):
        if roll < 0.6:
            return Eq(factual)
        extras = {_random_value(rng, domain) for _ in range(rng.randint(1, 2))}
        return Member(tuple({factual} | extras))
    if roll < 0.35:
        return Eq(factual)
    if roll < 0.6:
        extras = {_random_value(rng, domain) for _ in range(rng.randint(1, 2))}
        values = list({factual} | extras)
        return Member(tuple(values))
    if roll < 0.75 and isinstance(domain, IntDomain):
        lo = max(domain.lo, factual - rng.randint(0, 3))
        hi = min(domain.hi, factual + rng.randint(0, 3))
        return Range(lo, hi)
    return Free()


def _count(domain: Any, predicate: Any) -> int:
    if isinstance(predicate, Eq):
        return 1
    if isinstance(predicate, Member):
        return len(predicate.values)
    if isinstance(predicate, Range):
        return predicate.hi - predicate.lo + 1
    if isinstance(domain, BoolDomain):
        return 2
    if isinstance(domain, EnumDomain):
        return len(domain.members)
    if isinstance(domain, IntDomain):
        return domain.hi - domain.lo + 1
    return 1 << 62  # free float: never enumerable


def random_case(rng: random.Random, program: Program, source: str) -> GeneratedCase:
    catalog = program.catalog
    factual_values = {
        n: _random_value(rng, catalog.decl(n).domain)
        for n in catalog.input_names
    }
    factual = ConcreteState(catalog, factual_values)
    mode = rng.choice(["factual", "might", "would", "might", "would"])
    atoms: dict[str, Any] = {}
    for name in catalog.input_names:
        domain = catalog.decl(name).domain
        if mode == "factual":
            atoms[name] = Eq(factual[name])
        else:
            atoms[name] = _atom_around(rng, domain, factual[name])
    # keep the scenario enumerable for the brute-force route
    names = sorted(atoms, key=lambda n: -_count(catalog.decl(n).domain, atoms[n]))
    for name in names:
        product = 1
        for n in atoms:
            product *= _count(catalog.decl(n).domain, atoms[n])
        if product <= MAX_ASSIGNMENTS:
            break
        atoms[name] = Eq(factual[name])
    relaxation = mk_relaxation(catalog, atoms)
    behavior = behavior_from_text(catalog, _random_behavior(rng, program))
    return GeneratedCase(
        program=program,
        source=source,
        factual=factual,
        mode=mode,
        relaxation=relaxation,
        behavior=behavior,
    )


def _random_behavior(rng: random.Random, program: Program) -> str:
    catalog = program.catalog
    terms = []
    for name in catalog.decision_names:
        domain = catalog.decl(name).domain
        if isinstance(domain, BoolDomain):
            terms.append(name if rng.random() < 0.5 else f"!{name}")
        elif isinstance(domain, EnumDomain):
            op = rng.choice(["==", "!="])
            terms.append(f"({name} {op} {rng.choice(domain.members)})")
        else:
            op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
            value = _random_value(rng, domain)
            terms.append(f"({name} {op} {_literal(domain, value)})")
    rng.shuffle(terms)
    picked = terms[: rng.randint(1, len(terms))]
    joiner = " && " if rng.random() < 0.5 else " || "
    text = joiner.join(picked)
    if rng.random() < 0.3:
        text = f"!({text})"
    return text
