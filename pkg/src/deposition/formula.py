"""Constraint algebra: relaxations, punctured relaxations, behaviors.

A relaxation is one atomic constraint per input variable (equality, range,
member set, or free); a punctured relaxation removes exactly one model, the
factual input state, by conjoining the negation of its bit-exact encoding.
Behaviors are boolean expressions over decision variables. Evaluation is by
substitution; float equality atoms compare bit patterns (so -0.0 != +0.0 and
NaN payloads are distinct models), while range atoms use IEEE ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Union

from .errors import (
    DomainViolation,
    FactualOutsideRelaxation,
    KeyframeMismatch,
    MissingVariable,
    NotARelaxation,
    NotTight,
    QueryFormatError,
    WrongClass,
)
from .lang.ast import Binary, Expr, Lit, Name
from .lang.interp import eval_expr
from .lang.parse import expr_variables, parse_expression
from .model import (
    BoolDomain,
    ConcreteState,
    Domain,
    FloatDomain,
    IntDomain,
    Trace,
    VarCatalog,
    VarClass,
    state_at,
    value_equal,
    value_from_json,
    value_to_json,
)


# --- atomic predicates ----------------------------------------------------------

@dataclass(frozen=True)
class Eq:
    value: Any


@dataclass(frozen=True)
class Range:
    lo: Any
    hi: Any
    lo_inclusive: bool = True
    hi_inclusive: bool = True


@dataclass(frozen=True)
class Member:
    values: tuple[Any, ...]


@dataclass(frozen=True)
class Free:
    pass


Predicate = Union[Eq, Range, Member, Free]


@dataclass(frozen=True)
class AtomicConstraint:
    """A predicate referencing exactly one variable."""

    var: str
    predicate: Predicate


def _check_atom(catalog: VarCatalog, atom: AtomicConstraint) -> None:
    decl = catalog.decl(atom.var)
    if decl.klass is VarClass.DECISION:
        raise WrongClass(
            f"constraint on decision variable {atom.var!r}; scenarios "
            "constrain inputs only"
        )
    domain = decl.domain
    pred = atom.predicate
    if isinstance(pred, Free):
        return
    if isinstance(pred, Eq):
        if not domain.contains(pred.value):
            raise DomainViolation(
                f"{atom.var}: {pred.value!r} outside domain {domain}"
            )
        return
    if isinstance(pred, Member):
        if not pred.values:
            raise DomainViolation(f"{atom.var}: empty member set")
        for v in pred.values:
            if not domain.contains(v):
                raise DomainViolation(f"{atom.var}: {v!r} outside domain {domain}")
        return
    if not isinstance(domain, (IntDomain, FloatDomain)):
        raise DomainViolation(
            f"{atom.var}: range constraints need an ordered domain, not {domain}"
        )
    for bound in (pred.lo, pred.hi):
        if not domain.contains(bound):
            raise DomainViolation(f"{atom.var}: {bound!r} outside domain {domain}")
        if isinstance(domain, FloatDomain) and math.isnan(bound):
            raise DomainViolation(f"{atom.var}: NaN range bound")
    if pred.lo > pred.hi:
        raise DomainViolation(f"{atom.var}: range lo {pred.lo!r} > hi {pred.hi!r}")


def eval_atom(domain: Domain, pred: Predicate, value: Any) -> bool:
    if isinstance(pred, Free):
        return True
    if isinstance(pred, Eq):
        return value_equal(domain, value, pred.value)
    if isinstance(pred, Member):
        return any(value_equal(domain, value, v) for v in pred.values)
    if isinstance(domain, FloatDomain) and math.isnan(value):
        return False
    lo_ok = value >= pred.lo if pred.lo_inclusive else value > pred.lo
    hi_ok = value <= pred.hi if pred.hi_inclusive else value < pred.hi
    return lo_ok and hi_ok


# --- relaxations ------------------------------------------------------------------

class Relaxation:
    """phi(E) and psi(S): one atom per input variable, conjoined."""

    def __init__(self, catalog: VarCatalog, atoms: Iterable[AtomicConstraint]):
        self.catalog = catalog
        self.atoms: dict[str, AtomicConstraint] = {}
        for atom in atoms:
            if atom.var in self.atoms:
                raise NotARelaxation(f"variable {atom.var!r} constrained twice")
            _check_atom(catalog, atom)
            self.atoms[atom.var] = atom
        missing = [n for n in catalog.input_names if n not in self.atoms]
        if missing:
            raise NotARelaxation(
                f"no constraint for input variable {missing[0]!r}"
            )
        extra = [n for n in self.atoms if n not in catalog.input_names]
        if extra:  # decision vars already rejected; this catches stale names
            raise NotARelaxation(f"constraint on non-input {extra[0]!r}")
        # catalog order for deterministic iteration
        self.atoms = {
            n: self.atoms[n] for n in catalog.input_names
        }

    def env_part(self) -> dict[str, AtomicConstraint]:
        return {n: self.atoms[n] for n in self.catalog.env_names}

    def state_part(self) -> dict[str, AtomicConstraint]:
        return {n: self.atoms[n] for n in self.catalog.state_names}

    def is_tight(self) -> bool:
        return all(isinstance(a.predicate, Eq) for a in self.atoms.values())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Relaxation)
            and self.catalog == other.catalog
            and self.atoms == other.atoms
        )


def mk_relaxation(
    catalog: VarCatalog,
    constraints: Union[Iterable[AtomicConstraint], Mapping[str, Predicate]],
) -> Relaxation:
    """Validate one-atom-per-input-variable and build the relaxation."""
    if isinstance(constraints, Mapping):
        atoms: Iterable[AtomicConstraint] = [
            AtomicConstraint(var, pred) for var, pred in constraints.items()
        ]
    else:
        atoms = constraints
    return Relaxation(catalog, atoms)


def tight_relaxation(catalog: VarCatalog, inputs: ConcreteState) -> Relaxation:
    """All-equality relaxation pinned to a concrete input state."""
    return Relaxation(
        catalog,
        [AtomicConstraint(n, Eq(inputs[n])) for n in catalog.input_names],
    )


class PuncturedRelaxation:
    """A relaxation with the factual input state excluded as a model.

    F is the conjunction of bit-exact equalities over all input variables,
    so the exclusion of exactly one model is syntactic.
    """

    def __init__(self, base: Relaxation, puncture_state: ConcreteState):
        for n in base.catalog.input_names:
            if n not in puncture_state:
                raise MissingVariable(f"puncture state does not cover {n!r}")
        if not eval_relaxation(base, puncture_state):
            raise FactualOutsideRelaxation(
                "the factual input state does not satisfy the base relaxation"
            )
        self.base = base
        self.puncture_state = puncture_state

    @property
    def catalog(self) -> VarCatalog:
        return self.base.catalog

    def excludes(self, state: ConcreteState) -> bool:
        """Does the puncture F match this state bit-exactly on all inputs?"""
        cat = self.base.catalog
        return all(
            value_equal(cat.decl(n).domain, state[n], self.puncture_state[n])
            for n in cat.input_names
        )


def puncture(base: Relaxation, factual_inputs: ConcreteState) -> PuncturedRelaxation:
    return PuncturedRelaxation(base, factual_inputs)


# --- behaviors --------------------------------------------------------------------

class Behavior:
    """A boolean condition over decision variables."""

    def __init__(self, catalog: VarCatalog, expr: Expr, text: str):
        self.catalog = catalog
        self.expr = expr
        self.text = text
        self.variables = tuple(sorted(expr_variables(expr)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Behavior) and self.text == other.text

    def __repr__(self) -> str:
        return f"Behavior({self.text!r})"


def behavior_from_text(catalog: VarCatalog, text: str) -> Behavior:
    expr = parse_expression(
        text, catalog,
        allowed_classes={VarClass.DECISION},
        expected=BoolDomain(),
    )
    return Behavior(catalog, expr, text)


def negate_behavior(behavior: Behavior) -> Behavior:
    return behavior_from_text(behavior.catalog, f"!({behavior.text})")


# --- evaluation --------------------------------------------------------------------

def eval_relaxation(relaxation: Relaxation, state: ConcreteState) -> bool:
    cat = relaxation.catalog
    for name, atom in relaxation.atoms.items():
        if name not in state:
            raise MissingVariable(f"state does not cover {name!r}")
        if not eval_atom(cat.decl(name).domain, atom.predicate, state[name]):
            return False
    return True


def eval_formula(
    formula: Union[Relaxation, PuncturedRelaxation, Behavior],
    state: ConcreteState,
) -> bool:
    """Substitution semantics over a concrete state."""
    if isinstance(formula, Relaxation):
        return eval_relaxation(formula, state)
    if isinstance(formula, PuncturedRelaxation):
        if not eval_relaxation(formula.base, state):
            return False
        return not formula.excludes(state)
    env = {}
    for name in formula.variables:
        if name not in state:
            raise MissingVariable(f"state does not cover {name!r}")
        env[name] = state[name]
    return bool(eval_expr(formula.expr, env))


def validate_factual_scenario(
    relaxation: Relaxation, trace: Trace, t: int
) -> None:
    """A factual scenario must be tight (all equalities, so the unique-model
    condition is syntactic) and must match the logged keyframe."""
    loose = [n for n, a in relaxation.atoms.items()
             if not isinstance(a.predicate, Eq)]
    if loose:
        raise NotTight(
            f"factual scenario constrains {loose[0]!r} with a non-equality "
            "atom; uniqueness requires equality atoms"
        )
    keyframe = state_at(trace, t)
    cat = relaxation.catalog
    for name, atom in relaxation.atoms.items():
        assert isinstance(atom.predicate, Eq)
        if not value_equal(cat.decl(name).domain, keyframe[name], atom.predicate.value):
            raise KeyframeMismatch(
                f"{name}: scenario pins {atom.predicate.value!r} but the "
                f"keyframe logged {keyframe[name]!r}"
            )


# --- raw-formula escape hatch (unstable) -----------------------------------------

def relaxation_from_expr(catalog: VarCatalog, text: str) -> Relaxation:
    """Build a relaxation from a conjunction expression. Unstable interface.

    Only conjunctions of single-variable equalities are accepted; a conjunct
    mentioning two or more variables is not a relaxation by definition.
    Variables not mentioned become Free.
    """
    expr = parse_expression(text, catalog, allowed_classes={VarClass.ENV, VarClass.STATE})
    atoms: dict[str, Predicate] = {n: Free() for n in catalog.input_names}
    for conjunct in _split_conjuncts(expr):
        mentioned = expr_variables(conjunct)
        if len(mentioned) != 1:
            raise NotARelaxation(
                f"conjunct references {len(mentioned)} variables; each must "
                "reference exactly one"
            )
        atom = _conjunct_to_atom(conjunct)
        if atom is None:
            raise NotARelaxation(
                "unsupported conjunct shape for the raw-formula interface"
            )
        if not isinstance(atoms[atom.var], Free):
            raise NotARelaxation(f"variable {atom.var!r} constrained twice")
        atoms[atom.var] = atom.predicate
    return mk_relaxation(catalog, atoms)


def _split_conjuncts(expr: Expr) -> list[Expr]:
    if isinstance(expr, Binary) and expr.op == "&&":
        return _split_conjuncts(expr.lhs) + _split_conjuncts(expr.rhs)
    return [expr]


def _conjunct_to_atom(expr: Expr) -> Optional[AtomicConstraint]:
    if not (isinstance(expr, Binary) and expr.op == "=="):
        return None
    sides = (expr.lhs, expr.rhs)
    for var_side, lit_side in (sides, sides[::-1]):
        if isinstance(var_side, Name) and var_side.resolved == "var":
            value = _literal_of(lit_side)
            if value is not None:
                return AtomicConstraint(var_side.ident, Eq(value))
    return None


def _literal_of(expr: Expr) -> Any:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Name) and expr.resolved == "member":
        return expr.ident
    return None


# --- query JSON schema --------------------------------------------------------------

@dataclass
class ParsedQuery:
    """A query document resolved against a trace keyframe."""

    mode: str  # "factual" | "might" | "would"
    keyframe: int
    relaxation: Relaxation
    punctured: Optional[PuncturedRelaxation]
    behavior: Behavior
    budget_steps: Optional[int] = None
    raw: dict = field(default_factory=dict)


_MODES = ("factual", "might", "would")


def predicate_from_json(domain: Domain, raw: Any, var: str) -> Predicate:
    if raw == "free":
        return Free()
    if not isinstance(raw, dict):
        raise QueryFormatError(f"{var}: constraint must be an object or 'free'")
    if "eq" in raw:
        return Eq(value_from_json(domain, raw["eq"], var))
    if "in" in raw:
        vals = raw["in"]
        if not isinstance(vals, list) or not vals:
            raise QueryFormatError(f"{var}: 'in' needs a non-empty list")
        return Member(tuple(value_from_json(domain, v, var) for v in vals))
    if "range" in raw:
        spec = raw["range"]
        if isinstance(spec, list) and len(spec) == 2:
            lo, hi = spec
            lo_inc = hi_inc = True
        elif isinstance(spec, dict):
            lo, hi = spec["lo"], spec["hi"]
            lo_inc = bool(spec.get("lo_inclusive", True))
            hi_inc = bool(spec.get("hi_inclusive", True))
        else:
            raise QueryFormatError(f"{var}: 'range' needs [lo, hi]")
        return Range(
            value_from_json(domain, lo, var),
            value_from_json(domain, hi, var),
            lo_inc, hi_inc,
        )
    raise QueryFormatError(f"{var}: unknown constraint {sorted(raw)!r}")


def predicate_to_json(domain: Domain, pred: Predicate) -> Any:
    if isinstance(pred, Free):
        return "free"
    if isinstance(pred, Eq):
        return {"eq": value_to_json(domain, pred.value)}
    if isinstance(pred, Member):
        return {"in": [value_to_json(domain, v) for v in pred.values]}
    body: dict[str, Any] = {
        "lo": value_to_json(domain, pred.lo),
        "hi": value_to_json(domain, pred.hi),
    }
    if not pred.lo_inclusive:
        body["lo_inclusive"] = False
    if not pred.hi_inclusive:
        body["hi_inclusive"] = False
    if pred.lo_inclusive and pred.hi_inclusive:
        return {"range": [body["lo"], body["hi"]]}
    return {"range": body}


def relaxation_to_json(relaxation: Relaxation) -> dict[str, Any]:
    cat = relaxation.catalog
    return {
        n: predicate_to_json(cat.decl(n).domain, a.predicate)
        for n, a in relaxation.atoms.items()
    }


def parse_query_json(
    doc: Mapping[str, Any],
    catalog: VarCatalog,
    trace: Trace,
) -> ParsedQuery:
    """Resolve a query document against a trace.

    Input variables omitted from ``constraints`` are locked to their factual
    keyframe value (an equality atom), mirroring how an investigator starts
    from the logged state and relaxes chosen variables.
    """
    mode = doc.get("mode")
    if mode not in _MODES:
        raise QueryFormatError(f"mode must be one of {_MODES}, got {mode!r}")
    if "keyframe" not in doc:
        raise QueryFormatError("query needs a 'keyframe' step index")
    keyframe = doc["keyframe"]
    if not isinstance(keyframe, int):
        raise QueryFormatError("'keyframe' must be an integer")
    factual = state_at(trace, keyframe)

    raw_constraints = doc.get("constraints", {})
    if not isinstance(raw_constraints, Mapping):
        raise QueryFormatError("'constraints' must be an object")
    unknown = [n for n in raw_constraints if n not in catalog.input_names]
    if unknown:
        raise QueryFormatError(
            f"constraint on {unknown[0]!r}, which is not an input variable"
        )
    atoms: dict[str, Predicate] = {}
    for name in catalog.input_names:
        domain = catalog.decl(name).domain
        if name in raw_constraints:
            atoms[name] = predicate_from_json(domain, raw_constraints[name], name)
        else:
            atoms[name] = Eq(factual[name])
    relaxation = mk_relaxation(catalog, atoms)

    behavior_text = doc.get("behavior")
    if not isinstance(behavior_text, str):
        raise QueryFormatError("query needs a 'behavior' expression string")
    behavior = behavior_from_text(catalog, behavior_text)

    budget = doc.get("budget")
    if budget is not None and (not isinstance(budget, int) or budget < 1):
        raise QueryFormatError("'budget' must be a positive integer")

    punctured: Optional[PuncturedRelaxation] = None
    if mode in ("might", "would"):
        from .model import restrict

        punctured = puncture(relaxation, restrict(factual, "input"))
    return ParsedQuery(
        mode=mode,
        keyframe=keyframe,
        relaxation=relaxation,
        punctured=punctured,
        behavior=behavior,
        budget_steps=budget,
        raw=dict(doc),
    )
