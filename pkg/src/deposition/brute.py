"""Independent brute-force oracle: enumerate the scenario, run the
interpreter, aggregate the behavior verdicts.

This is the validation route for the solver-based pipeline: it shares no
reasoning machinery with symbolic execution or the SMT backend, only the
interpreter and the substitution evaluator. Applicable whenever every
non-equality constraint ranges over a finite enumerable domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator, Optional

from .errors import DomainTooLarge
from .formula import (
    Behavior,
    Eq,
    Member,
    Range,
    Relaxation,
    eval_formula,
)
from .fp import float_to_bits
from .lang.ast import Program, StepBudget
from .lang.interp import interpret
from .model import (
    BoolDomain,
    ConcreteState,
    EnumDomain,
    FloatDomain,
    IntDomain,
    restrict,
)

DEFAULT_ASSIGNMENT_CAP = 1_000_000
DEFAULT_FREE_INT_BITS = 16


def _candidates(
    domain: Any, predicate: Any, var: str, free_int_bits: int
) -> list[Any]:
    """Ascending candidate values for one variable, or DomainTooLarge."""
    if isinstance(predicate, Eq):
        return [predicate.value]
    if isinstance(predicate, Member):
        if isinstance(domain, FloatDomain):
            seen: set[int] = set()
            vals = []
            for v in predicate.values:
                b = float_to_bits(v)
                if b not in seen:
                    seen.add(b)
                    vals.append(v)
            return sorted(vals, key=float_to_bits)
        if isinstance(domain, EnumDomain):
            return sorted(set(predicate.values), key=domain.code)
        return sorted(set(predicate.values))
    if isinstance(predicate, Range):
        if isinstance(domain, IntDomain):
            lo = predicate.lo + (0 if predicate.lo_inclusive else 1)
            hi = predicate.hi - (0 if predicate.hi_inclusive else 1)
            if hi - lo + 1 > (1 << free_int_bits):
                raise DomainTooLarge(
                    f"{var}: integer range of {hi - lo + 1} values"
                )
            return list(range(lo, hi + 1))
        raise DomainTooLarge(f"{var}: float ranges are not enumerable")
    # Free
    if isinstance(domain, BoolDomain):
        return [False, True]
    if isinstance(domain, EnumDomain):
        return list(domain.members)
    if isinstance(domain, IntDomain):
        if domain.width > free_int_bits:
            raise DomainTooLarge(
                f"{var}: free int<{domain.width}> exceeds the bit budget"
            )
        return list(range(domain.lo, domain.hi + 1))
    raise DomainTooLarge(f"{var}: free floats are not enumerable")


def enumerate_scenario(
    relaxation: Relaxation,
    exclude: Optional[ConcreteState] = None,
    cap: int = DEFAULT_ASSIGNMENT_CAP,
    free_int_bits: int = DEFAULT_FREE_INT_BITS,
) -> Iterator[ConcreteState]:
    """All input states satisfying the relaxation, in variable-major order
    (catalog order, values ascending), minus the excluded state if given."""
    catalog = relaxation.catalog
    names = list(catalog.input_names)
    candidate_lists = []
    total = 1
    for name in names:
        cands = _candidates(
            catalog.decl(name).domain,
            relaxation.atoms[name].predicate,
            name,
            free_int_bits,
        )
        candidate_lists.append(cands)
        total *= len(cands)
        if total > cap:
            raise DomainTooLarge(
                f"scenario has more than {cap} assignments"
            )

    def rec(i: int, acc: dict[str, Any]) -> Iterator[ConcreteState]:
        if i == len(names):
            state = ConcreteState(catalog, dict(acc))
            if exclude is not None and _bit_equal(catalog, state, exclude):
                return
            yield state
            return
        for v in candidate_lists[i]:
            acc[names[i]] = v
            yield from rec(i + 1, acc)
        del acc[names[i]]

    return rec(0, {})


def _bit_equal(catalog, state: ConcreteState, other: ConcreteState) -> bool:
    from .model import value_equal

    return all(
        value_equal(catalog.decl(n).domain, state[n], other[n])
        for n in catalog.input_names
    )


@dataclass
class BruteResult:
    verdict: str  # "true" | "false" | "empty_family"
    witness_inputs: Optional[ConcreteState]
    runs: int

    @property
    def empty_family(self) -> bool:
        return self.verdict == "empty_family"


def brute_force_check(
    program: Program,
    mode: str,  # "factual" | "would" | "might"
    relaxation: Relaxation,
    behavior: Behavior,
    budget: StepBudget = StepBudget(),
    exclude: Optional[ConcreteState] = None,
    cap: int = DEFAULT_ASSIGNMENT_CAP,
    free_int_bits: int = DEFAULT_FREE_INT_BITS,
) -> BruteResult:
    """Exhaustively resolve a query by running the interpreter.

    Factual and would verdicts hold when every enumerated run satisfies the
    behavior; might when some run does. The witness is the first satisfying
    (might) or first violating (factual/would) assignment in enumeration
    order. An empty enumeration (punctured singleton) is reported as its own
    verdict rather than a vacuous answer.
    """
    runs = 0
    witness: Optional[ConcreteState] = None
    universal = mode in ("factual", "would")
    found_any = False
    for inputs in enumerate_scenario(relaxation, exclude, cap, free_int_bits):
        found_any = True
        final, _ = interpret(program, inputs, budget)
        runs += 1
        holds = eval_formula(behavior, restrict(final, "decision"))
        if universal and not holds:
            return BruteResult("false", inputs, runs)
        if not universal and holds:
            return BruteResult("true", inputs, runs)
    if not found_any:
        return BruteResult("empty_family", None, 0)
    return BruteResult("true" if universal else "false", witness, runs)
