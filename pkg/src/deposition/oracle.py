"""Query resolution: factual, might-, and would-counterfactual verdicts.

The decision logic comes from symbolic execution under the scenario's base
relaxation; the puncture negation joins at query time only. Verdicts follow
the validity/satisfiability encodings:

  factual:  (phi and psi and Pi) -> beta                 valid?
  would:    (phi and psi and not F and Pi) -> beta        valid?
  might:    (phi and psi and not F and Pi)
            and ((phi and psi and not F and Pi) -> beta)  satisfiable?

with the equisatisfiable direct form (... and beta) available for
cross-checking. A counterexample or satisfying model decodes into a witness
the investigator can inspect and replay; the puncture guarantees a witness
never equals the factual keyframe inputs. An unsatisfiable family (a
punctured singleton) yields the distinct empty-family verdict instead of a
vacuous answer, and solver timeouts yield unknown.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .errors import SolverTimeout
from .formula import (
    Behavior,
    ParsedQuery,
    PuncturedRelaxation,
    Relaxation,
    eval_formula,
    validate_factual_scenario,
)
from .lang.ast import Program, StepBudget
from .lang.interp import interpret
from .model import EnumDomain, Trace, restrict
from .smtlib import enum_domain_assertion
from .solver import DecodePlan, SolverRunner, SolverFeasibility, WitnessModel
from .sym import SExpr, SImplies, s_and
from .symexec import (
    DecisionLogic,
    behavior_to_sym,
    puncture_negation_to_sym,
    relaxation_to_sym,
    sym_execute,
)

TRUE_VERDICT = "true"
FALSE_VERDICT = "false"
UNKNOWN = "unknown"
EMPTY_FAMILY = "empty_family"


@dataclass(frozen=True)
class FactualQuery:
    scenario: Relaxation  # tight: all equality atoms
    behavior: Behavior
    keyframe: int
    budget: StepBudget = StepBudget()


@dataclass(frozen=True)
class CounterfactualQuery:
    mode: str  # "might" | "would"
    scenario: PuncturedRelaxation
    behavior: Behavior
    keyframe: int
    budget: StepBudget = StepBudget()


Query = Union[FactualQuery, CounterfactualQuery]


def make_query(parsed: ParsedQuery, trace: Trace) -> Query:
    """Build a validated query from a parsed document."""
    budget = StepBudget(parsed.budget_steps) if parsed.budget_steps else StepBudget()
    if parsed.mode == "factual":
        validate_factual_scenario(parsed.relaxation, trace, parsed.keyframe)
        return FactualQuery(
            scenario=parsed.relaxation,
            behavior=parsed.behavior,
            keyframe=parsed.keyframe,
            budget=budget,
        )
    assert parsed.punctured is not None
    return CounterfactualQuery(
        mode=parsed.mode,
        scenario=parsed.punctured,
        behavior=parsed.behavior,
        keyframe=parsed.keyframe,
        budget=budget,
    )


@dataclass
class PathSummary:
    path_id: int
    steps: int
    feasible: str


@dataclass
class Timings:
    symbolic: float = 0.0
    solving: float = 0.0
    total: float = 0.0

    def to_json(self) -> dict[str, float]:
        return {
            "symbolic": round(self.symbolic, 6),
            "solving": round(self.solving, 6),
            "total": round(self.total, 6),
        }


@dataclass
class OracleResponse:
    verdict: str
    witness: Optional[WitnessModel] = None
    ct: int = 0
    paths: list[PathSummary] = field(default_factory=list)
    timings: Timings = field(default_factory=Timings)

    def to_json(self) -> dict[str, Any]:
        from .model import value_to_json

        doc: dict[str, Any] = {
            "verdict": self.verdict,
            "ct": self.ct,
            "paths": [
                {"id": p.path_id, "steps": p.steps, "feasible": p.feasible}
                for p in self.paths
            ],
            "timings": self.timings.to_json(),
        }
        if self.witness is not None:
            catalog = self.witness.inputs.catalog
            doc["witness"] = {
                "inputs": {
                    n: value_to_json(catalog.decl(n).domain, v)
                    for n, v in self.witness.inputs.values.items()
                },
                "outputs": {
                    n: value_to_json(catalog.decl(n).domain, v)
                    for n, v in self.witness.outputs.items()
                },
            }
        return doc


class Oracle:
    """Resolves queries against one program through one solver runner."""

    def __init__(
        self,
        program: Program,
        runner: SolverRunner,
        symexec_mode: str = "eager",
    ):
        self.program = program
        self.runner = runner
        self.checker = SolverFeasibility(runner)
        self.symexec_mode = symexec_mode

    # --- public operations

    def resolve(self, query: Query, might_form: str = "guarded") -> OracleResponse:
        if isinstance(query, FactualQuery):
            return self.resolve_factual(query)
        if query.mode == "would":
            return self.resolve_would(query)
        return self.resolve_might(query, form=might_form)

    def resolve_factual(self, query: FactualQuery) -> OracleResponse:
        t_start = time.perf_counter()
        logic, t_sym = self._decision_logic(query.scenario, query)
        premises, plan = self._premises(logic)
        beta = behavior_to_sym(query.behavior, logic.output_vars)
        t_solve0 = time.perf_counter()
        try:
            status, counterexample = self.runner.check_valid(
                logic.all_symbols(), premises, negated_goal=self._negated(beta),
                decode=plan,
            )
        except SolverTimeout:
            return self._response(UNKNOWN, None, logic, t_sym,
                                  time.perf_counter() - t_solve0, t_start)
        t_solve = time.perf_counter() - t_solve0
        if status == "valid":
            return self._response(TRUE_VERDICT, None, logic, t_sym, t_solve, t_start)
        if status == "invalid":
            return self._response(FALSE_VERDICT, counterexample, logic,
                                  t_sym, t_solve, t_start)
        return self._response(UNKNOWN, None, logic, t_sym, t_solve, t_start)

    def resolve_would(self, query: CounterfactualQuery) -> OracleResponse:
        t_start = time.perf_counter()
        family_status, t_family = self._family_satisfiable(query.scenario)
        if family_status == "unsat":
            return OracleResponse(
                EMPTY_FAMILY,
                timings=Timings(0.0, t_family, time.perf_counter() - t_start),
            )
        logic, t_sym = self._decision_logic(query.scenario.base, query)
        premises, plan = self._premises(logic)
        premises.insert(
            1, puncture_negation_to_sym(query.scenario, logic.input_vars)
        )
        beta = behavior_to_sym(query.behavior, logic.output_vars)
        t_solve0 = time.perf_counter()
        try:
            status, counterexample = self.runner.check_valid(
                logic.all_symbols(), premises, negated_goal=self._negated(beta),
                decode=plan,
            )
        except SolverTimeout:
            return self._response(UNKNOWN, None, logic, t_sym,
                                  t_family + time.perf_counter() - t_solve0, t_start)
        t_solve = t_family + time.perf_counter() - t_solve0
        if status == "valid":
            return self._response(TRUE_VERDICT, None, logic, t_sym, t_solve, t_start)
        if status == "invalid":
            return self._response(FALSE_VERDICT, counterexample, logic,
                                  t_sym, t_solve, t_start)
        return self._response(UNKNOWN, None, logic, t_sym, t_solve, t_start)

    def resolve_might(
        self, query: CounterfactualQuery, form: str = "guarded"
    ) -> OracleResponse:
        if form not in ("guarded", "direct"):
            raise ValueError(f"unknown might form {form!r}")
        t_start = time.perf_counter()
        family_status, t_family = self._family_satisfiable(query.scenario)
        if family_status == "unsat":
            return OracleResponse(
                EMPTY_FAMILY,
                timings=Timings(0.0, t_family, time.perf_counter() - t_start),
            )
        logic, t_sym = self._decision_logic(query.scenario.base, query)
        premises, plan = self._premises(logic)
        premises.insert(
            1, puncture_negation_to_sym(query.scenario, logic.input_vars)
        )
        beta = behavior_to_sym(query.behavior, logic.output_vars)
        antecedent = s_and(*premises)
        if form == "guarded":
            phi = s_and(antecedent, SImplies(antecedent, beta))
        else:
            phi = s_and(antecedent, beta)
        t_solve0 = time.perf_counter()
        try:
            status, witness = self.runner.check_sat(
                logic.all_symbols(), [phi], decode=plan
            )
        except SolverTimeout:
            return self._response(UNKNOWN, None, logic, t_sym,
                                  t_family + time.perf_counter() - t_solve0, t_start)
        t_solve = t_family + time.perf_counter() - t_solve0
        if status == "sat":
            return self._response(TRUE_VERDICT, witness, logic, t_sym, t_solve, t_start)
        if status == "unsat":
            return self._response(FALSE_VERDICT, None, logic, t_sym, t_solve, t_start)
        return self._response(UNKNOWN, None, logic, t_sym, t_solve, t_start)

    def might_encodings(self, query: CounterfactualQuery) -> dict[str, Any]:
        """Both encodings of an existential query plus their decision logic.

        The guarded form conjoins the antecedent with the implication into
        the behavior; the direct form conjoins the behavior itself. They are
        equisatisfiable with identical model sets.
        """
        logic, _ = self._decision_logic(query.scenario.base, query)
        premises, plan = self._premises(logic)
        premises.insert(
            1, puncture_negation_to_sym(query.scenario, logic.input_vars)
        )
        beta = behavior_to_sym(query.behavior, logic.output_vars)
        antecedent = s_and(*premises)
        return {
            "guarded": s_and(antecedent, SImplies(antecedent, beta)),
            "direct": s_and(antecedent, beta),
            "logic": logic,
            "plan": plan,
        }

    def witness_replay(
        self, witness: WitnessModel, behavior: Behavior,
        budget: StepBudget = StepBudget(),
    ) -> bool:
        """Interpret the program on the witness inputs and evaluate the
        behavior at the terminal decision state; certifies every witness."""
        final, _ = interpret(self.program, witness.inputs, budget)
        return eval_formula(behavior, restrict(final, "decision"))

    # --- shared plumbing

    def _decision_logic(
        self, base: Relaxation, query: Query
    ) -> tuple[DecisionLogic, float]:
        t0 = time.perf_counter()
        logic = sym_execute(
            self.program,
            base,
            query.budget,
            self.checker,
            behavior_vars=query.behavior.variables or None,
            mode=self.symexec_mode,
        )
        return logic, time.perf_counter() - t0

    def _premises(self, logic: DecisionLogic) -> tuple[list[SExpr], DecodePlan]:
        premises: list[SExpr] = [logic.precondition]
        catalog = self.program.catalog
        for name, sv in list(logic.input_vars.items()) + list(logic.output_vars.items()):
            domain = catalog.decl(name).domain
            if isinstance(domain, EnumDomain):
                fact = enum_domain_assertion(sv, len(domain.members))
                if fact is not None:
                    premises.append(fact)
        premises.append(logic.formula())
        plan = DecodePlan(
            catalog=catalog,
            input_symbols={n: sv.name for n, sv in logic.input_vars.items()},
            output_symbols={n: sv.name for n, sv in logic.output_vars.items()},
        )
        return premises, plan

    def _family_satisfiable(
        self, scenario: PuncturedRelaxation
    ) -> tuple[str, float]:
        from .symexec import input_symvars

        t0 = time.perf_counter()
        in_vars = input_symvars(scenario.catalog)
        parts: list[SExpr] = [relaxation_to_sym(scenario.base, in_vars)]
        catalog = scenario.catalog
        for name, sv in in_vars.items():
            domain = catalog.decl(name).domain
            if isinstance(domain, EnumDomain):
                fact = enum_domain_assertion(sv, len(domain.members))
                if fact is not None:
                    parts.append(fact)
        parts.append(puncture_negation_to_sym(scenario, in_vars))
        status, _ = self.runner.check_sat(tuple(in_vars.values()), parts)
        return status, time.perf_counter() - t0

    @staticmethod
    def _negated(beta: SExpr) -> SExpr:
        from .sym import s_not

        return s_not(beta)

    def _response(
        self,
        verdict: str,
        witness: Optional[WitnessModel],
        logic: DecisionLogic,
        t_sym: float,
        t_solve: float,
        t_start: float,
    ) -> OracleResponse:
        return OracleResponse(
            verdict=verdict,
            witness=witness,
            ct=logic.ct,
            paths=[
                PathSummary(p.path_id, p.steps, p.feasible) for p in logic.paths
            ],
            timings=Timings(
                symbolic=t_sym,
                solving=t_solve,
                total=time.perf_counter() - t_start,
            ),
        )
