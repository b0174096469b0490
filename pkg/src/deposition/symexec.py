"""Symbolic execution of decision programs under scenario preconditions.

Produces the decision logic: one path constraint per feasible branch leaf,
each conjoined with equalities binding a fresh output symbol per behavior
variable to its terminal symbolic expression. The initial path constraint
is the compiled scenario precondition, so every path constraint implies it;
paths are pairwise mutually exclusive by construction (they diverge on a
branch condition and its negation).

Branch feasibility is checked eagerly per fork through a pluggable checker
(an SMT solver process behind a cache); a deferred mode forks unconditionally
and prunes unsatisfiable leaves at the end, useful for isolating solver
behavior in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

from .errors import (
    ArithmeticFault,
    BudgetExhausted,
    SolverUnavailable,
    UnknownVariable,
)
from .formula import (
    AtomicConstraint,
    Behavior,
    Eq,
    Free,
    Member,
    PuncturedRelaxation,
    Range,
    Relaxation,
)
from .lang.ast import (
    Assign,
    Binary,
    Body,
    CastFloat,
    Expr,
    If,
    Lit,
    LocalDecl,
    Name,
    Program,
    Return,
    StepBudget,
    Unary,
    While,
)
from .model import (
    ConcreteState,
    EnumDomain,
    FloatDomain,
    IntDomain,
    VarCatalog,
)
from .sym import (
    BOOL,
    FALSE,
    SArith,
    SCastFloat,
    SCmp,
    SConst,
    SEq,
    SExpr,
    SNeg,
    SValEq,
    SVar,
    SymVar,
    TRUE,
    bits_eq,
    const_of_value,
    free_vars,
    s_and,
    s_eq_values,
    s_not,
    s_or,
    sort_of_domain,
)

OUTPUT_PREFIX = ".out."


class FeasibilityChecker(Protocol):
    """Satisfiability of a formula over the given symbols."""

    def feasible(self, formula: SExpr, symbols: tuple[SymVar, ...]) -> str:
        """Returns "sat", "unsat", or "unknown"."""
        ...


# --- symbolic state ------------------------------------------------------------------

@dataclass
class SymState:
    bindings: dict[str, SExpr]
    path: list[SExpr]
    step: int = 0
    derived: dict[SymVar, SExpr] = field(default_factory=dict)

    def fork(self) -> "SymState":
        return SymState(
            bindings=dict(self.bindings),
            path=list(self.path),
            step=self.step,
            derived=dict(self.derived),
        )


def ref_closure(state: SymState, var: str) -> set[SymVar]:
    """Transitive set of symbols the variable's expression depends on."""
    if var not in state.bindings:
        raise UnknownVariable(f"variable {var!r} not bound in this state")
    seen: set[SymVar] = set()
    frontier = list(free_vars(state.bindings[var]))
    while frontier:
        sv = frontier.pop()
        if sv in seen:
            continue
        seen.add(sv)
        definition = state.derived.get(sv)
        if definition is not None:
            frontier.extend(free_vars(definition))
    return seen


@dataclass
class PathResult:
    path_id: int
    constraint: SExpr
    behavior_bindings: dict[str, SExpr]  # decision var -> binding equality
    steps: int
    feasible: str = "sat"  # "sat" | "unknown" (unsat leaves are pruned)

    def formula(self) -> SExpr:
        return s_and(self.constraint, *self.behavior_bindings.values())


@dataclass
class DecisionLogic:
    """Disjunction of path constraints with behavior-variable bindings."""

    paths: list[PathResult]
    input_vars: dict[str, SymVar]
    output_vars: dict[str, SymVar]
    precondition: SExpr
    pruned: list[PathResult] = field(default_factory=list)

    @property
    def ct(self) -> int:
        return len(self.paths)

    def formula(self) -> SExpr:
        return s_or(*(p.formula() for p in self.paths))

    def all_symbols(self) -> tuple[SymVar, ...]:
        return tuple(self.input_vars.values()) + tuple(self.output_vars.values())


# --- compiling the DSL AST to the IR ----------------------------------------------


def compile_expr(e: Expr, bindings: dict[str, SExpr]) -> SExpr:
    out = _compile(e, bindings)
    return _fold(out)


def _compile(e: Expr, bindings: dict[str, SExpr]) -> SExpr:
    if isinstance(e, Lit):
        return const_of_value(e.domain, e.value)
    if isinstance(e, Name):
        if e.resolved == "member":
            return const_of_value(e.domain, e.ident)
        return bindings[e.ident]
    if isinstance(e, Unary):
        inner = _compile(e.operand, bindings)
        if e.op == "!":
            return s_not(inner)
        return SNeg(inner, sort=inner.sort)
    if isinstance(e, CastFloat):
        inner = _compile(e.operand, bindings)
        assert isinstance(e.operand.domain, IntDomain)
        return SCastFloat(inner, signed=e.operand.domain.signed)
    assert isinstance(e, Binary)
    if e.op == "&&":
        return s_and(_compile(e.lhs, bindings), _compile(e.rhs, bindings))
    if e.op == "||":
        return s_or(_compile(e.lhs, bindings), _compile(e.rhs, bindings))
    lhs = _compile(e.lhs, bindings)
    rhs = _compile(e.rhs, bindings)
    side = e.lhs.domain
    if e.op == "==":
        return s_eq_values(side, lhs, rhs)
    if e.op == "!=":
        return s_not(s_eq_values(side, lhs, rhs))
    if e.op in ("<", "<=", ">", ">="):
        return SCmp(e.op, lhs, rhs)
    return SArith(e.op, lhs, rhs, sort=lhs.sort)


def _fold(expr: SExpr) -> SExpr:
    """Constant-fold the pure fragment so concrete branches do not fork."""
    from .boxsat.core import eval_concrete  # shared exact evaluator

    if not free_vars(expr):
        value = eval_concrete(expr, {})
        sort = expr.sort
        if sort == BOOL:
            return TRUE if value else FALSE
        return SConst(sort, value)
    return expr


# --- compiling scenario formulas -----------------------------------------------------


def input_symvars(catalog: VarCatalog) -> dict[str, SymVar]:
    return {
        name: SymVar(name, sort_of_domain(catalog.decl(name).domain))
        for name in catalog.input_names
    }


def output_symvars(catalog: VarCatalog, behavior_vars: tuple[str, ...]) -> dict[str, SymVar]:
    return {
        name: SymVar(OUTPUT_PREFIX + name, sort_of_domain(catalog.decl(name).domain))
        for name in behavior_vars
    }


def atom_to_sym(
    catalog: VarCatalog, atom: AtomicConstraint, sv: SymVar
) -> SExpr:
    domain = catalog.decl(atom.var).domain
    pred = atom.predicate
    if isinstance(pred, Free):
        return TRUE
    if isinstance(pred, Eq):
        if isinstance(domain, FloatDomain):
            return bits_eq(sv, pred.value)
        return SEq(SVar(sv), const_of_value(domain, pred.value))
    if isinstance(pred, Member):
        return s_or(*(
            atom_to_sym(catalog, AtomicConstraint(atom.var, Eq(v)), sv)
            for v in pred.values
        ))
    assert isinstance(pred, Range)
    lo_op = ">=" if pred.lo_inclusive else ">"
    hi_op = "<=" if pred.hi_inclusive else "<"
    return s_and(
        SCmp(lo_op, SVar(sv), const_of_value(domain, pred.lo)),
        SCmp(hi_op, SVar(sv), const_of_value(domain, pred.hi)),
    )


def relaxation_to_sym(
    relaxation: Relaxation, symvars: dict[str, SymVar]
) -> SExpr:
    cat = relaxation.catalog
    return s_and(*(
        atom_to_sym(cat, atom, symvars[name])
        for name, atom in relaxation.atoms.items()
    ))


def puncture_negation_to_sym(
    punctured: PuncturedRelaxation, symvars: dict[str, SymVar]
) -> SExpr:
    """not F: at least one input differs bit-exactly from the factual."""
    cat = punctured.catalog
    equalities = [
        atom_to_sym(
            cat,
            AtomicConstraint(name, Eq(punctured.puncture_state[name])),
            symvars[name],
        )
        for name in cat.input_names
    ]
    return s_not(s_and(*equalities))


def behavior_to_sym(behavior: Behavior, out_vars: dict[str, SymVar]) -> SExpr:
    bindings = {name: SVar(sv) for name, sv in out_vars.items()}
    return compile_expr(behavior.expr, bindings)


# --- the engine -------------------------------------------------------------------------


@dataclass
class _Loop:
    cond: Expr
    body: Body
    remaining: int


class SymbolicEngine:
    """Depth-first, then-branch-first exploration; deterministic across runs."""

    def __init__(
        self,
        checker: Optional[FeasibilityChecker],
        mode: str = "eager",
    ):
        if mode not in ("eager", "deferred"):
            raise ValueError(f"unknown mode {mode!r}")
        self.checker = checker
        self.mode = mode

    def execute(
        self,
        program: Program,
        precondition: Relaxation,
        budget: StepBudget = StepBudget(),
        behavior_vars: Optional[tuple[str, ...]] = None,
    ) -> DecisionLogic:
        if self.checker is None:
            raise SolverUnavailable(
                "symbolic execution needs a feasibility checker"
            )
        catalog = program.catalog
        if behavior_vars is None:
            behavior_vars = catalog.decision_names
        else:
            behavior_vars = tuple(
                n for n in catalog.decision_names if n in set(behavior_vars)
            )
        in_vars = input_symvars(catalog)
        out_vars = output_symvars(catalog, behavior_vars)

        bindings: dict[str, SExpr] = {n: SVar(sv) for n, sv in in_vars.items()}
        for name, value in program.decision_inits.items():
            bindings[name] = const_of_value(catalog.decl(name).domain, value)
        pre = relaxation_to_sym(precondition, in_vars)
        root = SymState(bindings=bindings, path=[pre] if pre != TRUE else [])

        self._program = program
        self._budget = budget
        self._symbols = tuple(in_vars.values())
        self._terminals: list[SymState] = []
        self._run(root, tuple(program.body))

        paths: list[PathResult] = []
        pruned: list[PathResult] = []
        for state in self._terminals:
            constraint = s_and(*state.path)
            feasible = "sat"
            if self.mode == "deferred":
                verdict = self.checker.feasible(constraint, self._symbols)
                if verdict == "unsat":
                    feasible = "unsat"
                elif verdict == "unknown":
                    feasible = "unknown"
            behavior_bindings: dict[str, SExpr] = {}
            for name in behavior_vars:
                sv = out_vars[name]
                terminal = state.bindings[name]
                state.derived[sv] = terminal
                if isinstance(catalog.decl(name).domain, FloatDomain):
                    behavior_bindings[name] = SValEq(SVar(sv), terminal)
                else:
                    behavior_bindings[name] = SEq(SVar(sv), terminal)
            result = PathResult(
                path_id=len(paths) if feasible != "unsat" else -1,
                constraint=constraint,
                behavior_bindings=behavior_bindings,
                steps=state.step,
                feasible=feasible,
            )
            if feasible == "unsat":
                pruned.append(result)
            else:
                paths.append(result)
        return DecisionLogic(
            paths=paths,
            input_vars=in_vars,
            output_vars=out_vars,
            precondition=pre,
            pruned=pruned,
        )

    # --- statement execution

    def _run(self, state: SymState, work: tuple) -> None:
        while work:
            item, work = work[0], work[1:]
            if isinstance(item, Assign):
                self._tick(state)
                self._check_divisions(state, item.expr)
                state.bindings[item.target] = compile_expr(item.expr, state.bindings)
            elif isinstance(item, LocalDecl):
                self._tick(state)
                self._check_divisions(state, item.init)
                state.bindings[item.name] = compile_expr(item.init, state.bindings)
            elif isinstance(item, Return):
                self._tick(state)
                self._terminals.append(state)
                return
            elif isinstance(item, If):
                self._tick(state)
                self._check_divisions(state, item.cond)
                cond = compile_expr(item.cond, state.bindings)
                self._branch(
                    state, cond,
                    tuple(item.then) + work,
                    tuple(item.orelse) + work,
                )
                return
            elif isinstance(item, While):
                work = (_Loop(item.cond, item.body, item.bound),) + work
            elif isinstance(item, _Loop):
                if item.remaining <= 0:
                    continue
                self._tick(state)
                self._check_divisions(state, item.cond)
                cond = compile_expr(item.cond, state.bindings)
                continue_work = (
                    tuple(item.body)
                    + (_Loop(item.cond, item.body, item.remaining - 1),)
                    + work
                )
                self._branch(state, cond, continue_work, work)
                return
            else:  # pragma: no cover
                raise AssertionError(f"unknown work item {item!r}")
        self._terminals.append(state)

    def _branch(self, state: SymState, cond: SExpr,
                then_work: tuple, else_work: tuple) -> None:
        if cond == TRUE:
            self._run(state, then_work)
            return
        if cond == FALSE:
            self._run(state, else_work)
            return
        take_then = take_else = True
        if self.mode == "eager":
            pi = s_and(*state.path)
            then_verdict = self.checker.feasible(s_and(pi, cond), self._symbols)
            if then_verdict == "unsat":
                take_then = False
            else:
                else_verdict = self.checker.feasible(
                    s_and(pi, s_not(cond)), self._symbols
                )
                if else_verdict == "unsat":
                    take_else = False
        if take_then and take_else:
            other = state.fork()
            state.path.append(cond)
            self._run(state, then_work)
            other.path.append(s_not(cond))
            self._run(other, else_work)
        elif take_then:
            state.path.append(cond)
            self._run(state, then_work)
        else:
            state.path.append(s_not(cond))
            self._run(state, else_work)

    def _tick(self, state: SymState) -> None:
        state.step += 1
        if state.step > self._budget.max_steps:
            raise BudgetExhausted(
                f"a path exceeded the step budget of {self._budget.max_steps}",
                path_id=len(self._terminals),
            )

    # --- integer division safety

    def _check_divisions(self, state: SymState, expr: Expr) -> None:
        """Fault if a feasible integer division by zero exists on this path.

        Guards inside the same expression (short-circuit forms) are not
        modeled; guard integer divisions with a branch instead.
        """
        for node in _walk_lang(expr):
            if (
                isinstance(node, Binary)
                and node.op == "/"
                and isinstance(node.domain, IntDomain)
            ):
                divisor = compile_expr(node.rhs, state.bindings)
                if isinstance(divisor, SConst):
                    if divisor.value == 0:
                        raise ArithmeticFault(
                            f"integer division by zero at {node.pos}"
                        )
                    continue
                zero = SEq(divisor, SConst(divisor.sort, 0))
                verdict = self.checker.feasible(
                    s_and(s_and(*state.path), zero), self._symbols
                )
                if verdict != "unsat":
                    raise ArithmeticFault(
                        f"possible integer division by zero at {node.pos}"
                    )


def _walk_lang(e: Expr):
    yield e
    if isinstance(e, Unary):
        yield from _walk_lang(e.operand)
    elif isinstance(e, Binary):
        yield from _walk_lang(e.lhs)
        yield from _walk_lang(e.rhs)
    elif isinstance(e, CastFloat):
        yield from _walk_lang(e.operand)


def sym_execute(
    program: Program,
    precondition: Relaxation,
    budget: StepBudget,
    checker: FeasibilityChecker,
    behavior_vars: Optional[tuple[str, ...]] = None,
    mode: str = "eager",
) -> DecisionLogic:
    engine = SymbolicEngine(checker, mode=mode)
    return engine.execute(program, precondition, budget, behavior_vars)


def feasibility(
    formula: SExpr,
    symbols: tuple[SymVar, ...],
    checker: FeasibilityChecker,
) -> str:
    """Satisfiability of a path constraint: "sat", "unsat", or "unknown"."""
    return checker.feasible(formula, symbols)


def concrete_env(
    catalog: VarCatalog,
    state: ConcreteState,
    symvars: dict[str, SymVar],
) -> dict[SymVar, object]:
    """Map a concrete input state onto solver-level values for evaluation
    (bools, unsigned bitvector patterns, floats)."""
    env: dict[SymVar, object] = {}
    for name, sv in symvars.items():
        domain = catalog.decl(name).domain
        value = state[name]
        if isinstance(domain, IntDomain):
            env[sv] = domain.to_unsigned(value)
        elif isinstance(domain, EnumDomain):
            env[sv] = domain.code(value)
        else:
            env[sv] = value
    return env
