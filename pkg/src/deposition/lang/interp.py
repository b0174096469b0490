"""Concrete interpreter for decision programs.

One call covers one window of agency: it reads the inputs, runs the body
under a step budget, and reports the terminal state over all variables.
Inputs are never written, so the final state restricted to env+state equals
the input state by construction. Float arithmetic is IEEE-754 binary64 with
round-to-nearest-even; integers wrap two's-complement at their declared
width; integer division truncates toward zero and faults on a zero divisor.
"""

from __future__ import annotations

from typing import Any

from ..errors import ArithmeticFault, BudgetExhausted, MissingVariable
from ..fp import f64_div
from ..model import ConcreteState, FloatDomain, IntDomain
from .ast import (
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


class _Halt(Exception):
    pass


def interpret(
    program: Program,
    inputs: ConcreteState,
    budget: StepBudget = StepBudget(),
) -> tuple[ConcreteState, int]:
    """Run the program on concrete inputs; returns (final state over V, steps)."""
    catalog = program.catalog
    env: dict[str, Any] = {}
    for name in catalog.input_names:
        if name not in inputs:
            raise MissingVariable(f"inputs do not cover {name!r}")
        env[name] = inputs[name]
    env.update(program.decision_inits)

    counter = _StepCounter(budget)
    try:
        _exec_block(program, env, program.body, counter)
    except _Halt:
        pass
    final = ConcreteState(
        catalog, {name: env[name] for name in catalog.names()}
    )
    return final, counter.steps


class _StepCounter:
    def __init__(self, budget: StepBudget):
        self.steps = 0
        self.max_steps = budget.max_steps

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise BudgetExhausted(
                f"execution exceeded the step budget of {self.max_steps}"
            )


def _exec_block(program: Program, env: dict[str, Any], stmts: Body,
                counter: _StepCounter) -> None:
    for s in stmts:
        if isinstance(s, Assign):
            counter.tick()
            env[s.target] = eval_expr(s.expr, env)
        elif isinstance(s, LocalDecl):
            counter.tick()
            env[s.name] = eval_expr(s.init, env)
        elif isinstance(s, If):
            counter.tick()
            branch = s.then if eval_expr(s.cond, env) else s.orelse
            _exec_block(program, env, branch, counter)
        elif isinstance(s, While):
            # the syntactic bound caps iterations even if the guard holds
            for _ in range(s.bound):
                counter.tick()
                if not eval_expr(s.cond, env):
                    break
                _exec_block(program, env, s.body, counter)
        elif isinstance(s, Return):
            counter.tick()
            raise _Halt()
        else:  # pragma: no cover
            raise AssertionError(f"unknown statement {s!r}")


def eval_expr(e: Expr, env: dict[str, Any]) -> Any:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Name):
        if e.resolved == "member":
            return e.ident
        return env[e.ident]
    if isinstance(e, Unary):
        v = eval_expr(e.operand, env)
        if e.op == "!":
            return not v
        if isinstance(e.domain, IntDomain):
            return e.domain.wrap(-v)
        return -v
    if isinstance(e, CastFloat):
        return float(eval_expr(e.operand, env))
    if isinstance(e, Binary):
        return _eval_binary(e, env)
    raise AssertionError(f"unknown expression {e!r}")  # pragma: no cover


def _eval_binary(e: Binary, env: dict[str, Any]) -> Any:
    op = e.op
    if op == "&&":
        return eval_expr(e.lhs, env) and eval_expr(e.rhs, env)
    if op == "||":
        return eval_expr(e.lhs, env) or eval_expr(e.rhs, env)
    a = eval_expr(e.lhs, env)
    b = eval_expr(e.rhs, env)
    side = e.lhs.domain
    if op == "==":
        return a == b  # IEEE equality on floats: NaN != NaN, -0.0 == 0.0
    if op == "!=":
        return a != b
    if op in ("<", "<=", ">", ">="):
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    # arithmetic
    if isinstance(side, FloatDomain):
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return f64_div(a, b)
    assert isinstance(side, IntDomain)
    if op == "+":
        return side.wrap(a + b)
    if op == "-":
        return side.wrap(a - b)
    if op == "*":
        return side.wrap(a * b)
    if b == 0:
        raise ArithmeticFault(f"integer division by zero at {e.pos}")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return side.wrap(q)


def eval_consts_free(e: Expr) -> Any:
    """Evaluate an expression with no variables (literals only)."""
    return eval_expr(e, {})
