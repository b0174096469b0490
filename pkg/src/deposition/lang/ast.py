"""Typed AST for the decision-program language.

Expression nodes carry their domain after typechecking (``domain`` is None
straight out of the parser). Statement lists are flat; control flow is
if/else and bounded while only, so execution order equals textual order
within a block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

from ..model import Domain, VarCatalog


@dataclass
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# --- expressions ---------------------------------------------------------------

@dataclass
class Expr:
    pos: Pos
    domain: Optional[Domain] = field(default=None, init=False, compare=False)


@dataclass
class Lit(Expr):
    value: Any = None


@dataclass
class Name(Expr):
    # resolves to a variable, const, local, or enum member during typecheck
    ident: str = ""
    resolved: str = field(default="", compare=False)  # "var" | "const" | "local" | "member"


@dataclass
class Unary(Expr):
    op: str = ""  # "-" | "!"
    operand: Expr = None  # type: ignore[assignment]


@dataclass
class Binary(Expr):
    op: str = ""  # + - * / == != < <= > >= && ||
    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]


@dataclass
class CastFloat(Expr):
    operand: Expr = None  # type: ignore[assignment]


@dataclass
class Pow(Expr):
    # expanded into a left-folded product during typechecking
    base: Expr = None  # type: ignore[assignment]
    exponent: int = 0


COMPARISONS = {"==", "!=", "<", "<=", ">", ">="}
ARITH = {"+", "-", "*", "/"}
LOGIC = {"&&", "||"}


# --- statements ----------------------------------------------------------------

@dataclass
class Stmt:
    pos: Pos


@dataclass
class Assign(Stmt):
    target: str
    expr: Expr


@dataclass
class LocalDecl(Stmt):
    name: str
    domain: Domain
    init: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    orelse: list[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    bound: int
    body: list[Stmt]


@dataclass
class Return(Stmt):
    pass


Body = list[Stmt]


# --- program -------------------------------------------------------------------

@dataclass(frozen=True)
class StepBudget:
    """Cap on executed statements for one decision window."""

    max_steps: int = 10_000

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class Program:
    """A typechecked decision program.

    ``decision_inits`` holds the mandatory initial value of every decision
    variable so behaviors evaluate even on paths that never write one.
    ``consts`` are named literals, not variables; they never appear in the
    catalog, traces, or formulas.
    """

    catalog: VarCatalog
    body: Body
    decision_inits: dict[str, Any]
    consts: dict[str, tuple[Domain, Any]]
    locals: dict[str, Domain]
    source: str

    def leaf_count_hint(self) -> int:
        """Static branch-leaf count, ignoring feasibility (loop bodies once)."""

        def walk(stmts: tuple[Stmt, ...]) -> int:
            if not stmts:
                return 1
            head, rest = stmts[0], stmts[1:]
            if isinstance(head, Return):
                return 1
            if isinstance(head, If):
                return walk(tuple(head.then) + rest) + walk(tuple(head.orelse) + rest)
            if isinstance(head, While):
                return walk(tuple(head.body) + rest)
            return walk(rest)

        return walk(tuple(self.body))


StmtOrExpr = Union[Stmt, Expr]
