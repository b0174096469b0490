"""Symbolic expression IR over the quantifier-free float + bitvector sorts.

This is the shared language between symbolic execution, query compilation,
and SMT-LIB emission. Sorts mirror the variable domains: booleans, width-W
bitvectors (signedness kept as metadata for operator selection), and IEEE
binary64 floats. Float-valued variables are backed by 64-bit bitvector
symbols reinterpreted with to_fp at every numeric use, which is what makes
bit-exact equality (distinct NaN payloads, -0.0 != +0.0) expressible while
arithmetic stays in the floating-point theory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator, Union

from .fp import float_to_bits
from .model import (
    BoolDomain,
    Domain,
    EnumDomain,
    FloatDomain,
    IntDomain,
)


# --- sorts -----------------------------------------------------------------------

@dataclass(frozen=True)
class BoolSort:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class BVSort:
    width: int
    signed: bool = False

    def __str__(self) -> str:
        return f"BitVec({self.width}{',s' if self.signed else ''})"


@dataclass(frozen=True)
class F64Sort:
    def __str__(self) -> str:
        return "Float64"


Sort = Union[BoolSort, BVSort, F64Sort]

BOOL = BoolSort()
F64 = F64Sort()


def sort_of_domain(domain: Domain) -> Sort:
    if isinstance(domain, BoolDomain):
        return BOOL
    if isinstance(domain, IntDomain):
        return BVSort(domain.width, domain.signed)
    if isinstance(domain, FloatDomain):
        return F64
    assert isinstance(domain, EnumDomain)
    return BVSort(domain.code_width, signed=False)


def const_of_value(domain: Domain, value: Any) -> "SConst":
    """Encode a concrete domain value as an IR constant.

    Bitvector constants store the unsigned pattern; enums store their code.
    """
    if isinstance(domain, BoolDomain):
        return SConst(BOOL, bool(value))
    if isinstance(domain, IntDomain):
        return SConst(BVSort(domain.width, domain.signed), domain.to_unsigned(value))
    if isinstance(domain, FloatDomain):
        return SConst(F64, float(value))
    assert isinstance(domain, EnumDomain)
    return SConst(BVSort(domain.code_width, False), domain.code(value))


# --- expressions --------------------------------------------------------------------

@dataclass(frozen=True)
class SymVar:
    name: str
    sort: Sort


@dataclass(frozen=True)
class SConst:
    sort: Sort
    value: Any  # bool | unsigned int pattern | float


@dataclass(frozen=True)
class SVar:
    var: SymVar

    @property
    def sort(self) -> Sort:
        return self.var.sort


@dataclass(frozen=True)
class SNot:
    operand: "SExpr"
    sort: Sort = BOOL


@dataclass(frozen=True)
class SAnd:
    operands: tuple["SExpr", ...]
    sort: Sort = BOOL


@dataclass(frozen=True)
class SOr:
    operands: tuple["SExpr", ...]
    sort: Sort = BOOL


@dataclass(frozen=True)
class SImplies:
    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = BOOL


@dataclass(frozen=True)
class SEq:
    """Theory equality on Bool or BitVec operands (never F64; see SFpEq)."""

    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = BOOL


@dataclass(frozen=True)
class SFpEq:
    """IEEE float equality: NaN compares unequal, -0.0 equals +0.0."""

    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = BOOL


@dataclass(frozen=True)
class SBitsEq:
    """Bit-pattern equality between a float variable and a constant."""

    var: SymVar
    bits: int
    sort: Sort = BOOL


@dataclass(frozen=True)
class SValEq:
    """Value identity on F64 terms: SMT `=` on the floating-point sort.

    Used for output bindings; distinguishes zero signs, treats NaN as one
    value.
    """

    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = BOOL


@dataclass(frozen=True)
class SCmp:
    op: str  # "<" | "<=" | ">" | ">="
    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = BOOL
    # None: take signedness from the operand sorts (emitter side);
    # explicit flag when reading solver input, where sorts carry no sign
    signed: bool | None = None


@dataclass(frozen=True)
class SArith:
    op: str  # "+" | "-" | "*" | "/"
    lhs: "SExpr"
    rhs: "SExpr"
    sort: Sort = None  # type: ignore[assignment]
    signed: bool | None = None


@dataclass(frozen=True)
class SNeg:
    operand: "SExpr"
    sort: Sort = None  # type: ignore[assignment]


@dataclass(frozen=True)
class SCastFloat:
    operand: "SExpr"  # bitvector-sorted
    signed: bool
    sort: Sort = F64


SExpr = Union[
    SConst, SVar, SNot, SAnd, SOr, SImplies, SEq, SFpEq, SBitsEq, SValEq,
    SCmp, SArith, SNeg, SCastFloat,
]

TRUE = SConst(BOOL, True)
FALSE = SConst(BOOL, False)


def s_and(*operands: SExpr) -> SExpr:
    flat: list[SExpr] = []
    for op in operands:
        if op == TRUE:
            continue
        if isinstance(op, SAnd):
            flat.extend(op.operands)
        else:
            flat.append(op)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return SAnd(tuple(flat))


def s_or(*operands: SExpr) -> SExpr:
    flat: list[SExpr] = []
    for op in operands:
        if op == FALSE:
            continue
        if isinstance(op, SOr):
            flat.extend(op.operands)
        else:
            flat.append(op)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return SOr(tuple(flat))


def s_not(operand: SExpr) -> SExpr:
    if operand == TRUE:
        return FALSE
    if operand == FALSE:
        return TRUE
    if isinstance(operand, SNot):
        return operand.operand
    return SNot(operand)


def s_eq_values(domain: Domain, lhs: SExpr, rhs: SExpr) -> SExpr:
    """Equality with the DSL's == semantics for the given domain."""
    if isinstance(domain, FloatDomain):
        return SFpEq(lhs, rhs)
    return SEq(lhs, rhs)


def bits_eq(var: SymVar, value: float) -> SBitsEq:
    return SBitsEq(var, float_to_bits(value))


def children(expr: SExpr) -> Iterator[SExpr]:
    if isinstance(expr, (SConst, SVar, SBitsEq)):
        return iter(())
    if isinstance(expr, (SNot, SNeg, SCastFloat)):
        return iter((expr.operand,))
    if isinstance(expr, (SAnd, SOr)):
        return iter(expr.operands)
    return iter((expr.lhs, expr.rhs))


def free_vars(expr: SExpr) -> set[SymVar]:
    out: set[SymVar] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, SVar):
            out.add(node.var)
        elif isinstance(node, SBitsEq):
            out.add(node.var)
        else:
            stack.extend(children(node))
    return out


def is_concrete(expr: SExpr) -> bool:
    return not free_vars(expr)
