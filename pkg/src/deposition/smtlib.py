"""Deterministic SMT-LIB v2 emission for the float + bitvector fragment.

Float variables are declared as 64-bit bitvectors and reinterpreted with
to_fp at every numeric use; float constants are emitted as bit patterns,
never decimals. Symbol order is the caller's (catalog order, then outputs),
and rendering is pure, so equal inputs produce byte-identical scripts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import UnsupportedOperation
from .fp import float_to_bits
from .sym import (
    BOOL,
    BVSort,
    F64,
    SAnd,
    SArith,
    SBitsEq,
    SCastFloat,
    SCmp,
    SConst,
    SEq,
    SExpr,
    SFpEq,
    SImplies,
    SNeg,
    SNot,
    SOr,
    SValEq,
    SVar,
    SymVar,
    Sort,
)

DEFAULT_LOGIC = "QF_FPBV"
FALLBACK_LOGIC = "ALL"

_FP_CMP = {"<": "fp.lt", "<=": "fp.leq", ">": "fp.gt", ">=": "fp.geq"}
_BV_CMP_S = {"<": "bvslt", "<=": "bvsle", ">": "bvsgt", ">=": "bvsge"}
_BV_CMP_U = {"<": "bvult", "<=": "bvule", ">": "bvugt", ">=": "bvuge"}
_FP_ARITH = {"+": "fp.add", "-": "fp.sub", "*": "fp.mul", "/": "fp.div"}
_BV_ARITH = {"+": "bvadd", "-": "bvsub", "*": "bvmul"}


def render_sort(sort: Sort) -> str:
    if sort == BOOL:
        return "Bool"
    if sort == F64:
        return "(_ BitVec 64)"
    assert isinstance(sort, BVSort)
    return f"(_ BitVec {sort.width})"


def _bv_const(value: int, width: int) -> str:
    if width % 4 == 0:
        return f"#x{value:0{width // 4}x}"
    return f"#b{value:0{width}b}"


def _float_term(bits: int) -> str:
    return f"((_ to_fp 11 53) #x{bits:016x})"


def render(expr: SExpr) -> str:
    if isinstance(expr, SConst):
        if expr.sort == BOOL:
            return "true" if expr.value else "false"
        if expr.sort == F64:
            return _float_term(float_to_bits(expr.value))
        return _bv_const(expr.value, expr.sort.width)
    if isinstance(expr, SVar):
        if expr.sort == F64:
            return f"((_ to_fp 11 53) {expr.var.name})"
        return expr.var.name
    if isinstance(expr, SNot):
        return f"(not {render(expr.operand)})"
    if isinstance(expr, SAnd):
        return "(and " + " ".join(render(op) for op in expr.operands) + ")"
    if isinstance(expr, SOr):
        return "(or " + " ".join(render(op) for op in expr.operands) + ")"
    if isinstance(expr, SImplies):
        return f"(=> {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SEq):
        if expr.lhs.sort == F64 or expr.rhs.sort == F64:
            raise UnsupportedOperation(
                "plain equality on floats; use SFpEq or SValEq"
            )
        return f"(= {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SFpEq):
        return f"(fp.eq {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SValEq):
        return f"(= {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SBitsEq):
        return f"(= {expr.var.name} #x{expr.bits:016x})"
    if isinstance(expr, SCmp):
        if expr.lhs.sort == F64:
            return f"({_FP_CMP[expr.op]} {render(expr.lhs)} {render(expr.rhs)})"
        signed = expr.signed
        if signed is None:
            sort = expr.lhs.sort
            signed = isinstance(sort, BVSort) and sort.signed
        table = _BV_CMP_S if signed else _BV_CMP_U
        return f"({table[expr.op]} {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SArith):
        if expr.sort == F64:
            op = _FP_ARITH[expr.op]
            return f"({op} RNE {render(expr.lhs)} {render(expr.rhs)})"
        if expr.op == "/":
            signed = expr.signed
            if signed is None:
                signed = expr.sort.signed
            op = "bvsdiv" if signed else "bvudiv"
        else:
            op = _BV_ARITH[expr.op]
        return f"({op} {render(expr.lhs)} {render(expr.rhs)})"
    if isinstance(expr, SNeg):
        if expr.sort == F64:
            return f"(fp.neg {render(expr.operand)})"
        return f"(bvneg {render(expr.operand)})"
    if isinstance(expr, SCastFloat):
        fn = "to_fp" if expr.signed else "to_fp_unsigned"
        return f"((_ {fn} 11 53) RNE {render(expr.operand)})"
    raise UnsupportedOperation(f"cannot emit {type(expr).__name__}")


@dataclass(frozen=True)
class SmtScript:
    """A complete solver script; rendering is byte-deterministic."""

    logic: str
    declarations: tuple[tuple[str, str], ...]  # (symbol, sort text)
    assertions: tuple[str, ...]
    get_values: tuple[str, ...] = ()

    def render(self) -> str:
        lines = [f"(set-logic {self.logic})"]
        for name, sort in self.declarations:
            lines.append(f"(declare-const {name} {sort})")
        for a in self.assertions:
            lines.append(f"(assert {a})")
        lines.append("(check-sat)")
        if self.get_values:
            lines.append("(get-value (" + " ".join(self.get_values) + "))")
        return "\n".join(lines) + "\n"


def emit_smt(
    symbols: Iterable[SymVar],
    assertions: Iterable[SExpr],
    get_values: Iterable[str] = (),
    logic: str = DEFAULT_LOGIC,
) -> SmtScript:
    """Compile assertions over the given symbols into a solver script.

    Every symbol is declared exactly once, in the given order; duplicate
    names are rejected.
    """
    decls: list[tuple[str, str]] = []
    seen: set[str] = set()
    for sv in symbols:
        if sv.name in seen:
            raise UnsupportedOperation(f"symbol {sv.name!r} declared twice")
        seen.add(sv.name)
        decls.append((sv.name, render_sort(sv.sort)))
    rendered = []
    for a in assertions:
        if a.sort != BOOL:
            raise UnsupportedOperation("assertions must be boolean")
        rendered.append(render(a))
    for name in get_values:
        if name not in seen:
            raise UnsupportedOperation(f"get-value of undeclared {name!r}")
    return SmtScript(
        logic=logic,
        declarations=tuple(decls),
        assertions=tuple(rendered),
        get_values=tuple(get_values),
    )


def enum_domain_assertion(sv: SymVar, member_count: int) -> SExpr | None:
    """code < member count, when the width leaves illegal codes."""
    assert isinstance(sv.sort, BVSort)
    if member_count >= (1 << sv.sort.width):
        return None
    return SCmp(
        "<", SVar(sv), SConst(BVSort(sv.sort.width, False), member_count),
        signed=False,
    )
