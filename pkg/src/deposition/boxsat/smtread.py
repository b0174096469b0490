"""SMT-LIB v2 reading: tokenizer, s-expressions, and translation to the IR.

Supports the fragment the package emits (quantifier-free float + bitvector
terms, floats carried as 64-bit patterns reinterpreted with to_fp) plus the
command surface a one-shot or incremental solver session needs. Anything
else earns an ``(error ...)`` reply rather than a wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

from ..fp import bits_to_float
from ..sym import (
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
)

Atom = str
SExp = Union[Atom, list]


class SmtReadError(Exception):
    pass


def tokenize(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            yield c
            i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SmtReadError("unterminated string literal")
            yield text[i:j + 1]
            i = j + 1
            continue
        if c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SmtReadError("unterminated quoted symbol")
            yield text[i:j + 1]
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();\"|":
            j += 1
        yield text[i:j]
        i = j


def parse_sexps(text: str) -> list[SExp]:
    stack: list[list] = []
    out: list[SExp] = []
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise SmtReadError("unbalanced ')'")
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                out.append(done)
        else:
            if stack:
                stack[-1].append(tok)
            else:
                out.append(tok)
    if stack:
        raise SmtReadError("unbalanced '('")
    return out


def split_complete(buffer: str) -> tuple[list[str], str]:
    """Split a stream buffer into complete top-level s-exprs plus a remainder."""
    complete: list[str] = []
    depth = 0
    start = 0
    i, n = 0, len(buffer)
    in_string = in_quote = False
    while i < n:
        c = buffer[i]
        if in_string:
            if c == '"':
                in_string = False
            i += 1
            continue
        if in_quote:
            if c == "|":
                in_quote = False
            i += 1
            continue
        if c == '"':
            in_string = True
        elif c == "|":
            in_quote = True
        elif c == ";":
            while i < n and buffer[i] != "\n":
                i += 1
            continue
        elif c == "(":
            if depth == 0:
                start = i
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                complete.append(buffer[start:i + 1])
                start = i + 1
        i += 1
    return complete, buffer[start:] if depth > 0 else ""


# --- sorts -------------------------------------------------------------------------

def parse_sort(s: SExp) -> tuple[str, int]:
    """Returns (kind, width): ("bool", 0), ("bv", w), or ("fp64", 64)."""
    if s == "Bool":
        return ("bool", 0)
    if isinstance(s, list) and len(s) == 3 and s[0] == "_" and s[1] == "BitVec":
        return ("bv", int(s[2]))
    if (isinstance(s, list) and len(s) == 4 and s[0] == "_"
            and s[1] == "FloatingPoint" and s[2] == "11" and s[3] == "53"):
        return ("fp64", 64)
    if s == "Float64":
        return ("fp64", 64)
    raise SmtReadError(f"unsupported sort {s!r}")


# --- terms --------------------------------------------------------------------------

_FP_SPECIALS = {
    "NaN": 0x7FF8000000000000,
    "+oo": 0x7FF0000000000000,
    "-oo": 0xFFF0000000000000,
    "+zero": 0x0000000000000000,
    "-zero": 0x8000000000000000,
}

_BV_CMP = {
    "bvult": ("<", False), "bvule": ("<=", False),
    "bvugt": (">", False), "bvuge": (">=", False),
    "bvslt": ("<", True), "bvsle": ("<=", True),
    "bvsgt": (">", True), "bvsge": (">=", True),
}

_FP_CMP = {"fp.lt": "<", "fp.leq": "<=", "fp.gt": ">", "fp.geq": ">="}

_BV_ARITH = {"bvadd": "+", "bvsub": "-", "bvmul": "*"}

_FP_ARITH = {"fp.add": "+", "fp.sub": "-", "fp.mul": "*", "fp.div": "/"}


@dataclass
class SymbolTable:
    """Declared symbols; float-view inference happens before translation."""

    declared: dict[str, tuple[str, int]] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    float_view: set[str] = field(default_factory=set)
    _vars: dict[str, SymVar] = field(default_factory=dict)

    def declare(self, name: str, sort: tuple[str, int]) -> None:
        if name in self.declared:
            raise SmtReadError(f"symbol {name!r} declared twice")
        self.declared[name] = sort
        self.order.append(name)
        if sort[0] == "fp64":
            self.float_view.add(name)

    def mark_float_view(self, name: str) -> None:
        kind, width = self.declared.get(name, (None, 0))
        if kind == "bv" and width == 64 or kind == "fp64":
            self.float_view.add(name)
        else:
            raise SmtReadError(
                f"to_fp reinterpret needs a 64-bit symbol, got {name!r}"
            )

    def symvar(self, name: str) -> SymVar:
        if name not in self._vars:
            kind, width = self.declared[name]
            if name in self.float_view:
                sort = F64
            elif kind == "bool":
                sort = BOOL
            else:
                sort = BVSort(width, signed=False)
            self._vars[name] = SymVar(name, sort)
        return self._vars[name]

    def symbols(self) -> list[SymVar]:
        return [self.symvar(n) for n in self.order]


def _unquote(name: str) -> str:
    if name.startswith("|") and name.endswith("|"):
        return name[1:-1]
    return name


def scan_float_views(term: SExp, table: SymbolTable) -> None:
    """Mark 64-bit symbols appearing under a to_fp reinterpretation."""
    if not isinstance(term, list):
        return
    if (len(term) == 2 and isinstance(term[0], list) and len(term[0]) == 4
            and term[0][0] == "_" and term[0][1] == "to_fp"):
        arg = term[1]
        if isinstance(arg, str):
            name = _unquote(arg)
            if name in table.declared:
                table.mark_float_view(name)
                return
    for child in term:
        scan_float_views(child, table)


def translate(term: SExp, table: SymbolTable) -> SExpr:
    out = _translate(term, table)
    if not isinstance(out, _Term):
        raise SmtReadError("internal translation error")
    return out.expr


@dataclass
class _Term:
    expr: SExpr


def _expect_bool(t: _Term) -> SExpr:
    if t.expr.sort != BOOL:
        raise SmtReadError("expected a boolean term")
    return t.expr


def _translate(term: SExp, table: SymbolTable) -> _Term:
    if isinstance(term, str):
        return _translate_atom(term, table)
    if not term:
        raise SmtReadError("empty application")
    head = term[0]
    args = term[1:]
    if isinstance(head, list):
        return _translate_indexed(head, args, table)
    if head == "fp" and len(args) == 3:
        bits = 0
        widths = (1, 11, 52)
        for part, width in zip(args, widths):
            bits = (bits << width) | _bv_literal(part, width)[0]
        return _Term(SConst(F64, bits_to_float(bits)))
    if head == "_":
        sexp = [head] + list(args)
        value = _indexed_constant(sexp)
        if value is not None:
            return _Term(value)
        raise SmtReadError(f"unsupported indexed term {sexp!r}")
    if head == "not":
        (a,) = args
        return _Term(SNot(_expect_bool(_translate(a, table))))
    if head in ("and", "or"):
        parts = tuple(_expect_bool(_translate(a, table)) for a in args)
        return _Term(SAnd(parts) if head == "and" else SOr(parts))
    if head == "=>":
        exprs = [_expect_bool(_translate(a, table)) for a in args]
        out = exprs[-1]
        for lhs in reversed(exprs[:-1]):
            out = SImplies(lhs, out)
        return _Term(out)
    if head == "=":
        if len(args) != 2:
            raise SmtReadError("only binary = is supported")
        return _Term(_translate_eq(args[0], args[1], table))
    if head == "fp.eq":
        a, b = (_translate(x, table) for x in args)
        return _Term(SFpEq(a.expr, b.expr))
    if head in _FP_CMP:
        a, b = (_translate(x, table) for x in args)
        return _Term(SCmp(_FP_CMP[head], a.expr, b.expr))
    if head in _BV_CMP:
        op, signed = _BV_CMP[head]
        a, b = (_translate(x, table) for x in args)
        return _Term(SCmp(op, a.expr, b.expr, signed=signed))
    if head in _FP_ARITH:
        if not args or args[0] != "RNE":
            raise SmtReadError(f"{head} needs the RNE rounding mode")
        a, b = (_translate(x, table) for x in args[1:])
        return _Term(SArith(_FP_ARITH[head], a.expr, b.expr, sort=F64))
    if head in _BV_ARITH:
        a, b = (_translate(x, table) for x in args)
        return _Term(SArith(_BV_ARITH[head], a.expr, b.expr, sort=a.expr.sort))
    if head in ("bvsdiv", "bvudiv"):
        a, b = (_translate(x, table) for x in args)
        return _Term(SArith("/", a.expr, b.expr, sort=a.expr.sort,
                            signed=head == "bvsdiv"))
    if head in ("fp.neg", "bvneg"):
        (a,) = (_translate(x, table) for x in args)
        return _Term(SNeg(a.expr, sort=a.expr.sort))
    raise SmtReadError(f"unsupported operator {head!r}")


def _translate_atom(atom: str, table: SymbolTable) -> _Term:
    if atom == "true":
        return _Term(SConst(BOOL, True))
    if atom == "false":
        return _Term(SConst(BOOL, False))
    if atom.startswith("#b"):
        return _Term(SConst(BVSort(len(atom) - 2, False), int(atom[2:], 2)))
    if atom.startswith("#x"):
        return _Term(SConst(BVSort((len(atom) - 2) * 4, False), int(atom[2:], 16)))
    name = _unquote(atom)
    if name in table.declared:
        return _Term(SVar(table.symvar(name)))
    raise SmtReadError(f"unknown symbol {atom!r}")


def _bv_literal(sexp: SExp, expect_width: Optional[int] = None) -> tuple[int, int]:
    if isinstance(sexp, str):
        if sexp.startswith("#b"):
            value, width = int(sexp[2:], 2), len(sexp) - 2
        elif sexp.startswith("#x"):
            value, width = int(sexp[2:], 16), (len(sexp) - 2) * 4
        else:
            raise SmtReadError(f"expected a bitvector literal, got {sexp!r}")
    elif (isinstance(sexp, list) and len(sexp) == 3 and sexp[0] == "_"
          and sexp[1].startswith("bv")):
        value, width = int(sexp[1][2:]), int(sexp[2])
    else:
        raise SmtReadError(f"expected a bitvector literal, got {sexp!r}")
    if expect_width is not None and width != expect_width:
        raise SmtReadError(f"bitvector literal width {width}, expected {expect_width}")
    return value, width


def _indexed_constant(sexp: SExp) -> Optional[Any]:
    if len(sexp) == 3 and isinstance(sexp[1], str) and sexp[1].startswith("bv"):
        value, width = _bv_literal(sexp)
        return SConst(BVSort(width, False), value)
    if len(sexp) == 4 and sexp[1] in _FP_SPECIALS and sexp[2] == "11" and sexp[3] == "53":
        return SConst(F64, bits_to_float(_FP_SPECIALS[sexp[1]]))
    return None


def _translate_indexed(head: list, args: list, table: SymbolTable) -> _Term:
    if head[:2] == ["_", "to_fp"] and head[2:] == ["11", "53"]:
        if len(args) == 1:
            inner = _translate(args[0], table)
            if isinstance(inner.expr, SVar):
                # reinterpretation; the scan pass already marked the view
                return _Term(SVar(table.symvar(inner.expr.var.name)))
            if isinstance(inner.expr, SConst) and isinstance(inner.expr.sort, BVSort):
                return _Term(SConst(F64, bits_to_float(inner.expr.value)))
            raise SmtReadError("to_fp reinterpret needs a symbol or literal")
        if len(args) == 2 and args[0] == "RNE":
            inner = _translate(args[1], table)
            return _Term(SCastFloat(inner.expr, signed=True))
    if head[:2] == ["_", "to_fp_unsigned"] and head[2:] == ["11", "53"]:
        if len(args) == 2 and args[0] == "RNE":
            inner = _translate(args[1], table)
            return _Term(SCastFloat(inner.expr, signed=False))
    const = _indexed_constant(head)
    if const is not None and not args:
        return _Term(const)
    raise SmtReadError(f"unsupported indexed operator {head!r}")


def _translate_eq(lhs: SExp, rhs: SExp, table: SymbolTable) -> SExpr:
    a = _translate(lhs, table)
    b = _translate(rhs, table)
    asort, bsort = a.expr.sort, b.expr.sort
    # raw equality between a float-view symbol and a 64-bit pattern
    for var_term, const_term in ((a, b), (b, a)):
        if (isinstance(var_term.expr, SVar) and var_term.expr.sort == F64
                and isinstance(const_term.expr, SConst)
                and isinstance(const_term.expr.sort, BVSort)
                and const_term.expr.sort.width == 64):
            return SBitsEq(var_term.expr.var, const_term.expr.value)
    if asort == F64 and bsort == F64:
        return SValEq(a.expr, b.expr)
    if asort == F64 or bsort == F64:
        raise SmtReadError("mixed float/bitvector equality")
    return SEq(a.expr, b.expr)
