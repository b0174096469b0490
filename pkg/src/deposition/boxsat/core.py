"""Box-splitting satisfiability core.

A box assigns every symbol a contiguous chunk of its finite value space:
booleans as a pair of flags, width-W bitvectors as an unsigned pattern
interval, floats as an interval in a total key order (negative NaN payloads,
-inf, values ascending with -0.0 just below +0.0, +inf, positive NaN
payloads). Formulas evaluate three-valued over a box; definite answers prune
or finish, indefinite boxes are narrowed through top-level conjuncts, probed
at concrete points with the exact evaluator, and finally split.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Optional

from ..fp import (
    CANONICAL_NAN_BITS,
    KEY_MAX,
    KEY_NEG_INF,
    KEY_POS_INF,
    bits_to_float,
    f64_div,
    f64_key,
    float_to_bits,
    key_to_bits,
)
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

_KEY_ZERO_NEG = f64_key(float_to_bits(-0.0))
_KEY_ZERO_POS = f64_key(float_to_bits(0.0))


# --- exact evaluation ------------------------------------------------------------

def eval_concrete(expr: SExpr, env: dict[SymVar, Any]) -> Any:
    """Exact evaluation; floats are Python floats, bitvectors unsigned ints."""
    if isinstance(expr, SConst):
        return expr.value
    if isinstance(expr, SVar):
        return env[expr.var]
    if isinstance(expr, SNot):
        return not eval_concrete(expr.operand, env)
    if isinstance(expr, SAnd):
        return all(eval_concrete(op, env) for op in expr.operands)
    if isinstance(expr, SOr):
        return any(eval_concrete(op, env) for op in expr.operands)
    if isinstance(expr, SImplies):
        return (not eval_concrete(expr.lhs, env)) or eval_concrete(expr.rhs, env)
    if isinstance(expr, SEq):
        return eval_concrete(expr.lhs, env) == eval_concrete(expr.rhs, env)
    if isinstance(expr, SFpEq):
        return eval_concrete(expr.lhs, env) == eval_concrete(expr.rhs, env)
    if isinstance(expr, SValEq):
        a = eval_concrete(expr.lhs, env)
        b = eval_concrete(expr.rhs, env)
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        return float_to_bits(a) == float_to_bits(b)
    if isinstance(expr, SBitsEq):
        return float_to_bits(env[expr.var]) == expr.bits
    if isinstance(expr, SCmp):
        return _cmp_concrete(expr, env)
    if isinstance(expr, SArith):
        return _arith_concrete(expr, env)
    if isinstance(expr, SNeg):
        v = eval_concrete(expr.operand, env)
        if expr.sort == F64:
            return -v
        width = expr.sort.width
        return (-v) & ((1 << width) - 1)
    if isinstance(expr, SCastFloat):
        v = eval_concrete(expr.operand, env)
        width = expr.operand.sort.width
        if expr.signed:
            v = _to_signed(v, width)
        return float(v)
    raise TypeError(f"cannot evaluate {expr!r}")


def _to_signed(pattern: int, width: int) -> int:
    if pattern >= 1 << (width - 1):
        return pattern - (1 << width)
    return pattern


def _cmp_signed_flag(expr: SCmp) -> bool:
    if getattr(expr, "signed", None) is not None:
        return bool(expr.signed)
    sort = expr.lhs.sort
    return isinstance(sort, BVSort) and sort.signed


def _cmp_concrete(expr: SCmp, env: dict[SymVar, Any]) -> bool:
    a = eval_concrete(expr.lhs, env)
    b = eval_concrete(expr.rhs, env)
    if isinstance(expr.lhs.sort, BVSort):
        width = expr.lhs.sort.width
        if _cmp_signed_flag(expr):
            a, b = _to_signed(a, width), _to_signed(b, width)
    if expr.op == "<":
        return a < b
    if expr.op == "<=":
        return a <= b
    if expr.op == ">":
        return a > b
    return a >= b


def _arith_concrete(expr: SArith, env: dict[SymVar, Any]) -> Any:
    a = eval_concrete(expr.lhs, env)
    b = eval_concrete(expr.rhs, env)
    if expr.sort == F64:
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        return f64_div(a, b)
    sort = expr.sort
    width = sort.width
    mask = (1 << width) - 1
    if expr.op == "+":
        return (a + b) & mask
    if expr.op == "-":
        return (a - b) & mask
    if expr.op == "*":
        return (a * b) & mask
    signed = getattr(expr, "signed", None)
    if signed is None:
        signed = sort.signed
    if not signed:
        if b == 0:
            return mask  # SMT-LIB bvudiv by zero
        return (a // b) & mask
    sa, sb = _to_signed(a, width), _to_signed(b, width)
    if sb == 0:
        return mask if sa >= 0 else 1  # SMT-LIB bvsdiv by zero
    q = abs(sa) // abs(sb)
    if (sa < 0) != (sb < 0):
        q = -q
    return q & mask


# --- abstract values ------------------------------------------------------------

@dataclass(frozen=True)
class ABool:
    may_false: bool
    may_true: bool


@dataclass(frozen=True)
class ABV:
    width: int
    lo: int  # unsigned patterns, lo <= hi
    hi: int


@dataclass(frozen=True)
class AF64:
    lo: float  # value-space bounds of the non-NaN part (ignore if all_nan)
    hi: float
    may_nan: bool
    all_nan: bool


TOP_F = AF64(-math.inf, math.inf, True, False)


# --- per-variable domains ----------------------------------------------------------

@dataclass(frozen=True)
class BoolDom:
    may_false: bool = True
    may_true: bool = True

    @property
    def empty(self) -> bool:
        return not (self.may_false or self.may_true)

    @property
    def singleton(self) -> bool:
        return self.may_false != self.may_true

    def size_log2(self) -> float:
        return 1.0 if (self.may_false and self.may_true) else 0.0

    def pick(self) -> bool:
        return not self.may_false

    def points(self) -> list[bool]:
        out = []
        if self.may_false:
            out.append(False)
        if self.may_true:
            out.append(True)
        return out

    def split(self) -> tuple["BoolDom", "BoolDom"]:
        return BoolDom(True, False), BoolDom(False, True)


@dataclass(frozen=True)
class BVDom:
    width: int
    lo: int = 0
    hi: int = -1  # -1 sentinel replaced in __post_init__

    def __post_init__(self) -> None:
        if self.hi == -1:
            object.__setattr__(self, "hi", (1 << self.width) - 1)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def singleton(self) -> bool:
        return self.lo == self.hi

    def size_log2(self) -> float:
        if self.empty:
            return -1.0
        return math.log2(self.hi - self.lo + 1)

    def pick(self) -> int:
        return self.lo

    def points(self) -> list[int]:
        mid = (self.lo + self.hi) // 2
        return sorted({self.lo, mid, self.hi})

    def split(self) -> tuple["BVDom", "BVDom"]:
        mid = (self.lo + self.hi) // 2
        return BVDom(self.width, self.lo, mid), BVDom(self.width, mid + 1, self.hi)


@dataclass(frozen=True)
class FDom:
    """Interval in float key space; may include NaN payload regions."""

    klo: int = 0
    khi: int = KEY_MAX

    @property
    def empty(self) -> bool:
        return self.klo > self.khi

    @property
    def singleton(self) -> bool:
        return self.klo == self.khi

    def size_log2(self) -> float:
        if self.empty:
            return -1.0
        return math.log2(self.khi - self.klo + 1)

    def contains_nan(self) -> bool:
        return self.klo < KEY_NEG_INF or self.khi > KEY_POS_INF

    def nan_only(self) -> bool:
        return self.khi < KEY_NEG_INF or self.klo > KEY_POS_INF

    def value_part(self) -> tuple[int, int]:
        """Key bounds clipped to the non-NaN section (may be empty)."""
        return max(self.klo, KEY_NEG_INF), min(self.khi, KEY_POS_INF)

    def abstract(self) -> AF64:
        if self.nan_only():
            return AF64(math.nan, math.nan, True, True)
        vlo, vhi = self.value_part()
        return AF64(
            bits_to_float(key_to_bits(vlo)),
            bits_to_float(key_to_bits(vhi)),
            self.contains_nan(),
            False,
        )

    def pick(self) -> float:
        if self.klo <= _KEY_ZERO_POS <= self.khi:
            return 0.0
        vlo, vhi = self.value_part()
        if vlo <= vhi:
            return bits_to_float(key_to_bits(vlo))
        return bits_to_float(key_to_bits(self.klo))

    def points(self) -> list[float]:
        keys = {self.klo, self.khi, (self.klo + self.khi) // 2}
        vlo, vhi = self.value_part()
        if vlo <= vhi:
            keys.add(vlo)
            keys.add(vhi)
            # zero is a frequent threshold; probe it when inside
            if vlo <= _KEY_ZERO_POS <= vhi:
                keys.add(_KEY_ZERO_POS)
        return [bits_to_float(key_to_bits(k)) for k in sorted(keys)
                if self.klo <= k <= self.khi]

    def split(self) -> tuple["FDom", "FDom"]:
        mid = (self.klo + self.khi) // 2
        return FDom(self.klo, mid), FDom(mid + 1, self.khi)


Dom = Any  # BoolDom | BVDom | FDom

Box = dict[SymVar, Dom]


def full_domain(var: SymVar) -> Dom:
    if var.sort == BOOL:
        return BoolDom()
    if var.sort == F64:
        return FDom()
    return BVDom(var.sort.width)


def dom_pick(dom: Dom) -> Any:
    return dom.pick()


def box_pick(box: Box) -> dict[SymVar, Any]:
    return {var: dom.pick() for var, dom in box.items()}


# --- three-valued evaluation over a box ------------------------------------------

TV = Optional[bool]


def eval3(expr: SExpr, box: Box) -> TV:
    v = _abs(expr, box)
    if isinstance(v, ABool):
        if v.may_true and not v.may_false:
            return True
        if v.may_false and not v.may_true:
            return False
        return None
    raise TypeError(f"formula does not evaluate to a boolean: {expr!r}")


def _abs_var(var: SymVar, box: Box) -> Any:
    dom = box[var]
    if isinstance(dom, BoolDom):
        return ABool(dom.may_false, dom.may_true)
    if isinstance(dom, BVDom):
        return ABV(dom.width, dom.lo, dom.hi)
    return dom.abstract()


def _abs(expr: SExpr, box: Box) -> Any:
    if isinstance(expr, SConst):
        if expr.sort == BOOL:
            return ABool(not expr.value, bool(expr.value))
        if expr.sort == F64:
            if math.isnan(expr.value):
                return AF64(math.nan, math.nan, True, True)
            return AF64(expr.value, expr.value, False, False)
        return ABV(expr.sort.width, expr.value, expr.value)
    if isinstance(expr, SVar):
        return _abs_var(expr.var, box)
    if isinstance(expr, SNot):
        v = _abs(expr.operand, box)
        return ABool(v.may_true, v.may_false)
    if isinstance(expr, SAnd):
        may_true, may_false = True, False
        for op in expr.operands:
            v = _abs(op, box)
            if not v.may_true:
                return ABool(True, False)
            if v.may_false:
                may_false = True
        return ABool(may_false, may_true)
    if isinstance(expr, SOr):
        may_true, may_false = False, True
        for op in expr.operands:
            v = _abs(op, box)
            if not v.may_false:
                return ABool(False, True)
            if v.may_true:
                may_true = True
        return ABool(may_false, may_true)
    if isinstance(expr, SImplies):
        a = _abs(expr.lhs, box)
        b = _abs(expr.rhs, box)
        may_true = a.may_false or b.may_true
        may_false = a.may_true and b.may_false
        return ABool(may_false, may_true)
    if isinstance(expr, SEq):
        return _abs_eq(expr.lhs, expr.rhs, box)
    if isinstance(expr, SFpEq):
        return _abs_fpeq(_abs(expr.lhs, box), _abs(expr.rhs, box))
    if isinstance(expr, SValEq):
        return _abs_valeq(_abs(expr.lhs, box), _abs(expr.rhs, box))
    if isinstance(expr, SBitsEq):
        dom = box[expr.var]
        key = f64_key(expr.bits)
        if dom.empty or key < dom.klo or key > dom.khi:
            return ABool(True, False)
        if dom.singleton:
            return ABool(False, True)
        return ABool(True, True)
    if isinstance(expr, SCmp):
        return _abs_cmp(expr, box)
    if isinstance(expr, SArith):
        return _abs_arith(expr, box)
    if isinstance(expr, SNeg):
        v = _abs(expr.operand, box)
        if isinstance(v, AF64):
            if v.all_nan:
                return v
            return AF64(-v.hi, -v.lo, v.may_nan, False)
        width = v.width
        if v.lo == v.hi:
            p = (-v.lo) & ((1 << width) - 1)
            return ABV(width, p, p)
        if v.lo >= 1:
            m = 1 << width
            return ABV(width, m - v.hi, m - v.lo)
        return ABV(width, 0, (1 << width) - 1)
    if isinstance(expr, SCastFloat):
        v = _abs(expr.operand, box)
        width = v.width
        if expr.signed:
            lo, hi = _signed_view(v)
            if lo is None:
                return AF64(float(-(1 << (width - 1))), float((1 << (width - 1)) - 1),
                            False, False)
            return AF64(float(lo), float(hi), False, False)
        return AF64(float(v.lo), float(v.hi), False, False)
    raise TypeError(f"cannot abstract {expr!r}")


def _signed_view(v: ABV) -> tuple[Optional[int], Optional[int]]:
    """Signed bounds when the interval does not straddle the sign boundary."""
    half = 1 << (v.width - 1)
    if v.hi < half:
        return v.lo, v.hi
    if v.lo >= half:
        return v.lo - (1 << v.width), v.hi - (1 << v.width)
    return None, None


def _abs_eq(lhs: SExpr, rhs: SExpr, box: Box) -> ABool:
    a = _abs(lhs, box)
    b = _abs(rhs, box)
    if isinstance(a, ABool):
        may_true = (a.may_true and b.may_true) or (a.may_false and b.may_false)
        may_false = (a.may_true and b.may_false) or (a.may_false and b.may_true)
        return ABool(may_false, may_true)
    # bitvectors
    if a.hi < b.lo or b.hi < a.lo:
        return ABool(True, False)
    if a.lo == a.hi == b.lo == b.hi:
        return ABool(False, True)
    return ABool(True, True)


def _abs_fpeq(a: AF64, b: AF64) -> ABool:
    if a.all_nan or b.all_nan:
        return ABool(True, False)
    disjoint = a.hi < b.lo or b.hi < a.lo
    if disjoint:
        return ABool(True, False)
    if (not a.may_nan and not b.may_nan
            and a.lo == a.hi and b.lo == b.hi and a.lo == b.lo):
        return ABool(False, True)
    return ABool(True, True)


def _abs_valeq(a: AF64, b: AF64) -> ABool:
    if a.all_nan and b.all_nan:
        return ABool(False, True)
    both_nan_possible = a.may_nan and b.may_nan
    if a.all_nan or b.all_nan:
        return ABool(True, True) if both_nan_possible else ABool(True, False)
    disjoint = a.hi < b.lo or b.hi < a.lo
    if disjoint and not both_nan_possible:
        return ABool(True, False)
    if (not a.may_nan and not b.may_nan
            and a.lo == a.hi and b.lo == b.hi
            and float_to_bits(a.lo) == float_to_bits(b.lo)):
        return ABool(False, True)
    return ABool(True, True)


def _abs_cmp(expr: SCmp, box: Box) -> ABool:
    a = _abs(expr.lhs, box)
    b = _abs(expr.rhs, box)
    op = expr.op
    if isinstance(a, AF64):
        if a.all_nan or b.all_nan:
            return ABool(True, False)
        nan_possible = a.may_nan or b.may_nan
        lt = _interval_rel(a.lo, a.hi, b.lo, b.hi, op)
        if lt is True and not nan_possible:
            return ABool(False, True)
        if lt is False:
            return ABool(True, False)
        return ABool(True, True)
    # bitvectors
    if _cmp_signed_flag(expr):
        alo, ahi = _signed_view(a)
        blo, bhi = _signed_view(b)
        if alo is None or blo is None:
            return ABool(True, True)
    else:
        alo, ahi, blo, bhi = a.lo, a.hi, b.lo, b.hi
    rel = _interval_rel(alo, ahi, blo, bhi, op)
    if rel is True:
        return ABool(False, True)
    if rel is False:
        return ABool(True, False)
    return ABool(True, True)


def _interval_rel(alo, ahi, blo, bhi, op: str) -> TV:
    if op == "<":
        if ahi < blo:
            return True
        if alo >= bhi:
            return False
    elif op == "<=":
        if ahi <= blo:
            return True
        if alo > bhi:
            return False
    elif op == ">":
        if alo > bhi:
            return True
        if ahi <= blo:
            return False
    else:  # >=
        if alo >= bhi:
            return True
        if ahi < blo:
            return False
    return None


def _abs_arith(expr: SArith, box: Box) -> Any:
    a = _abs(expr.lhs, box)
    b = _abs(expr.rhs, box)
    if expr.sort == F64:
        return _f_arith(expr.op, a, b)
    width = expr.sort.width
    mask = (1 << width) - 1
    if a.lo == a.hi and b.lo == b.hi:
        node = SArith(
            expr.op,
            SConst(BVSort(width, expr.sort.signed), a.lo),
            SConst(BVSort(width, expr.sort.signed), b.lo),
            sort=expr.sort,
            signed=expr.signed,
        )
        value = _arith_concrete(node, {})
        return ABV(width, value, value)
    if expr.op in ("+", "-", "*"):
        if expr.op == "+":
            lo, hi = a.lo + b.lo, a.hi + b.hi
        elif expr.op == "-":
            lo, hi = a.lo - b.hi, a.hi - b.lo
        else:
            corners = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
            lo, hi = min(corners), max(corners)
        if 0 <= lo and hi <= mask:
            return ABV(width, lo, hi)
        lap_lo, lap_hi = lo >> width, hi >> width
        if lap_lo == lap_hi:
            return ABV(width, lo & mask, hi & mask)
        return ABV(width, 0, mask)
    return ABV(width, 0, mask)


def _f_arith(op: str, a: AF64, b: AF64) -> AF64:
    if a.all_nan or b.all_nan:
        return AF64(math.nan, math.nan, True, True)
    may_nan = a.may_nan or b.may_nan
    singleton = a.lo == a.hi and b.lo == b.hi and not _is_zero_pair_ambiguous(a, b, op)
    if op == "/":
        divisor_spans_zero = b.lo <= 0.0 <= b.hi
        if divisor_spans_zero and not singleton:
            return TOP_F
    corners = []
    ops = {
        "+": lambda x, y: x + y,
        "-": lambda x, y: x - y,
        "*": lambda x, y: x * y,
        "/": f64_div,
    }
    fn = ops[op]
    for x in (a.lo, a.hi):
        for y in (b.lo, b.hi):
            corners.append(fn(x, y))
    if any(math.isnan(c) for c in corners):
        if singleton:
            return AF64(math.nan, math.nan, True, True)
        return TOP_F
    return AF64(min(corners), max(corners), may_nan, False)


def _is_zero_pair_ambiguous(a: AF64, b: AF64, op: str) -> bool:
    # -0.0 == 0.0 compares equal, so a "singleton" interval [−0.0, 0.0]
    # actually holds two patterns; only division/multiplication signs care
    def spans_both_zeros(v: AF64) -> bool:
        return v.lo == 0.0 and v.hi == 0.0 and (
            math.copysign(1.0, v.lo) != math.copysign(1.0, v.hi)
        )

    return spans_both_zeros(a) or spans_both_zeros(b)


# --- narrowing -------------------------------------------------------------------

def _set_dom(box: Box, var: SymVar, dom: Dom) -> bool:
    old = box[var]
    if dom == old:
        return False
    box[var] = dom
    return True


def _narrow_bool(box: Box, var: SymVar, value: bool) -> TV:
    dom: BoolDom = box[var]
    new = BoolDom(dom.may_false and not value, dom.may_true and value)
    if new.empty:
        return False
    _set_dom(box, var, new)
    return True


def _key_bounds_for_range(lo_val: float, hi_val: float) -> tuple[int, int]:
    """Key interval covering all patterns with value in [lo_val, hi_val]."""
    klo = _KEY_ZERO_NEG if lo_val == 0.0 else f64_key(float_to_bits(lo_val))
    khi = _KEY_ZERO_POS if hi_val == 0.0 else f64_key(float_to_bits(hi_val))
    return klo, khi


def _narrow_float_range(
    box: Box, var: SymVar, lo_val: float, hi_val: float, keep_nan: bool
) -> TV:
    dom: FDom = box[var]
    klo, khi = _key_bounds_for_range(lo_val, hi_val)
    if keep_nan:
        return None  # union with NaN tails is not one interval; skip
    new = FDom(max(dom.klo, klo), min(dom.khi, khi))
    if new.empty:
        return False
    _set_dom(box, var, new)
    return True


def narrow(box: Box, conjuncts: list[SExpr], rounds: int = 10) -> bool:
    """Prune box values violating required conjuncts. False if box empties."""
    for _ in range(rounds):
        changed = False
        required: dict[SExpr, bool] = {}
        stack: list[tuple[SExpr, bool]] = [(c, True) for c in conjuncts]
        while stack:
            expr, pol = stack.pop()
            if isinstance(expr, SNot):
                stack.append((expr.operand, not pol))
                continue
            if isinstance(expr, SAnd) and pol:
                stack.extend((op, True) for op in expr.operands)
                continue
            if isinstance(expr, SOr) and not pol:
                stack.extend((op, False) for op in expr.operands)
                continue
            if isinstance(expr, (SOr, SAnd)):
                # (or ...) required true / (and ...) required false: when only
                # one branch can still supply the required polarity, require it
                want = pol
                live: list[SExpr] = []
                for op in expr.operands:
                    v = eval3(op, box)
                    if v is None or v == want:
                        live.append(op)
                    if len(live) > 1:
                        break
                if not live:
                    return False
                if len(live) == 1:
                    stack.append((live[0], want))
                continue
            if isinstance(expr, SImplies):
                if pol:
                    a = eval3(expr.lhs, box)
                    if a is True:
                        stack.append((expr.rhs, True))
                    elif eval3(expr.rhs, box) is False:
                        stack.append((expr.lhs, False))
                else:
                    stack.append((expr.lhs, True))
                    stack.append((expr.rhs, False))
                continue
            # an atom required under both polarities refutes the box outright
            try:
                seen = required.get(expr)
                if seen is not None and seen != pol:
                    return False
                required[expr] = pol
            except TypeError:  # unhashable never happens; belt and braces
                pass
            result = _narrow_atom(box, expr, pol)
            if result is False:
                return False
            if result is True:
                changed = True
        if not changed:
            return True
    return True


def _narrow_atom(box: Box, expr: SExpr, pol: bool) -> TV:
    """Returns True if the box changed, False if it emptied, None otherwise."""
    v = eval3(expr, box)
    if v is not None:
        if v != pol:
            return False
        return None
    if isinstance(expr, SVar) and expr.sort == BOOL:
        return _narrow_bool(box, expr.var, pol)
    if isinstance(expr, SBitsEq):
        dom: FDom = box[expr.var]
        key = f64_key(expr.bits)
        if pol:
            if not (dom.klo <= key <= dom.khi):
                return False
            _set_dom(box, expr.var, FDom(key, key))
            return True
        if dom.klo == key:
            return _shrink(box, expr.var, FDom(key + 1, dom.khi))
        if dom.khi == key:
            return _shrink(box, expr.var, FDom(dom.klo, key - 1))
        return None
    if isinstance(expr, (SEq, SFpEq, SValEq)):
        return _narrow_equality(box, expr, pol)
    if isinstance(expr, SCmp):
        return _narrow_cmp(box, expr, pol)
    return None


def _shrink(box: Box, var: SymVar, dom: Dom) -> TV:
    if dom.empty:
        return False
    return _set_dom(box, var, dom) or None


def _var_side(expr: SExpr) -> Optional[SymVar]:
    if isinstance(expr, SVar):
        return expr.var
    return None


def _narrow_equality(box: Box, expr, pol: bool) -> TV:
    sides = ((expr.lhs, expr.rhs), (expr.rhs, expr.lhs))
    changed: TV = None
    for var_expr, other in sides:
        var = _var_side(var_expr)
        if var is None:
            continue
        o = _abs(other, box)
        if isinstance(o, ABool):
            if pol and o.may_true != o.may_false:
                r = _narrow_bool(box, var, o.may_true)
                if r is False:
                    return False
                changed = changed or r
            continue
        if isinstance(o, ABV):
            dom: BVDom = box[var]
            if pol:
                r = _shrink(box, var, BVDom(dom.width, max(dom.lo, o.lo),
                                            min(dom.hi, o.hi)))
            else:
                r = None
                if o.lo == o.hi:
                    if dom.lo == o.lo:
                        r = _shrink(box, var, BVDom(dom.width, dom.lo + 1, dom.hi))
                    elif dom.hi == o.lo:
                        r = _shrink(box, var, BVDom(dom.width, dom.lo, dom.hi - 1))
            if r is False:
                return False
            changed = changed or r
            continue
        # float equality against a value interval
        if pol and isinstance(o, AF64) and not o.all_nan:
            if isinstance(expr, SValEq) and o.may_nan:
                continue  # could be NaN-identity; cannot narrow to one interval
            r = _narrow_float_range(box, var, o.lo, o.hi, keep_nan=False)
            if r is False:
                return False
            changed = changed or r
    return changed


_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}
_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _narrow_cmp(box: Box, expr: SCmp, pol: bool) -> TV:
    op = expr.op if pol else _NEGATE[expr.op]
    changed: TV = None
    for var_expr, other, side_op in (
        (expr.lhs, expr.rhs, op),
        (expr.rhs, expr.lhs, _FLIP[op]),
    ):
        var = _var_side(var_expr)
        if var is None:
            continue
        o = _abs(other, box)
        if isinstance(o, AF64):
            if o.all_nan:
                return False  # nothing compares against NaN
            r = _narrow_float_cmp(box, var, side_op, o)
        else:
            r = _narrow_bv_cmp(box, var, side_op, o, _cmp_signed_flag(expr))
        if r is False:
            return False
        changed = changed or r
    return changed


def _narrow_float_cmp(box: Box, var: SymVar, op: str, o: AF64) -> TV:
    dom: FDom = box[var]
    # comparisons are false on NaN, so a required comparison drops NaN keys
    klo, khi = max(dom.klo, KEY_NEG_INF), min(dom.khi, KEY_POS_INF)
    if op in ("<", "<="):
        bound = o.hi
        kb = (_KEY_ZERO_POS if bound == 0.0 else f64_key(float_to_bits(bound)))
        if op == "<":
            kb = (_KEY_ZERO_NEG if bound == 0.0 else kb) - 1
        khi = min(khi, kb)
    else:
        bound = o.lo
        kb = (_KEY_ZERO_NEG if bound == 0.0 else f64_key(float_to_bits(bound)))
        if op == ">":
            kb = (_KEY_ZERO_POS if bound == 0.0 else kb) + 1
        klo = max(klo, kb)
    return _shrink(box, var, FDom(klo, khi))


def _narrow_bv_cmp(box: Box, var: SymVar, op: str, o: ABV, signed: bool) -> TV:
    dom: BVDom = box[var]
    if signed:
        dlo, dhi = _signed_view(ABV(dom.width, dom.lo, dom.hi))
        olo, ohi = _signed_view(o)
        if dlo is None or olo is None:
            return None
    else:
        dlo, dhi, olo, ohi = dom.lo, dom.hi, o.lo, o.hi
    if op == "<":
        dhi = min(dhi, ohi - 1)
    elif op == "<=":
        dhi = min(dhi, ohi)
    elif op == ">":
        dlo = max(dlo, olo + 1)
    else:
        dlo = max(dlo, olo)
    if dlo > dhi:
        return False
    mask = (1 << dom.width) - 1
    return _shrink(box, var, BVDom(dom.width, dlo & mask, dhi & mask))


# --- the search --------------------------------------------------------------------

@dataclass
class SolveResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[dict[SymVar, Any]] = None
    boxes_used: int = 0


def _equality_lhs_vars(conjuncts: list[SExpr]) -> set[SymVar]:
    """Symbols defined through equalities; probing pins the others."""
    defined: set[SymVar] = set()
    stack = list(conjuncts)
    while stack:
        e = stack.pop()
        if isinstance(e, (SAnd, SOr)):
            stack.extend(e.operands)
        elif isinstance(e, SImplies):
            stack.extend((e.lhs, e.rhs))
        elif isinstance(e, SNot):
            stack.append(e.operand)
        elif isinstance(e, (SEq, SValEq)):
            for side in (e.lhs, e.rhs):
                var = _var_side(side)
                if var is not None:
                    defined.add(var)
    return defined


def _collect_atoms(assertions: list[SExpr]) -> list[tuple[SExpr, frozenset]]:
    """Atomic subformulas paired with their free symbols."""
    from ..sym import free_vars

    atoms: list[SExpr] = []
    seen: set[int] = set()
    stack: list[SExpr] = list(assertions)
    while stack:
        e = stack.pop()
        if id(e) in seen:
            continue
        seen.add(id(e))
        if isinstance(e, (SAnd, SOr)):
            stack.extend(e.operands)
        elif isinstance(e, SNot):
            stack.append(e.operand)
        elif isinstance(e, SImplies):
            stack.extend((e.lhs, e.rhs))
        elif isinstance(e, (SEq, SFpEq, SValEq, SCmp, SBitsEq)) or (
            isinstance(e, SVar) and e.sort == BOOL
        ):
            atoms.append(e)
    return [(a, frozenset(free_vars(a))) for a in atoms]


def solve(
    symbols: list[SymVar],
    assertions: list[SExpr],
    max_boxes: int = 120_000,
    seed: int = 0xB0C5A7,
) -> SolveResult:
    formula = SAnd(tuple(assertions)) if len(assertions) != 1 else assertions[0]
    if not assertions:
        return SolveResult("sat", {v: dom_pick(full_domain(v)) for v in symbols})
    conjuncts = list(assertions)
    rng = random.Random(seed)
    defined = _equality_lhs_vars(conjuncts)
    probe_vars = [v for v in symbols if v not in defined] or list(symbols)
    atoms = _collect_atoms(conjuncts)
    order = {v: i for i, v in enumerate(symbols)}

    root: Box = {v: full_domain(v) for v in symbols}
    work: list[Box] = [root]
    boxes = 0
    while work:
        boxes += 1
        if boxes > max_boxes:
            return SolveResult("unknown", boxes_used=boxes)
        box = work.pop()
        if any(d.empty for d in box.values()):
            continue
        if not narrow(box, conjuncts):
            continue
        verdict = eval3(formula, box)
        if verdict is False:
            continue
        if verdict is True:
            model = box_pick(box)
            if eval_concrete(formula, model):
                return SolveResult("sat", model, boxes)
        else:
            model = _probe(box, conjuncts, formula, probe_vars, rng)
            if model is not None:
                return SolveResult("sat", model, boxes)
        split_var = _split_choice(box, atoms, order)
        if split_var is None:
            # fully singleton and exact evaluation already said no
            model = box_pick(box)
            if eval_concrete(formula, model):  # pragma: no cover - safety net
                return SolveResult("sat", model, boxes)
            continue
        lo_half, hi_half = box[split_var].split()
        for half in (hi_half, lo_half):
            child = dict(box)
            child[split_var] = half
            work.append(child)
    return SolveResult("unsat", boxes_used=boxes)


def _split_choice(
    box: Box,
    atoms: list[tuple[SExpr, frozenset]],
    order: dict[SymVar, int],
) -> Optional[SymVar]:
    """Split the variable blocking the most indeterminate atoms, preferring
    small domains (an enum resolves whole path disjuncts; a float usually
    just bisects). Falls back to the widest splittable domain."""
    counts: dict[SymVar, int] = {}
    for atom, fvs in atoms:
        if eval3(atom, box) is None:
            for v in fvs:
                if v in box and box[v].size_log2() > 0.0:
                    counts[v] = counts.get(v, 0) + 1
    if counts:
        return min(
            counts,
            key=lambda v: (box[v].size_log2(), -counts[v], order.get(v, 0)),
        )
    best, best_size = None, 0.0
    for var, dom in box.items():
        size = dom.size_log2()
        if size > best_size:
            best, best_size = var, size
    return best


def _probe(
    box: Box,
    conjuncts: list[SExpr],
    formula: SExpr,
    probe_vars: list[SymVar],
    rng: random.Random,
    attempts: int = 8,
) -> Optional[dict[SymVar, Any]]:
    """Pin the undefined symbols at candidate points, re-narrow, test exactly."""
    candidates: list[dict[SymVar, Any]] = []
    per_var = {v: box[v].points() for v in probe_vars}
    strategies = max((len(p) for p in per_var.values()), default=0)
    for idx in range(strategies):
        candidates.append({
            v: pts[min(idx, len(pts) - 1)] for v, pts in per_var.items()
        })
    while len(candidates) < attempts:
        candidates.append({
            v: pts[rng.randrange(len(pts))] for v, pts in per_var.items()
        })
    for cand in candidates[:attempts]:
        sub = dict(box)
        for var, value in cand.items():
            sub[var] = _singleton_dom(var, value, sub[var])
            if sub[var] is None:
                break
        else:
            if not narrow(sub, conjuncts):
                continue
            vec = box_pick(sub)
            if eval_concrete(formula, vec):
                return vec
    return None


def _singleton_dom(var: SymVar, value: Any, current: Dom) -> Optional[Dom]:
    if isinstance(current, BoolDom):
        new = BoolDom(not value, bool(value))
        return None if new.empty else new
    if isinstance(current, BVDom):
        if current.lo <= value <= current.hi:
            return BVDom(current.width, value, value)
        return None
    key = f64_key(float_to_bits(value))
    if current.klo <= key <= current.khi:
        return FDom(key, key)
    return None


_ = CANONICAL_NAN_BITS  # re-exported constant used by the script reader
