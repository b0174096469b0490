"""IEEE-754 binary64 helpers shared by the interpreter, emitter and solver.

Python floats are C doubles, so native +, -, * and comparisons already follow
IEEE semantics with round-to-nearest-even. Division needs a shim because
CPython raises ZeroDivisionError where IEEE defines inf/NaN results.
Bit-pattern conversions go through struct, which copies bytes verbatim,
preserving NaN payloads.
"""

from __future__ import annotations

import math
import struct

F64_BITS_MASK = (1 << 64) - 1
SIGN_BIT = 1 << 63
EXP_MASK = 0x7FF << 52
FRAC_MASK = (1 << 52) - 1


def float_to_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def bits_to_float(b: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", b & F64_BITS_MASK))[0]


def is_nan_bits(b: int) -> bool:
    return (b & EXP_MASK) == EXP_MASK and (b & FRAC_MASK) != 0


def f64_div(a: float, b: float) -> float:
    """IEEE division: x/0 is +-inf, 0/0 and nan operands are nan."""
    if b == 0.0 and not math.isnan(b):
        if math.isnan(a) or a == 0.0:
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.copysign(math.inf, sign)
    try:
        return a / b
    except OverflowError:  # pragma: no cover - CPython doubles do not overflow
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def f64_key(b: int) -> int:
    """Map a bit pattern onto a total order compatible with < on values.

    Negative payloads order below -inf and positive payloads above +inf;
    the finite section is ordered by value with -0.0 immediately below +0.0.
    """
    if b & SIGN_BIT:
        return SIGN_BIT - 1 - (b ^ SIGN_BIT)
    return SIGN_BIT + b


def key_to_bits(k: int) -> int:
    if k >= SIGN_BIT:
        return k - SIGN_BIT
    return (SIGN_BIT - 1 - k) | SIGN_BIT


KEY_NEG_INF = f64_key(float_to_bits(-math.inf))
KEY_POS_INF = f64_key(float_to_bits(math.inf))
KEY_MIN = 0  # most negative NaN payload
KEY_MAX = (1 << 64) - 1  # largest positive NaN payload
CANONICAL_NAN_BITS = 0x7FF8000000000000
