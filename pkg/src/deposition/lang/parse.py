"""Lexer, recursive-descent parser, and typechecker for decision programs.

Grammar sketch (comments run ``//`` to end of line, files use ``.decl``):

    program  := decl* stmt*
    decl     := ("env"|"state"|"decision") NAME ":" type ["=" literal] ";"
              | "const" NAME ":" type "=" literal ";"
              | "type" NAME "=" type ";"
    type     := "bool" | "float" | "int" "<" INT ">" | "uint" "<" INT ">"
              | "enum" "{" NAME ("," NAME)* "}" | NAME
    stmt     := NAME ":=" expr ";"
              | "local" NAME ":" type "=" expr ";"
              | "if" "(" expr ")" block ["else" (block | if-stmt)]
              | "while" "(" expr ")" "bound" INT block
              | "return" ";"

Environment and state variables are read-only in the body: one decision
window reads its inputs and writes decisions (plus locals for scratch).
Every decision variable must declare an initial value. Loops must carry a
syntactic iteration bound and stop after at most that many iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from ..errors import (
    DeclSyntaxError,
    DeclTypeError,
    EnvWriteError,
    UnboundedLoopError,
)
from ..model import (
    BoolDomain,
    Domain,
    EnumDomain,
    FloatDomain,
    IntDomain,
    VarCatalog,
    VarClass,
    VarDecl,
)
from .ast import (
    ARITH,
    Assign,
    Binary,
    Body,
    CastFloat,
    COMPARISONS,
    Expr,
    If,
    Lit,
    LocalDecl,
    LOGIC,
    Name,
    Pos,
    Pow,
    Program,
    Return,
    Unary,
    While,
)

KEYWORDS = {
    "env", "state", "decision", "const", "type", "local",
    "if", "else", "while", "bound", "return",
    "bool", "float", "int", "uint", "enum",
    "true", "false", "pow",
}

_PUNCT = [
    "==", "!=", "<=", ">=", "&&", "||", ":=",
    "(", ")", "{", "}", "<", ">", ",", ";", ":", "=",
    "+", "-", "*", "/", "!",
]


@dataclass
class Token:
    kind: str  # "name" | "int" | "float" | "punct" | "eof"
    text: str
    pos: Pos


def _lex(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i, n = 1, 1, 0, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        pos = Pos(line, col)
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(Token("name", source[i:j], pos))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            toks.append(Token("float" if is_float else "int", source[i:j], pos))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                toks.append(Token("punct", p, pos))
                i += len(p)
                col += len(p)
                break
        else:
            raise DeclSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", Pos(line, col)))
    return toks


class _Parser:
    def __init__(self, source: str):
        self.toks = _lex(source)
        self.i = 0
        self.source = source

    # --- token helpers

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def _advance(self) -> Token:
        t = self.cur
        self.i += 1
        return t

    def _fail(self, expected: str) -> None:
        t = self.cur
        got = t.text or "end of input"
        raise DeclSyntaxError(f"expected {expected}, got {got!r}", t.pos.line, t.pos.col)

    def eat(self, text: str) -> Token:
        if self.cur.text != text or self.cur.kind == "eof":
            self._fail(repr(text))
        return self._advance()

    def eat_name(self) -> Token:
        t = self.cur
        if t.kind != "name" or t.text in KEYWORDS:
            self._fail("an identifier")
        return self._advance()

    def eat_int(self) -> int:
        t = self.cur
        if t.kind != "int":
            self._fail("an integer")
        self._advance()
        return int(t.text)

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind != "eof"

    # --- declarations

    def parse_program(self) -> _RawProgram:
        decls: list[tuple[str, Token, Domain, Optional[Expr]]] = []
        aliases: dict[str, Domain] = {}
        while self.cur.kind == "name" and self.cur.text in (
            "env", "state", "decision", "const", "type",
        ):
            kw = self._advance().text
            name = self.eat_name()
            if kw == "type":
                self.eat("=")
                aliases[name.text] = self.parse_type(aliases)
                self.eat(";")
                continue
            self.eat(":")
            domain = self.parse_type(aliases)
            init: Optional[Expr] = None
            if self.at("="):
                self.eat("=")
                init = self.parse_literal()
            if kw == "const" and init is None:
                raise DeclSyntaxError("const needs a value", name.pos.line, name.pos.col)
            self.eat(";")
            decls.append((kw, name, domain, init))
        body = self.parse_block_stmts(until_eof=True)
        return _RawProgram(decls, body, self.source)

    def parse_type(self, aliases: dict[str, Domain]) -> Domain:
        t = self.cur
        if self.at("bool"):
            self._advance()
            return BoolDomain()
        if self.at("float"):
            self._advance()
            return FloatDomain()
        if self.at("int") or self.at("uint"):
            signed = self._advance().text == "int"
            self.eat("<")
            width = self.eat_int()
            self.eat(">")
            if not 1 <= width <= 64:
                raise DeclTypeError("int width must be in [1, 64]", t.pos.line, t.pos.col)
            return IntDomain(width=width, signed=signed)
        if self.at("enum"):
            self._advance()
            self.eat("{")
            members = [self.eat_name().text]
            while self.at(","):
                self.eat(",")
                members.append(self.eat_name().text)
            self.eat("}")
            if len(set(members)) != len(members):
                raise DeclTypeError("duplicate enum member", t.pos.line, t.pos.col)
            return EnumDomain(tuple(members))
        if t.kind == "name" and t.text in aliases:
            self._advance()
            return aliases[t.text]
        self._fail("a type")
        raise AssertionError  # unreachable

    def parse_literal(self) -> Expr:
        # literals in declarations: optionally signed numbers, bools, members
        t = self.cur
        if self.at("-"):
            self._advance()
            inner = self.parse_literal()
            return Unary(pos=t.pos, op="-", operand=inner)
        if t.kind in ("int", "float"):
            self._advance()
            value: Any = float(t.text) if t.kind == "float" else int(t.text)
            return Lit(pos=t.pos, value=value)
        if t.text in ("true", "false"):
            self._advance()
            return Lit(pos=t.pos, value=t.text == "true")
        if t.kind == "name" and t.text not in KEYWORDS:
            self._advance()
            return Name(pos=t.pos, ident=t.text)
        self._fail("a literal")
        raise AssertionError

    # --- statements

    def parse_block_stmts(self, until_eof: bool = False) -> Body:
        stmts: Body = []
        while True:
            if until_eof:
                if self.cur.kind == "eof":
                    return stmts
            elif self.at("}"):
                return stmts
            stmts.append(self.parse_stmt())

    def parse_block(self) -> Body:
        self.eat("{")
        stmts = self.parse_block_stmts()
        self.eat("}")
        return stmts

    def parse_stmt(self) -> Any:
        t = self.cur
        if self.at("if"):
            self._advance()
            self.eat("(")
            cond = self.parse_expr()
            self.eat(")")
            then = self.parse_block()
            orelse: Body = []
            if self.at("else"):
                self.eat("else")
                if self.at("if"):
                    orelse = [self.parse_stmt()]
                else:
                    orelse = self.parse_block()
            return If(pos=t.pos, cond=cond, then=then, orelse=orelse)
        if self.at("while"):
            self._advance()
            self.eat("(")
            cond = self.parse_expr()
            self.eat(")")
            if not self.at("bound"):
                raise UnboundedLoopError(
                    "while loops need a 'bound N' annotation", t.pos.line, t.pos.col
                )
            self.eat("bound")
            bound = self.eat_int()
            if bound < 1:
                raise DeclSyntaxError("loop bound must be >= 1", t.pos.line, t.pos.col)
            body = self.parse_block()
            return While(pos=t.pos, cond=cond, bound=bound, body=body)
        if self.at("return"):
            self._advance()
            self.eat(";")
            return Return(pos=t.pos)
        if self.at("local"):
            self._advance()
            name = self.eat_name()
            self.eat(":")
            domain = self.parse_type({})
            self.eat("=")
            init = self.parse_expr()
            self.eat(";")
            return LocalDecl(pos=name.pos, name=name.text, domain=domain, init=init)
        name = self.eat_name()
        self.eat(":=")
        expr = self.parse_expr()
        self.eat(";")
        return Assign(pos=t.pos, target=name.text, expr=expr)

    # --- expressions (precedence climbing)

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at("||"):
            pos = self.cur.pos
            self._advance()
            e = Binary(pos=pos, op="||", lhs=e, rhs=self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.at("&&"):
            pos = self.cur.pos
            self._advance()
            e = Binary(pos=pos, op="&&", lhs=e, rhs=self.parse_not())
        return e

    def parse_not(self) -> Expr:
        if self.at("!"):
            pos = self.cur.pos
            self._advance()
            return Unary(pos=pos, op="!", operand=self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        if self.cur.text in COMPARISONS:
            pos = self.cur.pos
            op = self._advance().text
            e = Binary(pos=pos, op=op, lhs=e, rhs=self.parse_add())
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.cur.text in ("+", "-"):
            pos = self.cur.pos
            op = self._advance().text
            e = Binary(pos=pos, op=op, lhs=e, rhs=self.parse_mul())
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.cur.text in ("*", "/"):
            pos = self.cur.pos
            op = self._advance().text
            e = Binary(pos=pos, op=op, lhs=e, rhs=self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.at("-"):
            pos = self.cur.pos
            self._advance()
            return Unary(pos=pos, op="-", operand=self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        t = self.cur
        if self.at("("):
            self._advance()
            e = self.parse_expr()
            self.eat(")")
            return e
        if t.text in ("true", "false"):
            self._advance()
            return Lit(pos=t.pos, value=t.text == "true")
        if t.kind == "float":
            self._advance()
            return Lit(pos=t.pos, value=float(t.text))
        if t.kind == "int":
            self._advance()
            return Lit(pos=t.pos, value=int(t.text))
        if self.at("float"):
            self._advance()
            self.eat("(")
            e = self.parse_expr()
            self.eat(")")
            return CastFloat(pos=t.pos, operand=e)
        if self.at("pow"):
            self._advance()
            self.eat("(")
            base = self.parse_expr()
            self.eat(",")
            exponent = self.eat_int()
            self.eat(")")
            return Pow(pos=t.pos, base=base, exponent=exponent)
        if t.kind == "name" and t.text not in KEYWORDS:
            self._advance()
            return Name(pos=t.pos, ident=t.text)
        self._fail("an expression")
        raise AssertionError


@dataclass
class _RawProgram:
    decls: list[tuple[str, Token, Domain, Optional[Expr]]]
    body: Body
    source: str


# --- typechecking ---------------------------------------------------------------


class _Checker:
    """Annotates expression domains and enforces the write rules."""

    def __init__(self, raw: _RawProgram):
        self.raw = raw
        self.catalog: VarCatalog
        self.consts: dict[str, tuple[Domain, Any]] = {}
        self.decision_inits: dict[str, Any] = {}
        self.locals: dict[str, Domain] = {}
        # locals are block-scoped for visibility but program-unique by name
        self._scopes: list[set[str]] = [set()]

    def run(self) -> Program:
        # first pass: the catalog, so init literals can resolve enum members
        var_decls: list[VarDecl] = []
        seen: set[str] = set()
        for kw, name_tok, domain, init in self.raw.decls:
            name = name_tok.text
            if name in seen:
                raise DeclTypeError(
                    f"duplicate declaration of {name!r}",
                    name_tok.pos.line, name_tok.pos.col,
                )
            seen.add(name)
            if kw == "const":
                continue
            klass = {"env": VarClass.ENV, "state": VarClass.STATE,
                     "decision": VarClass.DECISION}[kw]
            var_decls.append(VarDecl(name, klass, domain))
        try:
            self.catalog = VarCatalog(var_decls)
        except Exception as exc:
            raise DeclTypeError(str(exc)) from None
        for kw, name_tok, domain, init in self.raw.decls:
            name = name_tok.text
            if kw == "const":
                assert init is not None
                self.consts[name] = (domain, self._literal_value(init, domain))
                continue
            if kw == "decision":
                if init is None:
                    raise DeclTypeError(
                        f"decision variable {name!r} needs an initial value",
                        name_tok.pos.line, name_tok.pos.col,
                    )
                self.decision_inits[name] = self._literal_value(init, domain)
            elif init is not None:
                raise DeclTypeError(
                    f"{kw} variable {name!r} is an input and cannot take "
                    "an initial value",
                    name_tok.pos.line, name_tok.pos.col,
                )
        self._check_block(self.raw.body)
        return Program(
            catalog=self.catalog,
            body=self.raw.body,
            decision_inits=self.decision_inits,
            consts=self.consts,
            locals=self.locals,
            source=self.raw.source,
        )

    def _literal_value(self, expr: Expr, domain: Domain) -> Any:
        checked = self.check_expr(expr, domain)
        if isinstance(checked, Lit):
            return checked.value
        if (isinstance(checked, Unary) and checked.op == "-"
                and isinstance(checked.operand, Lit)):
            return -checked.operand.value
        if isinstance(checked, Name) and checked.resolved == "member":
            return checked.ident
        raise DeclTypeError(
            "initial values must be literals", expr.pos.line, expr.pos.col
        )

    # --- statements

    def _visible(self, name: str) -> bool:
        return any(name in scope for scope in self._scopes)

    def _check_block(self, stmts: Body) -> None:
        self._scopes.append(set())
        try:
            for s in stmts:
                if isinstance(s, Assign):
                    self._check_assign(s)
                elif isinstance(s, LocalDecl):
                    self._check_local(s)
                elif isinstance(s, If):
                    self._expect_bool(s.cond)
                    self._check_block(s.then)
                    self._check_block(s.orelse)
                elif isinstance(s, While):
                    self._expect_bool(s.cond)
                    self._check_block(s.body)
                elif isinstance(s, Return):
                    pass
                else:  # pragma: no cover
                    raise AssertionError(f"unknown statement {s!r}")
        finally:
            self._scopes.pop()

    def _check_assign(self, s: Assign) -> None:
        name = s.target
        if name in self.consts:
            raise DeclTypeError(f"cannot assign to const {name!r}",
                                s.pos.line, s.pos.col)
        if name in self.locals and not self._visible(name):
            raise DeclTypeError(
                f"local {name!r} is not in scope here", s.pos.line, s.pos.col
            )
        if name in self.locals:
            domain = self.locals[name]
        elif name in self.catalog:
            decl = self.catalog.decl(name)
            if decl.klass is not VarClass.DECISION:
                raise EnvWriteError(
                    f"cannot assign to {decl.klass.value} variable {name!r}: "
                    "inputs are read-only within a decision window",
                    s.pos.line, s.pos.col,
                )
            domain = decl.domain
        else:
            raise DeclTypeError(f"assignment to undeclared name {name!r}",
                                s.pos.line, s.pos.col)
        s.expr = self.check_expr(s.expr, domain)

    def _check_local(self, s: LocalDecl) -> None:
        if s.name in self.locals or s.name in self.catalog or s.name in self.consts:
            raise DeclTypeError(f"duplicate declaration of {s.name!r}",
                                s.pos.line, s.pos.col)
        s.init = self.check_expr(s.init, s.domain)
        self.locals[s.name] = s.domain
        self._scopes[-1].add(s.name)

    def _expect_bool(self, cond: Expr) -> None:
        checked = self.check_expr(cond, BoolDomain())
        if not isinstance(checked.domain, BoolDomain):  # pragma: no cover
            raise DeclTypeError("condition must be boolean",
                                cond.pos.line, cond.pos.col)

    # --- expressions

    def check_expr(self, e: Expr, expected: Optional[Domain]) -> Expr:
        """Annotate e.domain, resolving literals against the expected domain."""
        out = self._infer(e, expected)
        if expected is not None and out.domain is not None:
            if not self._same_domain(out.domain, expected):
                raise DeclTypeError(
                    f"expected {expected}, got {out.domain}",
                    e.pos.line, e.pos.col,
                )
        return out

    def _same_domain(self, a: Domain, b: Domain) -> bool:
        return a == b

    def _infer(self, e: Expr, expected: Optional[Domain]) -> Expr:
        if isinstance(e, Lit):
            return self._infer_lit(e, expected)
        if isinstance(e, Name):
            return self._infer_name(e, expected)
        if isinstance(e, Unary):
            return self._infer_unary(e, expected)
        if isinstance(e, Binary):
            return self._infer_binary(e, expected)
        if isinstance(e, CastFloat):
            inner = self._infer(e.operand, None)
            if not isinstance(inner.domain, IntDomain):
                raise DeclTypeError("float() casts integers only",
                                    e.pos.line, e.pos.col)
            e.operand = inner
            e.domain = FloatDomain()
            return e
        if isinstance(e, Pow):
            if e.exponent < 0:
                raise DeclTypeError("pow exponent must be >= 0",
                                    e.pos.line, e.pos.col)
            base = self._infer(e.base, expected)
            if not isinstance(base.domain, (IntDomain, FloatDomain)):
                raise DeclTypeError("pow needs a numeric base",
                                    e.pos.line, e.pos.col)
            return self._expand_pow(base, e.exponent, e.pos)
        raise AssertionError(f"unknown expression {e!r}")  # pragma: no cover

    def _expand_pow(self, base: Expr, exponent: int, pos: Pos) -> Expr:
        # left-folded product, so evaluation order is fixed everywhere
        if exponent == 0:
            one = Lit(pos=pos, value=1.0 if isinstance(base.domain, FloatDomain) else 1)
            one.domain = base.domain
            return one
        out = base
        for _ in range(exponent - 1):
            node = Binary(pos=pos, op="*", lhs=out, rhs=base)
            node.domain = base.domain
            out = node
        return out

    def _infer_lit(self, e: Lit, expected: Optional[Domain]) -> Expr:
        if isinstance(e.value, bool):
            e.domain = BoolDomain()
            return e
        if isinstance(e.value, float):
            e.domain = FloatDomain()
            return e
        # integer literal: adopts the expected integer domain
        if expected is None:
            raise DeclTypeError(
                "integer literal needs a typed context",
                e.pos.line, e.pos.col,
            )
        if not isinstance(expected, IntDomain):
            raise DeclTypeError(
                f"integer literal where {expected} expected",
                e.pos.line, e.pos.col,
            )
        if not expected.lo <= e.value <= expected.hi:
            raise DeclTypeError(
                f"literal {e.value} outside {expected}",
                e.pos.line, e.pos.col,
            )
        e.domain = expected
        return e

    def _infer_name(self, e: Name, expected: Optional[Domain]) -> Expr:
        ident = e.ident
        if ident in self.consts:
            # consts fold into literals: nothing downstream sees them
            domain, value = self.consts[ident]
            lit = Lit(pos=e.pos, value=value)
            lit.domain = domain
            if expected is not None and domain != expected:
                raise DeclTypeError(f"expected {expected}, got {domain}",
                                    e.pos.line, e.pos.col)
            return lit
        if ident in self.locals:
            if not self._visible(ident):
                raise DeclTypeError(f"local {ident!r} is not in scope here",
                                    e.pos.line, e.pos.col)
            e.resolved = "local"
            e.domain = self.locals[ident]
            return e
        if ident in self.catalog:
            e.resolved = "var"
            e.domain = self.catalog.decl(ident).domain
            return e
        if isinstance(expected, EnumDomain) and ident in expected.members:
            e.resolved = "member"
            e.domain = expected
            return e
        raise DeclTypeError(f"unknown name {ident!r}", e.pos.line, e.pos.col)

    def _infer_unary(self, e: Unary, expected: Optional[Domain]) -> Expr:
        if e.op == "!":
            e.operand = self.check_expr(e.operand, BoolDomain())
            e.domain = BoolDomain()
            return e
        if isinstance(e.operand, Lit) and isinstance(e.operand.value, (int, float)) \
                and not isinstance(e.operand.value, bool):
            # fold so that -128 fits int<8> where +128 would not
            folded = Lit(pos=e.pos, value=-e.operand.value)
            return self._infer_lit(folded, expected)
        e.operand = self._infer(e.operand, expected)
        if not isinstance(e.operand.domain, (IntDomain, FloatDomain)):
            raise DeclTypeError("unary '-' needs a numeric operand",
                                e.pos.line, e.pos.col)
        e.domain = e.operand.domain
        return e

    def _infer_binary(self, e: Binary, expected: Optional[Domain]) -> Expr:
        if e.op in LOGIC:
            e.lhs = self.check_expr(e.lhs, BoolDomain())
            e.rhs = self.check_expr(e.rhs, BoolDomain())
            e.domain = BoolDomain()
            return e
        # arithmetic and comparisons: both sides share one numeric/enum domain
        operand_expected = expected if e.op in ARITH else None
        lhs, rhs = self._infer_pair(e.lhs, e.rhs, operand_expected, e.pos)
        e.lhs, e.rhs = lhs, rhs
        side = lhs.domain
        if e.op in ARITH:
            if not isinstance(side, (IntDomain, FloatDomain)):
                raise DeclTypeError(f"'{e.op}' needs numeric operands",
                                    e.pos.line, e.pos.col)
            e.domain = side
            return e
        if e.op in ("==", "!="):
            e.domain = BoolDomain()
            return e
        if isinstance(side, (BoolDomain, EnumDomain)):
            raise DeclTypeError(
                f"'{e.op}' needs ordered operands, got {side}",
                e.pos.line, e.pos.col,
            )
        e.domain = BoolDomain()
        return e

    def _infer_pair(
        self, lhs: Expr, rhs: Expr, expected: Optional[Domain], pos: Pos
    ) -> tuple[Expr, Expr]:
        """Type two operands that must share a domain, letting literals adopt
        the other side's domain."""
        if expected is not None:
            return self.check_expr(lhs, expected), self.check_expr(rhs, expected)
        for first, second, flipped in ((lhs, rhs, False), (rhs, lhs, True)):
            try:
                a = self._infer(first, None)
            except DeclTypeError:
                continue
            b = self.check_expr(second, a.domain)
            return (b, a) if flipped else (a, b)
        raise DeclTypeError("cannot infer operand types", pos.line, pos.col)


def parse_program(text: str) -> Program:
    """Parse and typecheck a decision program."""
    raw = _Parser(text).parse_program()
    return _Checker(raw).run()


def parse_expression(
    text: str,
    catalog: VarCatalog,
    allowed_classes: Optional[set[VarClass]] = None,
    expected: Optional[Domain] = None,
) -> Expr:
    """Parse a standalone expression against a catalog.

    Used for behaviors (decision variables only) and the raw-formula escape
    hatch. No consts or locals are in scope.
    """
    parser = _Parser(text)
    expr = parser.parse_expr()
    if parser.cur.kind != "eof":
        t = parser.cur
        raise DeclSyntaxError(f"trailing input {t.text!r}", t.pos.line, t.pos.col)
    raw = _RawProgram([], [], text)
    checker = _Checker.__new__(_Checker)
    checker.raw = raw
    checker.catalog = catalog
    checker.consts = {}
    checker.decision_inits = {}
    checker.locals = {}
    checker._scopes = [set()]
    checked = checker.check_expr(expr, expected)
    if allowed_classes is not None:
        _enforce_classes(checked, catalog, allowed_classes)
    return checked


def _enforce_classes(e: Expr, catalog: VarCatalog, allowed: set[VarClass]) -> None:
    from ..errors import WrongClass

    if isinstance(e, Name) and e.resolved == "var":
        klass = catalog.decl(e.ident).klass
        if klass not in allowed:
            raise WrongClass(
                f"variable {e.ident!r} has class {klass.value}, "
                f"allowed here: {sorted(c.value for c in allowed)}"
            )
    for child in _children(e):
        _enforce_classes(child, catalog, allowed)


def _children(e: Expr) -> list[Expr]:
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Binary):
        return [e.lhs, e.rhs]
    if isinstance(e, CastFloat):
        return [e.operand]
    if isinstance(e, Pow):
        return [e.base]
    return []


def expr_variables(e: Expr) -> set[str]:
    """Names of catalog variables an expression reads."""
    out: set[str] = set()
    if isinstance(e, Name) and e.resolved == "var":
        out.add(e.ident)
    for child in _children(e):
        out |= expr_variables(child)
    return out
