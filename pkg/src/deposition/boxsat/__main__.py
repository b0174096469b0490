"""SMT-LIB session over stdin/stdout.

Supports one-shot scripts and incremental sessions: assertions accumulate
until (check-sat); (get-value ...) reads back the last model; (reset) clears
everything; (echo "...") round-trips markers, which is how the client side
frames responses when reusing one process for many scripts.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Optional

from ..fp import float_to_bits
from ..sym import BOOL, F64, SymVar
from .core import SolveResult, solve
from .smtread import (
    SExp,
    SmtReadError,
    SymbolTable,
    parse_sexps,
    parse_sort,
    scan_float_views,
    split_complete,
    translate,
    _unquote,
)


class Session:
    def __init__(self, max_boxes: int):
        self.max_boxes = max_boxes
        self.reset()

    def reset(self) -> None:
        self.table = SymbolTable()
        self.raw_asserts: list[SExp] = []
        self.model: Optional[dict[str, Any]] = None
        self.last_status: Optional[str] = None

    def handle(self, sexp: SExp) -> list[str]:
        if not isinstance(sexp, list) or not sexp or not isinstance(sexp[0], str):
            raise SmtReadError("expected a command")
        cmd = sexp[0]
        if cmd in ("set-logic", "set-option", "set-info"):
            return []
        if cmd == "declare-const" and len(sexp) == 3:
            self.table.declare(_unquote(sexp[1]), parse_sort(sexp[2]))
            return []
        if cmd == "declare-fun" and len(sexp) == 4 and sexp[2] == []:
            self.table.declare(_unquote(sexp[1]), parse_sort(sexp[3]))
            return []
        if cmd == "assert" and len(sexp) == 2:
            self.raw_asserts.append(sexp[1])
            return []
        if cmd == "check-sat" and len(sexp) == 1:
            return [self._check_sat()]
        if cmd == "get-value" and len(sexp) == 2:
            return [self._get_value(sexp[1])]
        if cmd == "echo" and len(sexp) == 2:
            text = sexp[1]
            if text.startswith('"') and text.endswith('"'):
                text = text[1:-1].replace('""', '"')
            return [text]
        if cmd == "reset" and len(sexp) == 1:
            self.reset()
            return []
        if cmd == "exit":
            raise SystemExit(0)
        raise SmtReadError(f"unsupported command {cmd!r}")

    def _check_sat(self) -> str:
        for term in self.raw_asserts:
            scan_float_views(term, self.table)
        assertions = [translate(t, self.table) for t in self.raw_asserts]
        for a in assertions:
            if a.sort != BOOL:
                raise SmtReadError("assertion is not boolean")
        symbols = self.table.symbols()
        result: SolveResult = solve(symbols, assertions, max_boxes=self.max_boxes)
        self.last_status = result.status
        if result.status == "sat" and result.model is not None:
            self.model = {var.name: value for var, value in result.model.items()}
        else:
            self.model = None
        return result.status

    def _get_value(self, targets: SExp) -> str:
        if self.model is None:
            raise SmtReadError("no model available")
        if not isinstance(targets, list):
            raise SmtReadError("get-value needs a term list")
        parts = []
        for t in targets:
            if not isinstance(t, str):
                raise SmtReadError("get-value supports plain symbols only")
            name = _unquote(t)
            if name not in self.model:
                raise SmtReadError(f"no value for {t!r}")
            parts.append(f"({t} {self._render(name, self.model[name])})")
        return "(" + " ".join(parts) + ")"

    def _render(self, name: str, value: Any) -> str:
        var: SymVar = self.table.symvar(name)
        if var.sort == BOOL:
            return "true" if value else "false"
        if var.sort == F64:
            return f"#x{float_to_bits(value):016x}"
        width = var.sort.width
        if width % 4 == 0:
            return f"#x{value:0{width // 4}x}"
        return f"#b{value:0{width}b}"


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="deposition-boxsat",
        description="SMT-LIB solver for the quantifier-free float+bitvector "
                    "fragment, deciding by interval splitting over the finite "
                    "value spaces",
    )
    parser.add_argument("--max-boxes", type=int, default=120_000,
                        help="search budget before answering unknown")
    args = parser.parse_args(argv)

    session = Session(max_boxes=args.max_boxes)
    buffer = ""
    stdin = sys.stdin
    while True:
        chunk = stdin.readline()
        if chunk == "":
            break
        buffer += chunk
        complete, buffer = split_complete(buffer)
        for text in complete:
            try:
                sexps = parse_sexps(text)
            except SmtReadError as exc:
                print(f'(error "{exc}")', flush=True)
                continue
            for sexp in sexps:
                try:
                    for line in session.handle(sexp):
                        print(line, flush=True)
                except SystemExit:
                    return 0
                except SmtReadError as exc:
                    print(f'(error "{exc}")', flush=True)
                except Exception as exc:  # keep the session alive
                    print(f'(error "internal: {exc}")', flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
