"""External SMT solver processes: spawning, pooling, verdicts, models.

Scripts travel over the solver's standard input and verdicts come back on
its standard output, so any SMT-LIB v2 solver works; nothing here depends
on the bundled one beyond it being the default command. Idle processes are
reused for sequential queries (framed with reset/echo markers); concurrent
queries each hold their own process, bounded by the pool size.
"""

from __future__ import annotations

import os
import queue
import shlex
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .errors import (
    SolverCrash,
    SolverTimeout,
    SolverUnavailable,
)
from .fp import bits_to_float
from .model import (
    BoolDomain,
    ConcreteState,
    Domain,
    EnumDomain,
    FloatDomain,
    IntDomain,
    VarCatalog,
)
from .smtlib import DEFAULT_LOGIC, FALLBACK_LOGIC, SmtScript, emit_smt
from .sym import SExpr, SymVar

ENV_SOLVER = "DEPOSITION_SOLVER"
ENV_TIMEOUT = "DEPOSITION_SOLVER_TIMEOUT"
ENV_DEBUG_DIR = "DEPOSITION_DEBUG_DIR"

_MARKER = "=deposition-turn-done="


def default_solver_command() -> list[str]:
    return [sys.executable, "-m", "deposition.boxsat"]


@dataclass
class SolverConfig:
    command: list[str] = field(default_factory=default_solver_command)
    timeout_s: float = 60.0
    logic: str = DEFAULT_LOGIC
    debug_dir: Optional[str] = None
    persistent: bool = True
    pool_size: int = 4

    @classmethod
    def from_env(cls) -> "SolverConfig":
        cfg = cls()
        raw = os.environ.get(ENV_SOLVER)
        if raw:
            cfg.command = shlex.split(raw)
            cfg.persistent = False  # unknown solvers get one process per query
        raw_t = os.environ.get(ENV_TIMEOUT)
        if raw_t:
            cfg.timeout_s = float(raw_t)
        cfg.debug_dir = os.environ.get(ENV_DEBUG_DIR) or None
        return cfg


class _Proc:
    """One solver process with a line-reader thread for timeouts."""

    def __init__(self, command: list[str]):
        try:
            self.popen = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise SolverUnavailable(f"cannot spawn solver {command!r}: {exc}") from None
        self.lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self.popen.stdout is not None
        for line in self.popen.stdout:
            self.lines.put(line.rstrip("\n"))
        self.lines.put(None)

    def request(self, text: str, timeout_s: float) -> list[str]:
        assert self.popen.stdin is not None
        try:
            self.popen.stdin.write(f"(reset)\n{text}(echo \"{_MARKER}\")\n")
            self.popen.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverCrash(f"solver process died: {exc}") from None
        out: list[str] = []
        while True:
            try:
                line = self.lines.get(timeout=timeout_s)
            except queue.Empty:
                self.kill()
                raise SolverTimeout(
                    f"solver exceeded {timeout_s}s"
                ) from None
            if line is None:
                stderr = ""
                if self.popen.stderr is not None:
                    try:
                        stderr = self.popen.stderr.read() or ""
                    except Exception:
                        pass
                raise SolverCrash(
                    f"solver exited mid-query (code {self.popen.poll()})",
                    transcript="\n".join(out) + "\n" + stderr,
                )
            if line == _MARKER:
                return out
            out.append(line)

    def alive(self) -> bool:
        return self.popen.poll() is None

    def kill(self) -> None:
        try:
            self.popen.kill()
        except Exception:
            pass


@dataclass
class SolverStats:
    queries: int = 0
    cache_hits: int = 0
    solve_seconds: float = 0.0


class SolverRunner:
    """Verdicts and witness models from an external solver."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig.from_env()
        self._idle: list[_Proc] = []
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(max(1, self.config.pool_size))
        self._cache: dict[str, tuple[str, Optional[str]]] = {}
        self._transcript_n = 0
        self.stats = SolverStats()

    # --- process management

    def _acquire(self) -> _Proc:
        with self._lock:
            while self._idle:
                proc = self._idle.pop()
                if proc.alive():
                    return proc
        return _Proc(self.config.command)

    def _release(self, proc: _Proc) -> None:
        if self.config.persistent and proc.alive():
            with self._lock:
                if len(self._idle) < self.config.pool_size:
                    self._idle.append(proc)
                    return
        proc.kill()

    def close(self) -> None:
        with self._lock:
            for proc in self._idle:
                proc.kill()
            self._idle.clear()

    # --- raw script execution

    def run_script(self, text: str) -> list[str]:
        import time

        self._slots.acquire()
        t0 = time.perf_counter()
        try:
            if self.config.persistent:
                proc = self._acquire()
                try:
                    out = proc.request(text, self.config.timeout_s)
                except Exception:
                    proc.kill()
                    raise
                self._release(proc)
            else:
                out = self._one_shot(text)
            return out
        finally:
            self.stats.queries += 1
            self.stats.solve_seconds += time.perf_counter() - t0
            self._slots.release()

    def _one_shot(self, text: str) -> list[str]:
        try:
            done = subprocess.run(
                self.config.command,
                input=text + "(exit)\n",
                capture_output=True,
                text=True,
                timeout=self.config.timeout_s,
            )
        except subprocess.TimeoutExpired:
            raise SolverTimeout(
                f"solver exceeded {self.config.timeout_s}s"
            ) from None
        except OSError as exc:
            raise SolverUnavailable(
                f"cannot spawn solver {self.config.command!r}: {exc}"
            ) from None
        if done.returncode != 0 and not done.stdout.strip():
            raise SolverCrash(
                f"solver exited {done.returncode}",
                transcript=done.stderr,
            )
        return [ln for ln in done.stdout.splitlines() if ln.strip()]

    # --- verdicts

    def check_script(self, script: SmtScript) -> tuple[str, Optional[str]]:
        """Returns ("sat"|"unsat"|"unknown", raw model line or None)."""
        text = script.render()
        cached = self._cache.get(text)
        if cached is not None:
            self.stats.cache_hits += 1
            return cached
        lines = self._run_with_logic_fallback(text)
        self._save_transcript(text, lines)
        status: Optional[str] = None
        model_parts: list[str] = []
        for line in lines:
            stripped = line.strip()
            if stripped in ("sat", "unsat", "unknown"):
                status = stripped
            elif stripped.startswith("(error") and status in ("unsat", "unknown"):
                continue  # get-value after a non-sat answer
            elif stripped.startswith("(error"):
                raise SolverCrash(
                    f"solver error: {stripped}", transcript="\n".join(lines)
                )
            elif status == "sat":
                model_parts.append(stripped)
        if status is None:
            raise SolverCrash(
                "no sat/unsat/unknown in solver output",
                transcript="\n".join(lines),
            )
        model = " ".join(model_parts) if model_parts else None
        result = (status, model)
        self._cache[text] = result
        return result

    def _run_with_logic_fallback(self, text: str) -> list[str]:
        lines = self.run_script(text)
        logic_error = any(
            ln.strip().startswith("(error") and "logic" in ln for ln in lines
        )
        if logic_error and f"(set-logic {FALLBACK_LOGIC})" not in text:
            text2 = text.replace(
                f"(set-logic {self.config.logic})",
                f"(set-logic {FALLBACK_LOGIC})",
                1,
            )
            return self.run_script(text2)
        return lines

    def _save_transcript(self, script: str, lines: list[str]) -> Optional[str]:
        if not self.config.debug_dir:
            return None
        os.makedirs(self.config.debug_dir, exist_ok=True)
        with self._lock:
            n = self._transcript_n
            self._transcript_n += 1
        base = os.path.join(self.config.debug_dir, f"query{n:05d}")
        with open(base + ".smt2", "w") as fh:
            fh.write(script)
        with open(base + ".out", "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return base

    def check_sat(
        self,
        symbols: Iterable[SymVar],
        assertions: Iterable[SExpr],
        decode: Optional["DecodePlan"] = None,
    ) -> tuple[str, Optional["WitnessModel"]]:
        get_values = decode.symbol_names() if decode else ()
        script = emit_smt(symbols, assertions, get_values, logic=self.config.logic)
        status, raw_model = self.check_script(script)
        witness = None
        if status == "sat" and decode is not None:
            if raw_model is None:
                raise SolverCrash("sat without a model line")
            witness = decode.decode(raw_model)
        return status, witness

    def check_valid(
        self,
        symbols: Iterable[SymVar],
        premises: Iterable[SExpr],
        negated_goal: SExpr,
        decode: Optional["DecodePlan"] = None,
    ) -> tuple[str, Optional["WitnessModel"]]:
        """Validity of (premises -> goal) via satisfiability of the negation.

        Returns ("valid"|"invalid"|"unknown", counterexample model).
        """
        status, witness = self.check_sat(
            symbols, list(premises) + [negated_goal], decode
        )
        if status == "sat":
            return "invalid", witness
        if status == "unsat":
            return "valid", None
        return "unknown", None


# --- witness decoding -----------------------------------------------------------------

@dataclass
class WitnessModel:
    """A concrete assignment extracted from a solver model.

    ``inputs`` covers the catalog's input variables; ``outputs`` optionally
    carries decision values the solver chose for the behavior symbols.
    """

    inputs: ConcreteState
    outputs: dict[str, Any] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, WitnessModel)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
        )


@dataclass
class DecodePlan:
    """Which symbols to read back and how to type their values."""

    catalog: VarCatalog
    input_symbols: dict[str, str]  # var name -> symbol name
    output_symbols: dict[str, str] = field(default_factory=dict)

    def symbol_names(self) -> tuple[str, ...]:
        return tuple(self.input_symbols.values()) + tuple(
            self.output_symbols.values()
        )

    def decode(self, raw_model: str) -> WitnessModel:
        from .boxsat.smtread import SmtReadError, parse_sexps

        try:
            (pairs,) = parse_sexps(raw_model)
        except (SmtReadError, ValueError):
            raise SolverCrash(f"unparseable model {raw_model!r}") from None
        values: dict[str, Any] = {}
        for pair in pairs:
            if not (isinstance(pair, list) and len(pair) == 2):
                raise SolverCrash(f"unparseable model pair {pair!r}")
            name = pair[0] if isinstance(pair[0], str) else None
            if name is None:
                raise SolverCrash(f"unparseable model pair {pair!r}")
            values[name.strip("|")] = pair[1]
        inputs: dict[str, Any] = {}
        for var, symbol in self.input_symbols.items():
            if symbol not in values:
                raise SolverCrash(f"model misses {symbol!r}")
            inputs[var] = decode_value(self.catalog.decl(var).domain, values[symbol])
        outputs: dict[str, Any] = {}
        for var, symbol in self.output_symbols.items():
            if symbol in values:
                outputs[var] = decode_value(
                    self.catalog.decl(var).domain, values[symbol]
                )
        return WitnessModel(
            inputs=ConcreteState(self.catalog, inputs),
            outputs=outputs,
        )


def _pattern_of(token: Any) -> int:
    if isinstance(token, str):
        if token.startswith("#x"):
            return int(token[2:], 16)
        if token.startswith("#b"):
            return int(token[2:], 2)
    if (isinstance(token, list) and len(token) == 3 and token[0] == "_"
            and isinstance(token[1], str) and token[1].startswith("bv")):
        return int(token[1][2:])
    if isinstance(token, list) and len(token) == 4 and token[0] == "fp":
        bits = 0
        for part, width in zip(token[1:], (1, 11, 52)):
            if part.startswith("#b"):
                bits = (bits << width) | int(part[2:], 2)
            elif part.startswith("#x"):
                bits = (bits << width) | int(part[2:], 16)
            else:
                raise SolverCrash(f"unparseable fp literal {token!r}")
        return bits
    raise SolverCrash(f"unparseable model value {token!r}")


def decode_value(domain: Domain, token: Any) -> Any:
    if isinstance(domain, BoolDomain):
        if token == "true":
            return True
        if token == "false":
            return False
        raise SolverCrash(f"expected boolean, got {token!r}")
    if isinstance(domain, FloatDomain):
        return bits_to_float(_pattern_of(token))
    pattern = _pattern_of(token)
    if isinstance(domain, IntDomain):
        if domain.signed and pattern >= 1 << (domain.width - 1):
            pattern -= 1 << domain.width
        return pattern
    assert isinstance(domain, EnumDomain)
    if pattern >= len(domain.members):
        raise SolverCrash(
            f"enum code {pattern} outside {domain}"
        )
    return domain.members[pattern]


# --- symbolic-execution feasibility hook -----------------------------------------

class SolverFeasibility:
    """FeasibilityChecker backed by the external solver, with a result cache."""

    def __init__(self, runner: SolverRunner):
        self.runner = runner

    def feasible(self, formula: SExpr, symbols: tuple[SymVar, ...]) -> str:
        try:
            status, _ = self.runner.check_sat(symbols, [formula])
        except SolverTimeout:
            return "unknown"
        return status
