import os
import sys

import pytest

from deposition.errors import SolverCrash, SolverTimeout, SolverUnavailable
from deposition.fp import bits_to_float
from deposition.model import (
    BoolDomain,
    EnumDomain,
    FloatDomain,
    IntDomain,
    VarCatalog,
    VarClass,
    VarDecl,
)
from deposition.solver import (
    DecodePlan,
    SolverConfig,
    SolverRunner,
    decode_value,
    default_solver_command,
)
from deposition.sym import (
    BVSort,
    F64,
    SCmp,
    SConst,
    SVar,
    SymVar,
    bits_eq,
    s_and,
    s_not,
)


def catalog():
    return VarCatalog([
        VarDecl("pos", VarClass.ENV, FloatDomain()),
        VarDecl("speed", VarClass.ENV, IntDomain(8)),
        VarDecl("sig", VarClass.ENV, EnumDomain(("L", "S", "R"))),
        VarDecl("go", VarClass.DECISION, BoolDomain()),
    ])


def simple_query(runner: SolverRunner):
    pos = SymVar("pos", F64)
    formula = s_and(
        SCmp(">", SVar(pos), SConst(F64, 1.0)),
        SCmp("<", SVar(pos), SConst(F64, 1.5)),
        s_not(bits_eq(pos, 1.25)),
    )
    plan = DecodePlan(catalog(), input_symbols={"pos": "pos"})
    return runner.check_sat([pos], [formula], plan)


class TestRunner:
    def test_sat_with_bit_exact_model(self):
        runner = SolverRunner(SolverConfig())
        try:
            status, witness = simple_query(runner)
            assert status == "sat"
            v = witness.inputs["pos"]
            assert 1.0 < v < 1.5 and v != 1.25
        finally:
            runner.close()

    def test_one_shot_mode_agrees(self):
        runner = SolverRunner(SolverConfig(persistent=False))
        try:
            status, witness = simple_query(runner)
            assert status == "sat"
        finally:
            runner.close()

    def test_cache_dedupes_identical_scripts(self):
        runner = SolverRunner(SolverConfig())
        try:
            simple_query(runner)
            before = runner.stats.queries
            simple_query(runner)
            assert runner.stats.queries == before
            assert runner.stats.cache_hits >= 1
        finally:
            runner.close()

    def test_unavailable_solver(self):
        runner = SolverRunner(SolverConfig(
            command=["/nonexistent/solver-binary"], persistent=False,
        ))
        with pytest.raises(SolverUnavailable):
            simple_query(runner)

    def test_crashing_solver(self):
        runner = SolverRunner(SolverConfig(
            command=[sys.executable, "-c", "import sys; sys.exit(3)"],
            persistent=False,
        ))
        with pytest.raises(SolverCrash):
            simple_query(runner)

    def test_timeout(self):
        runner = SolverRunner(SolverConfig(
            command=[sys.executable, "-c", "import time; time.sleep(60)"],
            timeout_s=0.3,
            persistent=False,
        ))
        with pytest.raises(SolverTimeout):
            simple_query(runner)

    def test_timeout_persistent_kills_process(self):
        runner = SolverRunner(SolverConfig(
            command=[sys.executable, "-c",
                     "import time, sys; sys.stdout.write('');time.sleep(60)"],
            timeout_s=0.3,
            persistent=True,
        ))
        try:
            with pytest.raises(SolverTimeout):
                simple_query(runner)
        finally:
            runner.close()

    def test_transcripts_written(self, tmp_path):
        debug = str(tmp_path / "transcripts")
        runner = SolverRunner(SolverConfig(debug_dir=debug))
        try:
            simple_query(runner)
        finally:
            runner.close()
        files = sorted(os.listdir(debug))
        assert any(f.endswith(".smt2") for f in files)
        assert any(f.endswith(".out") for f in files)

    def test_check_valid_inverts(self):
        runner = SolverRunner(SolverConfig())
        try:
            pos = SymVar("pos", F64)
            tautology_negated = s_not(
                s_not(SCmp(">", SVar(pos), SConst(F64, 1.0)))
            )  # not(pos > 1) is satisfiable, so (premises -> pos>1) is invalid
            status, model = runner.check_valid(
                [pos], [], negated_goal=s_not(SCmp(">", SVar(pos), SConst(F64, 1.0))),
                decode=DecodePlan(catalog(), input_symbols={"pos": "pos"}),
            )
            assert status == "invalid"
            assert model.inputs["pos"] <= 1.0 or model.inputs["pos"] != model.inputs["pos"]
            # with the premise pos > 2, pos > 1 follows
            status, _ = runner.check_valid(
                [pos], [SCmp(">", SVar(pos), SConst(F64, 2.0))],
                negated_goal=s_not(SCmp(">", SVar(pos), SConst(F64, 1.0))),
            )
            assert status == "valid"
            _ = tautology_negated
        finally:
            runner.close()


class TestLogicFallback:
    def test_unknown_logic_retries_with_all(self):
        calls = []

        class StubRunner(SolverRunner):
            def run_script(self, text):
                calls.append(text)
                if "(set-logic QF_FPBV)" in text:
                    return ['(error "unknown logic QF_FPBV")']
                return ["sat"]

        runner = StubRunner(SolverConfig())
        pos = SymVar("pos", F64)
        status, _ = runner.check_sat(
            [pos], [SCmp(">", SVar(pos), SConst(F64, 1.0))]
        )
        assert status == "sat"
        assert len(calls) == 2
        assert "(set-logic ALL)" in calls[1]


class TestDecoding:
    def test_value_decoding(self):
        c = catalog()
        assert decode_value(c.decl("go").domain, "true") is True
        assert decode_value(c.decl("speed").domain, "#xff") == -1
        assert decode_value(c.decl("sig").domain, "#b10") == "R"
        nan_bits = 0x7FF8000000000001
        decoded = decode_value(c.decl("pos").domain, f"#x{nan_bits:016x}")
        from deposition.fp import float_to_bits

        assert float_to_bits(decoded) == nan_bits

    def test_fp_triplet_form(self):
        c = catalog()
        v = decode_value(c.decl("pos").domain,
                         ["fp", "#b0", "#b01111111111", "#x8000000000000"])
        assert v == 1.5

    def test_default_command_is_the_bundled_solver(self):
        cmd = default_solver_command()
        assert cmd[0] == sys.executable
        assert cmd[-1] == "deposition.boxsat"
        _ = bits_to_float
