import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deposition.errors import (
    ArithmeticFault,
    BudgetExhausted,
    DeclSyntaxError,
    DeclTypeError,
    EnvWriteError,
    MissingVariable,
    UnboundedLoopError,
)
from deposition.lang import StepBudget, interpret, parse_program
from deposition.model import ConcreteState, VarClass, restrict


def lpr_inputs(program, **vals):
    values = {"front": False, "t": 5, "tb_lng": 0}
    values.update(vals)
    return ConcreteState(program.catalog, values)


class TestParsing:
    def test_lpr_has_four_leaves(self, lpr_program):
        assert lpr_program.leaf_count_hint() == 4

    def test_lpr_classes(self, lpr_program):
        cat = lpr_program.catalog
        assert cat.decl("front").klass is VarClass.ENV
        assert cat.decl("t").klass is VarClass.STATE
        assert set(cat.decision_names) == {"active", "a_min", "a_max"}

    def test_env_write_rejected(self):
        src = """
        env x: bool;
        decision d: bool = false;
        x := true;
        """
        with pytest.raises(EnvWriteError):
            parse_program(src)

    def test_state_write_rejected(self):
        src = """
        env e: bool;
        state s: int<4>;
        decision d: bool = false;
        s := 1;
        """
        with pytest.raises(EnvWriteError):
            parse_program(src)

    def test_unbounded_loop_rejected(self):
        src = """
        env x: int<8>;
        decision d: int<8> = 0;
        while (x > d) { d := d + 1; }
        """
        with pytest.raises(UnboundedLoopError):
            parse_program(src)

    def test_syntax_error_carries_position(self):
        with pytest.raises(DeclSyntaxError) as err:
            parse_program("env x: bool;\ndecision d: bool = false;\nd := ;\n")
        assert err.value.line == 3

    def test_decision_needs_initial_value(self):
        with pytest.raises(DeclTypeError):
            parse_program("env x: bool;\ndecision d: bool;\nd := x;")

    def test_input_cannot_take_initial_value(self):
        with pytest.raises(DeclTypeError):
            parse_program("env x: bool = true;\ndecision d: bool = false;")

    def test_mixed_int_float_arithmetic_rejected(self):
        src = """
        env x: int<8>;
        env y: float;
        decision d: float = 0.0;
        d := y + x;
        """
        with pytest.raises(DeclTypeError):
            parse_program(src)

    def test_cast_bridges_int_to_float(self):
        src = """
        env x: int<8>;
        env y: float;
        decision d: float = 0.0;
        d := y + float(x);
        """
        parse_program(src)

    def test_enum_has_no_ordering(self):
        src = """
        env s: enum { A, B };
        decision d: bool = false;
        d := s < B;
        """
        with pytest.raises(DeclTypeError):
            parse_program(src)

    def test_unknown_name(self):
        with pytest.raises(DeclTypeError):
            parse_program("decision d: bool = false;\nd := ghost;")

    def test_duplicate_declaration(self):
        with pytest.raises(DeclTypeError):
            parse_program("env x: bool;\nenv x: bool;\ndecision d: bool = false;")

    def test_type_alias(self):
        src = """
        type Signal = enum { L, S, R };
        env sig: Signal;
        decision d: bool = false;
        d := sig == R;
        """
        program = parse_program(src)
        assert program.catalog.decl("sig").domain.members == ("L", "S", "R")

    def test_int_literal_needs_width_context(self):
        with pytest.raises(DeclTypeError):
            parse_program("decision d: bool = false;\nd := 1 == 1;")

    def test_literal_outside_width_rejected(self):
        with pytest.raises(DeclTypeError):
            parse_program("env x: int<4>;\ndecision d: bool = false;\nd := x == 99;")

    def test_negative_literal_fills_signed_range(self):
        parse_program(
            "env x: int<8>;\ndecision d: bool = false;\nd := x == -128;"
        )


class TestInterpret:
    def test_outside_blame_window_means_no_guard(self, lpr_program):
        final, _ = interpret(lpr_program, lpr_inputs(lpr_program, tb_lng=-1))
        assert final["active"] is False
        assert final["a_min"] == 0.0 and final["a_max"] == 0.0

    def test_front_car_gets_max_brake_bound(self, lpr_program):
        # hand evaluation: front branch sets a_min to -A_MAX_BRAKE = -8.0
        final, _ = interpret(lpr_program, lpr_inputs(lpr_program, front=True))
        assert final["active"] is True
        assert final["a_min"] == -8.0

    def test_rear_car_with_response_time_caps_accel(self, lpr_program):
        # t - RHO > tb_lng with t=9, RHO=2, tb_lng=0
        final, _ = interpret(lpr_program, lpr_inputs(lpr_program, t=9))
        assert final["a_max"] == 3.5

    def test_rear_car_after_response_time_must_brake(self, lpr_program):
        final, _ = interpret(lpr_program, lpr_inputs(lpr_program, t=1))
        assert final["a_max"] == -4.0

    def test_identity_assignment_single_step(self):
        program = parse_program(
            "env e1: int<8>;\ndecision d: int<8> = 0;\nd := e1;"
        )
        inputs = ConcreteState(program.catalog, {"e1": 5})
        final, steps = interpret(program, inputs)
        assert final["d"] == 5
        assert steps == 1

    def test_environment_constancy(self, lpr_program):
        inputs = lpr_inputs(lpr_program, t=7, tb_lng=2)
        final, _ = interpret(lpr_program, inputs)
        assert restrict(final, "input") == inputs

    def test_determinism(self, lpr_program):
        inputs = lpr_inputs(lpr_program, front=True, t=3)
        a = interpret(lpr_program, inputs)
        b = interpret(lpr_program, inputs)
        assert a == b

    def test_missing_input_rejected(self, lpr_program):
        with pytest.raises(MissingVariable):
            interpret(
                lpr_program,
                ConcreteState(lpr_program.catalog, {"front": True}),
            )

    def test_budget_exhausted(self):
        src = """
        env n: int<8>;
        decision d: int<8> = 0;
        while (d < n) bound 100 { d := d + 1; }
        """
        program = parse_program(src)
        inputs = ConcreteState(program.catalog, {"n": 100})
        with pytest.raises(BudgetExhausted):
            interpret(program, inputs, StepBudget(10))

    def test_loop_bound_caps_iterations(self):
        src = """
        env n: int<8>;
        decision d: int<8> = 0;
        while (d < n) bound 3 { d := d + 1; }
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"n": 100}))
        assert final["d"] == 3

    def test_int_wrap_two_complement(self):
        src = """
        env x: int<8>;
        decision d: int<8> = 0;
        d := x + 1;
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 127}))
        assert final["d"] == -128

    def test_unsigned_wrap(self):
        src = """
        env x: uint<4>;
        decision d: uint<4> = 0;
        d := x + 1;
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 15}))
        assert final["d"] == 0

    def test_int_division_truncates_toward_zero(self):
        src = """
        env x: int<8>;
        env y: int<8>;
        decision d: int<8> = 0;
        d := x / y;
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": -7, "y": 2}))
        assert final["d"] == -3

    def test_int_division_by_zero_faults(self):
        src = """
        env x: int<8>;
        decision d: int<8> = 0;
        d := x / d;
        """
        program = parse_program(src)
        with pytest.raises(ArithmeticFault):
            interpret(program, ConcreteState(program.catalog, {"x": 1}))

    def test_float_division_follows_ieee(self):
        src = """
        env x: float;
        env y: float;
        decision d: float = 0.0;
        d := x / y;
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 1.0, "y": 0.0}))
        assert final["d"] == float("inf")
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 0.0, "y": 0.0}))
        assert final["d"] != final["d"]  # NaN

    def test_pow_expands_to_left_folded_product(self):
        src = """
        env x: float;
        decision d: float = 0.0;
        decision one: float = 0.0;
        d := pow(x, 3);
        one := pow(x, 0);
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 1.1}))
        assert final["d"] == (1.1 * 1.1) * 1.1
        assert final["one"] == 1.0

    def test_local_not_visible_outside_its_block(self):
        src = """
        env x: bool;
        decision d: int<4> = 0;
        if (x) { local tmp: int<4> = 1; }
        d := tmp;
        """
        with pytest.raises(DeclTypeError):
            parse_program(src)

    def test_locals_are_scratch_not_outputs(self):
        src = """
        env x: int<8>;
        decision d: int<8> = 0;
        local tmp: int<8> = x + 1;
        d := tmp * tmp;
        """
        program = parse_program(src)
        final, _ = interpret(program, ConcreteState(program.catalog, {"x": 3}))
        assert final["d"] == 16
        assert "tmp" not in final.values

    @given(
        front=st.booleans(),
        t=st.integers(min_value=-20, max_value=20),
        tb=st.integers(min_value=-20, max_value=20),
    )
    @settings(max_examples=80, deadline=None)
    def test_interpret_is_pure(self, lpr_program, front, t, tb):
        inputs = lpr_inputs(lpr_program, front=front, t=t, tb_lng=tb)
        first = interpret(lpr_program, inputs)
        second = interpret(lpr_program, inputs)
        assert first == second
        assert restrict(first[0], "env") == restrict(inputs, "env")
