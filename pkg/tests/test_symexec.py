import itertools

import pytest

from deposition.boxsat.core import eval_concrete
from deposition.errors import (
    ArithmeticFault,
    BudgetExhausted,
    SolverUnavailable,
    UnknownVariable,
)
from deposition.formula import Eq, Free, Member, mk_relaxation
from deposition.lang import StepBudget, interpret, parse_program
from deposition.model import ConcreteState, EnumDomain, IntDomain, restrict
from deposition.solver import SolverFeasibility
from deposition.sym import SVar, SymVar, BVSort, F64, SArith, SConst, free_vars
from deposition.symexec import (
    SymState,
    SymbolicEngine,
    concrete_env,
    feasibility,
    input_symvars,
    ref_closure,
    sym_execute,
)


def free_all(program):
    return mk_relaxation(
        program.catalog, {n: Free() for n in program.catalog.input_names}
    )


@pytest.fixture(scope="module")
def checker(runner):
    return SolverFeasibility(runner)


class TestPathCounts:
    def test_lpr_all_free_has_four_paths(self, lpr_program, checker):
        logic = sym_execute(lpr_program, free_all(lpr_program),
                            StepBudget(100), checker)
        assert logic.ct == 4

    def test_signal_family_three_paths(self, policies, crash_trace, checker):
        from deposition.model import state_at

        program = policies["standard"]
        key = restrict(state_at(crash_trace, 4), "input")
        atoms = {n: Eq(key[n]) for n in program.catalog.input_names}
        atoms["agent1_signal"] = Member(("LEFT", "STRAIGHT", "RIGHT"))
        logic = sym_execute(program, mk_relaxation(program.catalog, atoms),
                            StepBudget(100), checker)
        assert logic.ct == 3

    def test_concrete_precondition_single_path(self, lpr_program, checker):
        pre = mk_relaxation(lpr_program.catalog, {
            "front": Eq(True), "t": Eq(5), "tb_lng": Eq(0),
        })
        logic = sym_execute(lpr_program, pre, StepBudget(100), checker)
        assert logic.ct == 1

    def test_contradicted_branch_pruned(self, lpr_program, checker):
        pre = mk_relaxation(lpr_program.catalog, {
            "front": Free(), "t": Free(), "tb_lng": Eq(3),
        })
        logic = sym_execute(lpr_program, pre, StepBudget(100), checker)
        assert logic.ct == 3  # the tb_lng < 0 leaf is infeasible

    def test_deferred_mode_matches_eager(self, lpr_program, checker):
        pre = mk_relaxation(lpr_program.catalog, {
            "front": Free(), "t": Free(), "tb_lng": Eq(3),
        })
        eager = sym_execute(lpr_program, pre, StepBudget(100), checker)
        deferred = sym_execute(lpr_program, pre, StepBudget(100), checker,
                               mode="deferred")
        assert deferred.ct == eager.ct
        assert len(deferred.pruned) == 1

    def test_missing_checker_is_unavailable(self, lpr_program):
        with pytest.raises(SolverUnavailable):
            sym_execute(lpr_program, free_all(lpr_program), StepBudget(100),
                        None)  # type: ignore[arg-type]


class TestLogicProperties:
    def test_paths_are_mutually_exclusive(self, lpr_program, checker, runner):
        logic = sym_execute(lpr_program, free_all(lpr_program),
                            StepBudget(100), checker)
        symbols = tuple(logic.input_vars.values())
        for a, b in itertools.combinations(logic.paths, 2):
            from deposition.sym import s_and

            verdict = feasibility(s_and(a.constraint, b.constraint),
                                  symbols, checker)
            assert verdict == "unsat"

    def test_coverage_and_agreement_with_interpreter(self, lpr_program, checker):
        """Every input satisfies exactly one path constraint, and that path's
        bindings pin the decisions the interpreter computes."""
        logic = sym_execute(lpr_program, free_all(lpr_program),
                            StepBudget(100), checker)
        cat = lpr_program.catalog
        for front, t, tb in itertools.product(
            (False, True), (-2, 0, 3, 9), (-1, 0, 5)
        ):
            inputs = ConcreteState(cat, {"front": front, "t": t, "tb_lng": tb})
            env = concrete_env(cat, inputs, logic.input_vars)
            matching = [
                p for p in logic.paths if eval_concrete(p.constraint, env)
            ]
            assert len(matching) == 1
            final, steps = interpret(lpr_program, inputs)
            path = matching[0]
            assert path.steps == steps  # step accounting is engine-identical
            state = SymState(bindings={}, path=[])
            for name, binding in path.behavior_bindings.items():
                # binding is (= out terminal); evaluate the terminal side
                terminal = binding.rhs
                value = eval_concrete(terminal, env)
                domain = cat.decl(name).domain
                if isinstance(domain, IntDomain):
                    value = domain.wrap(value)
                elif isinstance(domain, EnumDomain):
                    value = domain.members[value]
                assert value == final[name] or (
                    value != value and final[name] != final[name]
                )
            _ = state

    def test_precondition_propagates_into_every_path(self, policies,
                                                     crash_trace, checker):
        from deposition.model import state_at

        program = policies["standard"]
        key = restrict(state_at(crash_trace, 4), "input")
        atoms = {n: Eq(key[n]) for n in program.catalog.input_names}
        atoms["agent1_signal"] = Member(("LEFT", "STRAIGHT", "RIGHT"))
        pre = mk_relaxation(program.catalog, atoms)
        logic = sym_execute(program, pre, StepBudget(100), checker)
        cat = program.catalog
        # a state violating the precondition satisfies no path constraint
        outside = dict(key.values)
        outside["agent1_pos_x"] = 9.0
        env = concrete_env(cat, ConcreteState(cat, outside), logic.input_vars)
        assert not any(eval_concrete(p.constraint, env) for p in logic.paths)


class TestBudgetsAndFaults:
    def test_budget_exhausted_reports_path(self, checker):
        src = """
        env n: int<8>;
        decision d: int<8> = 0;
        while (d < n) bound 100 { d := d + 1; }
        """
        program = parse_program(src)
        pre = mk_relaxation(program.catalog, {"n": Eq(50)})
        with pytest.raises(BudgetExhausted) as err:
            sym_execute(program, pre, StepBudget(20), checker)
        assert err.value.path_id is not None

    def test_feasible_division_by_zero_faults(self, checker):
        src = """
        env x: int<8>;
        env y: int<8>;
        decision d: int<8> = 0;
        d := x / y;
        """
        program = parse_program(src)
        pre = mk_relaxation(program.catalog, {"x": Eq(6), "y": Free()})
        with pytest.raises(ArithmeticFault):
            sym_execute(program, pre, StepBudget(100), checker)
        # a nonzero equality on the divisor makes it safe
        safe = mk_relaxation(program.catalog, {"x": Eq(6), "y": Eq(2)})
        logic = sym_execute(program, safe, StepBudget(100), checker)
        assert logic.ct == 1

    def test_guarded_division_by_branch_is_safe(self, checker):
        src = """
        env x: int<8>;
        env y: int<8>;
        decision d: int<8> = 0;
        if (y == 0) { d := 0; } else { d := x / y; }
        """
        program = parse_program(src)
        pre = mk_relaxation(program.catalog, {"x": Eq(6), "y": Free()})
        logic = sym_execute(program, pre, StepBudget(100), checker)
        assert logic.ct == 2


class TestRefClosure:
    def test_direct_references(self):
        a3 = SymVar("a3", BVSort(8, True))
        a5 = SymVar("a5", BVSort(8, True))
        expr = SArith("+", SArith("*", SConst(BVSort(8, True), 2), SVar(a3),
                                  sort=a3.sort),
                      SVar(a5), sort=a3.sort)
        state = SymState(bindings={"x": expr}, path=[])
        assert ref_closure(state, "x") == {a3, a5}

    def test_concrete_binding_is_empty(self):
        state = SymState(bindings={"x": SConst(F64, 4.0)}, path=[])
        assert ref_closure(state, "x") == set()

    def test_chained_definitions(self):
        a1 = SymVar("a1", BVSort(8, True))
        a2 = SymVar("a2", BVSort(8, True))
        state = SymState(
            bindings={"x": SVar(a2)},
            path=[],
            derived={a2: SArith("+", SVar(a1), SConst(BVSort(8, True), 1),
                                sort=a1.sort)},
        )
        assert ref_closure(state, "x") == {a2, a1}

    def test_unbound_variable(self):
        state = SymState(bindings={}, path=[])
        with pytest.raises(UnknownVariable):
            ref_closure(state, "ghost")

    def test_behavior_outputs_are_derived_symbols(self, lpr_program, checker):
        logic = sym_execute(lpr_program, free_all(lpr_program), StepBudget(100),
                            checker, behavior_vars=("a_min",))
        assert set(logic.output_vars) == {"a_min"}
        out = logic.output_vars["a_min"]
        assert out.name == ".out.a_min"
        for path in logic.paths:
            assert out in free_vars(path.formula())
