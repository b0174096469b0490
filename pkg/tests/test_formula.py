import itertools
import json

import pytest

from deposition.errors import (
    DomainViolation,
    FactualOutsideRelaxation,
    KeyframeMismatch,
    MissingVariable,
    NotARelaxation,
    NotTight,
    QueryFormatError,
    WrongClass,
)
from deposition.formula import (
    AtomicConstraint,
    Eq,
    Free,
    Member,
    Range,
    behavior_from_text,
    eval_formula,
    mk_relaxation,
    parse_query_json,
    predicate_to_json,
    puncture,
    relaxation_from_expr,
    relaxation_to_json,
    tight_relaxation,
    validate_factual_scenario,
)
from deposition.fp import bits_to_float
from deposition.model import (
    BoolDomain,
    ConcreteState,
    EnumDomain,
    FloatDomain,
    IntDomain,
    VarCatalog,
    VarClass,
    VarDecl,
    restrict,
    state_at,
)


def cat():
    return VarCatalog([
        VarDecl("agent1_pos_x", VarClass.ENV, FloatDomain()),
        VarDecl("agent1_signal", VarClass.ENV, EnumDomain(("LEFT", "STRAIGHT", "RIGHT"))),
        VarDecl("arrived_first", VarClass.STATE, BoolDomain()),
        VarDecl("move", VarClass.DECISION, BoolDomain()),
    ])


def inputs(c, pos=1.376, sig="RIGHT", first=False):
    return ConcreteState(c, {
        "agent1_pos_x": pos, "agent1_signal": sig, "arrived_first": first,
    })


def factual_relaxation(c):
    return mk_relaxation(c, {
        "agent1_pos_x": Eq(1.376),
        "agent1_signal": Eq("RIGHT"),
        "arrived_first": Eq(False),
    })


class TestRelaxation:
    def test_factual_constraint_from_log(self):
        rel = factual_relaxation(cat())
        assert rel.is_tight()
        assert eval_formula(rel, inputs(cat()))

    def test_range_relaxation(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Range(1.0, 1.5),
            "agent1_signal": Eq("RIGHT"),
            "arrived_first": Eq(False),
        })
        assert eval_formula(rel, inputs(c, pos=1.25))
        assert not eval_formula(rel, inputs(c, pos=1.6))
        assert not rel.is_tight()

    def test_every_input_needs_exactly_one_atom(self):
        c = cat()
        with pytest.raises(NotARelaxation):
            mk_relaxation(c, {"agent1_pos_x": Eq(1.0)})
        with pytest.raises(NotARelaxation):
            mk_relaxation(c, [
                AtomicConstraint("agent1_pos_x", Eq(1.0)),
                AtomicConstraint("agent1_pos_x", Eq(2.0)),
                AtomicConstraint("agent1_signal", Free()),
                AtomicConstraint("arrived_first", Free()),
            ])

    def test_decision_constraint_rejected(self):
        with pytest.raises(WrongClass):
            mk_relaxation(cat(), {
                "agent1_pos_x": Free(),
                "agent1_signal": Free(),
                "arrived_first": Free(),
                "move": Eq(True),
            })

    def test_multi_variable_conjunct_is_not_a_relaxation(self):
        c = VarCatalog([
            VarDecl("x", VarClass.ENV, IntDomain(8)),
            VarDecl("y", VarClass.ENV, IntDomain(8)),
            VarDecl("d", VarClass.DECISION, BoolDomain()),
        ])
        with pytest.raises(NotARelaxation):
            relaxation_from_expr(c, "x + y == 3")

    def test_raw_expression_escape_hatch(self):
        c = cat()
        rel = relaxation_from_expr(c, "agent1_pos_x == 1.25 && agent1_signal == LEFT")
        assert eval_formula(rel, inputs(c, pos=1.25, sig="LEFT"))
        assert isinstance(rel.atoms["arrived_first"].predicate, Free)

    def test_range_needs_ordered_domain(self):
        with pytest.raises(DomainViolation):
            mk_relaxation(cat(), {
                "agent1_pos_x": Free(),
                "agent1_signal": Free(),
                "arrived_first": Range(False, True),
            })

    def test_range_bounds_validate(self):
        with pytest.raises(DomainViolation):
            mk_relaxation(cat(), {
                "agent1_pos_x": Range(2.0, 1.0),
                "agent1_signal": Free(),
                "arrived_first": Free(),
            })


class TestPuncture:
    def test_puncture_excludes_exactly_the_factual(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Member((1.0, 1.25, 1.376)),
            "agent1_signal": Free(),
            "arrived_first": Eq(False),
        })
        factual = inputs(c)
        punctured = puncture(rel, factual)
        assert not eval_formula(punctured, factual)
        # exhaustively: every other state in the family keeps its base verdict
        for pos, sig in itertools.product(
            (1.0, 1.25, 1.376, 2.0), ("LEFT", "STRAIGHT", "RIGHT")
        ):
            sigma = inputs(c, pos=pos, sig=sig)
            if sigma == factual:
                continue
            assert eval_formula(punctured, sigma) == eval_formula(rel, sigma)

    def test_factual_outside_relaxation_rejected(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Range(1.0, 1.5),
            "agent1_signal": Free(),
            "arrived_first": Free(),
        })
        with pytest.raises(FactualOutsideRelaxation):
            puncture(rel, inputs(c, pos=2.0))

    def test_punctured_singleton_has_no_models(self):
        c = cat()
        factual = inputs(c)
        punctured = puncture(tight_relaxation(c, factual), factual)
        assert not eval_formula(punctured, factual)

    def test_bit_exact_exclusion_distinguishes_zero_signs(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Member((0.0, -0.0)),
            "agent1_signal": Eq("RIGHT"),
            "arrived_first": Eq(False),
        })
        punctured = puncture(rel, inputs(c, pos=0.0))
        assert not eval_formula(punctured, inputs(c, pos=0.0))
        assert eval_formula(punctured, inputs(c, pos=-0.0))


class TestEvaluation:
    def test_substituted_equality(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Eq(1.25),
            "agent1_signal": Free(),
            "arrived_first": Free(),
        })
        assert eval_formula(rel, inputs(c, pos=1.25))

    def test_behavior_over_decision_state(self):
        c = cat()
        behavior = behavior_from_text(c, "move")
        decision = ConcreteState(c, {"move": True})
        assert eval_formula(behavior, decision)
        assert not eval_formula(
            behavior_from_text(c, "!move"), decision
        )

    def test_behavior_rejects_input_variables(self):
        with pytest.raises(WrongClass):
            behavior_from_text(cat(), "arrived_first")

    def test_missing_variable(self):
        c = cat()
        rel = factual_relaxation(c)
        with pytest.raises(MissingVariable):
            eval_formula(rel, ConcreteState(c, {"agent1_pos_x": 1.376}))

    def test_nan_fails_ranges_but_matches_bit_equality(self):
        c = cat()
        nan = bits_to_float(0x7FF8000000000001)
        rel_range = mk_relaxation(c, {
            "agent1_pos_x": Range(0.0, 2.0),
            "agent1_signal": Free(),
            "arrived_first": Free(),
        })
        assert not eval_formula(rel_range, inputs(c, pos=nan))
        rel_eq = mk_relaxation(c, {
            "agent1_pos_x": Eq(nan),
            "agent1_signal": Free(),
            "arrived_first": Free(),
        })
        assert eval_formula(rel_eq, inputs(c, pos=nan))
        assert not eval_formula(rel_eq, inputs(c, pos=bits_to_float(0x7FF8000000000002)))


class TestFactualScenario:
    def test_fixture_keyframe_validates(self, policies, crash_trace):
        c = policies["standard"].catalog
        keyframe = restrict(state_at(crash_trace, 4), "input")
        rel = tight_relaxation(c, keyframe)
        validate_factual_scenario(rel, crash_trace, 4)

    def test_non_equality_atom_is_not_tight(self, policies, crash_trace):
        c = policies["standard"].catalog
        keyframe = restrict(state_at(crash_trace, 4), "input")
        rel = tight_relaxation(c, keyframe)
        atoms = {n: a.predicate for n, a in rel.atoms.items()}
        atoms["agent1_pos_x"] = Range(1.0, 1.5)
        loose = mk_relaxation(c, atoms)
        with pytest.raises(NotTight):
            validate_factual_scenario(loose, crash_trace, 4)

    def test_mismatched_equalities_rejected(self, policies, crash_trace):
        c = policies["standard"].catalog
        keyframe = restrict(state_at(crash_trace, 4), "input")
        rel = tight_relaxation(c, keyframe)
        atoms = {n: a.predicate for n, a in rel.atoms.items()}
        atoms["agent1_pos_x"] = Eq(9.9)
        with pytest.raises(KeyframeMismatch):
            validate_factual_scenario(mk_relaxation(c, atoms), crash_trace, 4)


class TestQueryJson:
    def test_omitted_variables_lock_to_factual(self, policies, crash_trace):
        program = policies["standard"]
        doc = {"mode": "would", "keyframe": 4,
               "constraints": {"agent1_signal": "free"},
               "behavior": "move"}
        parsed = parse_query_json(doc, program.catalog, crash_trace)
        atom = parsed.relaxation.atoms["agent1_pos_x"].predicate
        assert isinstance(atom, Eq) and atom.value == 1.376
        assert isinstance(parsed.relaxation.atoms["agent1_signal"].predicate, Free)
        assert parsed.punctured is not None

    def test_factual_mode_has_no_puncture(self, policies, crash_trace):
        doc = {"mode": "factual", "keyframe": 4, "constraints": {},
               "behavior": "move"}
        parsed = parse_query_json(doc, policies["standard"].catalog, crash_trace)
        assert parsed.punctured is None
        assert parsed.relaxation.is_tight()

    def test_bad_mode_rejected(self, policies, crash_trace):
        with pytest.raises(QueryFormatError):
            parse_query_json({"mode": "maybe", "keyframe": 0, "behavior": "move"},
                             policies["standard"].catalog, crash_trace)

    def test_unknown_constraint_variable_rejected(self, policies, crash_trace):
        doc = {"mode": "might", "keyframe": 4,
               "constraints": {"move": {"eq": True}}, "behavior": "move"}
        with pytest.raises(QueryFormatError):
            parse_query_json(doc, policies["standard"].catalog, crash_trace)

    def test_fixture_queries_parse(self, policies, crash_trace):
        from deposition import fixtures

        for name in ("signal_would_move", "posx_might_not_move", "factual_moved"):
            doc = json.loads(fixtures.data_text(f"queries/{name}.json"))
            parse_query_json(doc, policies["standard"].catalog, crash_trace)

    def test_predicate_json_roundtrip(self):
        c = cat()
        rel = mk_relaxation(c, {
            "agent1_pos_x": Range(1.0, 1.5, hi_inclusive=False),
            "agent1_signal": Member(("LEFT", "RIGHT")),
            "arrived_first": Eq(True),
        })
        doc = relaxation_to_json(rel)
        assert doc["agent1_signal"] == {"in": ["LEFT", "RIGHT"]}
        assert doc["arrived_first"] == {"eq": True}
        assert doc["agent1_pos_x"]["range"]["hi_inclusive"] is False
        rejson = {
            n: predicate_to_json(c.decl(n).domain, rel.atoms[n].predicate)
            for n in rel.atoms
        }
        assert rejson == doc
