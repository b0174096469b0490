import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deposition.errors import (
    CatalogError,
    DomainViolation,
    EmptyTrace,
    MissingVariable,
    NonMonotonicStep,
    StepOutOfRange,
    UnknownVariable,
)
from deposition.fp import bits_to_float, float_to_bits
from deposition.model import (
    BoolDomain,
    ConcreteState,
    EnumDomain,
    FloatDomain,
    IntDomain,
    Trace,
    VarCatalog,
    VarClass,
    VarDecl,
    catalog_from_json,
    catalog_to_json,
    parse_trace_log,
    restrict,
    serialize_trace,
    state_at,
)


def small_catalog() -> VarCatalog:
    return VarCatalog([
        VarDecl("agent1_pos_x", VarClass.ENV, FloatDomain()),
        VarDecl("agent1_signal", VarClass.ENV, EnumDomain(("LEFT", "STRAIGHT", "RIGHT"))),
        VarDecl("speed", VarClass.ENV, IntDomain(8)),
        VarDecl("arrived_first", VarClass.STATE, BoolDomain()),
        VarDecl("move", VarClass.DECISION, BoolDomain()),
    ])


def full_state(cat, **overrides):
    values = {
        "agent1_pos_x": 1.376,
        "agent1_signal": "RIGHT",
        "speed": 3,
        "arrived_first": False,
        "move": True,
    }
    values.update(overrides)
    return ConcreteState(cat, values)


class TestCatalog:
    def test_duplicate_names_rejected(self):
        with pytest.raises(CatalogError):
            VarCatalog([
                VarDecl("x", VarClass.ENV, BoolDomain()),
                VarDecl("x", VarClass.DECISION, BoolDomain()),
            ])

    def test_needs_a_decision_variable(self):
        with pytest.raises(CatalogError):
            VarCatalog([VarDecl("x", VarClass.ENV, BoolDomain())])

    def test_enum_members_nonempty_and_unique(self):
        with pytest.raises(CatalogError):
            EnumDomain(())
        with pytest.raises(CatalogError):
            EnumDomain(("A", "A"))

    def test_enum_code_width_is_minimal(self):
        assert EnumDomain(("A",)).code_width == 1
        assert EnumDomain(("A", "B")).code_width == 1
        assert EnumDomain(("A", "B", "C")).code_width == 2
        assert EnumDomain(tuple("ABCDE")).code_width == 3

    def test_json_roundtrip(self):
        cat = small_catalog()
        again = catalog_from_json(catalog_to_json(cat))
        assert again == cat


class TestStates:
    def test_domain_violation(self):
        cat = small_catalog()
        with pytest.raises(DomainViolation):
            ConcreteState(cat, {"speed": 300})
        with pytest.raises(DomainViolation):
            ConcreteState(cat, {"agent1_signal": "UP"})
        with pytest.raises(UnknownVariable):
            ConcreteState(cat, {"agent9_pos": 1.0})

    def test_restrict_projects_one_class(self):
        cat = small_catalog()
        sigma = full_state(cat)
        env = restrict(sigma, "env")
        assert set(env.values) == {"agent1_pos_x", "agent1_signal", "speed"}
        assert env["agent1_pos_x"] == 1.376

    def test_restrict_of_narrower_state_fails(self):
        cat = small_catalog()
        env = restrict(full_state(cat), "env")
        with pytest.raises(MissingVariable):
            restrict(env, "decision")

    def test_restrict_partitions_cover_everything(self):
        cat = small_catalog()
        sigma = full_state(cat)
        parts = [restrict(sigma, c) for c in ("env", "state", "decision")]
        names = [set(p.values) for p in parts]
        assert set.union(*names) == set(cat.names())
        assert sum(len(n) for n in names) == len(cat)

    def test_input_restriction_is_identity_when_all_inputs(self):
        cat = small_catalog()
        inputs = restrict(full_state(cat), "input")
        assert restrict(inputs, "input") == inputs

    def test_float_equality_is_bitwise(self):
        cat = small_catalog()
        a = full_state(cat, agent1_pos_x=0.0)
        b = full_state(cat, agent1_pos_x=-0.0)
        assert a != b
        nan1 = full_state(cat, agent1_pos_x=bits_to_float(0x7FF8000000000001))
        nan2 = full_state(cat, agent1_pos_x=bits_to_float(0x7FF8000000000001))
        assert nan1 == nan2


LOG = """
{"t": 0, "vars": {"agent1_pos_x": 1.376, "agent1_signal": "RIGHT", "speed": 3, "arrived_first": false, "move": true}}
{"t": 1, "vars": {"agent1_pos_x": {"dec": 1.25, "bits": "3ff4000000000000"}, "agent1_signal": "LEFT", "speed": 2, "arrived_first": true, "move": false}}
"""


class TestTraceParsing:
    def test_parses_values(self):
        trace = parse_trace_log(LOG, small_catalog())
        assert len(trace) == 2
        assert state_at(trace, 0)["agent1_pos_x"] == 1.376
        assert state_at(trace, 0)["agent1_signal"] == "RIGHT"
        assert state_at(trace, 1)["agent1_pos_x"] == 1.25

    def test_bits_are_authoritative(self):
        cat = small_catalog()
        bits = float_to_bits(1.25)
        line = json.dumps({
            "t": 0,
            "vars": {"agent1_pos_x": {"dec": 99.0, "bits": f"{bits:016x}"},
                     "agent1_signal": "LEFT", "speed": 0,
                     "arrived_first": False, "move": False},
        })
        trace = parse_trace_log(line, cat)
        assert state_at(trace, 0)["agent1_pos_x"] == 1.25

    def test_empty_document(self):
        with pytest.raises(EmptyTrace):
            parse_trace_log("", small_catalog())

    def test_unknown_variable(self):
        bad = LOG.replace("agent1_pos_x", "agent9_pos")
        with pytest.raises(UnknownVariable):
            parse_trace_log(bad, small_catalog())

    def test_non_monotonic_step(self):
        bad = LOG.replace('{"t": 1,', '{"t": 3,')
        with pytest.raises(NonMonotonicStep):
            parse_trace_log(bad, small_catalog())

    def test_domain_violation_in_log(self):
        bad = LOG.replace('"speed": 3', '"speed": 999')
        with pytest.raises(DomainViolation):
            parse_trace_log(bad, small_catalog())

    def test_meta_key_ignored(self):
        line = LOG.strip().splitlines()[0]
        record = json.loads(line)
        record["vars"]["meta"] = {"telemetry": [1, 2, 3]}
        trace = parse_trace_log(json.dumps(record), small_catalog())
        assert "meta" not in state_at(trace, 0).values

    def test_step_out_of_range(self):
        trace = parse_trace_log(LOG, small_catalog())
        assert state_at(trace, 1)["move"] is False
        with pytest.raises(StepOutOfRange):
            state_at(trace, 2)
        with pytest.raises(StepOutOfRange):
            state_at(trace, -1)

    def test_trace_requires_full_states(self):
        cat = small_catalog()
        with pytest.raises(MissingVariable):
            Trace(cat, [ConcreteState(cat, {"move": True})])


FLOAT_BITS = st.integers(min_value=0, max_value=(1 << 64) - 1)


class TestRoundTrip:
    @given(
        st.lists(
            st.tuples(
                FLOAT_BITS,
                st.sampled_from(["LEFT", "STRAIGHT", "RIGHT"]),
                st.integers(min_value=-128, max_value=127),
                st.booleans(),
                st.booleans(),
            ),
            min_size=1,
            max_size=6,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_serialize_parse_bit_exact(self, rows):
        cat = small_catalog()
        steps = [
            ConcreteState(cat, {
                "agent1_pos_x": bits_to_float(bits),
                "agent1_signal": sig,
                "speed": speed,
                "arrived_first": first,
                "move": move,
            })
            for bits, sig, speed, first, move in rows
        ]
        trace = Trace(cat, steps)
        again = parse_trace_log(serialize_trace(trace), cat)
        assert again == trace
        for t in range(len(trace)):
            a = state_at(trace, t)["agent1_pos_x"]
            b = state_at(again, t)["agent1_pos_x"]
            assert float_to_bits(a) == float_to_bits(b)

    def test_nan_and_negative_zero_roundtrip(self):
        cat = small_catalog()
        for bits in (0x7FF8000000000001, 0xFFF0000000000000, 0x8000000000000000):
            trace = Trace(cat, [full_state(cat, agent1_pos_x=bits_to_float(bits))])
            again = parse_trace_log(serialize_trace(trace), cat)
            assert float_to_bits(state_at(again, 0)["agent1_pos_x"]) == bits

    def test_inf_serializes(self):
        cat = small_catalog()
        trace = Trace(cat, [full_state(cat, agent1_pos_x=math.inf)])
        assert parse_trace_log(serialize_trace(trace), cat) == trace
