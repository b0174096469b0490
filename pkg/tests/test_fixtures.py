import pytest

from deposition import fixtures
from deposition.brute import brute_force_check
from deposition.formula import behavior_from_text, parse_query_json
from deposition.model import restrict, state_at
from deposition.oracle import Oracle, make_query


class TestArtifacts:
    def test_three_policies_share_one_catalog(self, policies):
        catalogs = [p.catalog for p in policies.values()]
        assert catalogs[0] == catalogs[1] == catalogs[2]

    def test_crash_keyframe_carries_the_logged_moment(self, crash_trace):
        key = state_at(crash_trace, 4)
        assert key["agent1_signal"] == "RIGHT"
        assert key["agent1_pos_x"] == 1.376
        assert key["move"] is True

    def test_logged_decisions_replay_under_every_policy(self, policies,
                                                        crash_trace):
        from deposition.lang import interpret

        for program in policies.values():
            for t in range(len(crash_trace)):
                inputs = restrict(state_at(crash_trace, t), "input")
                final, _ = interpret(program, inputs)
                assert final["move"] == state_at(crash_trace, t)["move"]

    def test_dt_factual_classifies_low_under_the_bug(self, dt_programs,
                                                     dt_trace):
        from deposition.lang import interpret

        buggy, corrected = dt_programs
        inputs = restrict(state_at(dt_trace, 0), "input")
        final, _ = interpret(buggy, inputs)
        assert final["risk"] == "LOW"
        flipped, _ = interpret(corrected, inputs)
        assert flipped["risk"] == "HIGH"  # hand-walked: BMI 41.6 > 26.35, age 37

    def test_golden_decision_tables_regenerate(self, policies, crash_trace):
        for name, program in policies.items():
            regenerated = fixtures.policy_decision_table(program, crash_trace, 4)
            assert regenerated == fixtures.golden_table(f"decision_table_{name}")


class TestSuites:
    @pytest.mark.parametrize("suite", ["table2", "table3"])
    def test_suite_expectations_reproduce(self, suite, runner):
        for entry in fixtures.load_suite(suite):
            oracle = Oracle(entry.program, runner)
            response = oracle.resolve(make_query(entry.query, entry.trace))
            assert response.verdict == entry.expect, (
                entry.program_name, entry.query_name
            )
            if entry.expect_ct is not None:
                assert response.ct == entry.expect_ct

    def test_table2_verdicts_confirmed_by_brute_force(self, policies,
                                                      crash_trace):
        """Every counterfactual family re-checked by enumeration, with the
        float range swapped for the committed probe grid."""
        import json

        from deposition.formula import Eq, Member

        key = restrict(state_at(crash_trace, 4), "input")
        for entry in fixtures.load_suite("table2"):
            if entry.query.mode == "factual":
                continue
            relaxation = entry.query.relaxation
            atoms = {n: a.predicate for n, a in relaxation.atoms.items()}
            pos_atom = atoms["agent1_pos_x"]
            if not isinstance(pos_atom, (Eq, Member)):
                atoms["agent1_pos_x"] = Member(fixtures.POSX_PROBE_POINTS)
            from deposition.formula import mk_relaxation

            enum_rel = mk_relaxation(entry.program.catalog, atoms)
            result = brute_force_check(
                entry.program,
                entry.query.mode,
                enum_rel,
                entry.query.behavior,
                exclude=key,
            )
            assert result.verdict == entry.expect, (
                entry.program_name, entry.query_name
            )
            _ = json

    def test_dt_witness_crosses_the_split(self, dt_programs, dt_trace, runner):
        buggy, _ = dt_programs
        query = fixtures.load_query("queries/dt_might_high.json", buggy, dt_trace)
        oracle = Oracle(buggy, runner)
        response = oracle.resolve(make_query(query, dt_trace))
        assert response.verdict == "true"
        weight = response.witness.inputs["weight_lb"]
        assert weight / 65.0 ** 2 > 26.35
        assert oracle.witness_replay(
            response.witness, behavior_from_text(buggy.catalog, "risk == HIGH")
        )
