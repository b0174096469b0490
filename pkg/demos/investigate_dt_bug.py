#!/usr/bin/env python3
"""Expose a unit-conversion bug in a deployed decision tree.

The screen computes BMI as weight / height^2 expecting kilograms and
meters, but the deployment feeds pounds and inches, shrinking every BMI by
a factor of ~703. The tree itself is fine; the system around it is not.
A single counterfactual query makes the fault visible: the only way this
patient gets classified high-risk is at an impossible body weight.
"""

from deposition import fixtures
from deposition.session import open_session, pose
from deposition.solver import SolverRunner


def main():
    runner = SolverRunner()
    try:
        session = open_session(
            fixtures.data_text("dt_health.decl"),
            fixtures.data_text("dt_factual.jsonl"),
            name="health-screen",
        )
        factual, _ = pose(session, {
            "mode": "factual", "keyframe": 0, "constraints": {},
            "behavior": "risk == LOW",
        }, runner)
        record = session.trace.steps[0]
        print(f"logged instance: weight {record['weight_lb']} lb, "
              f"height {record['height_in']} in, glucose {record['glucose']}")
        print(f"factual 'classified low risk?' -> {factual.verdict} "
              f"(paths: {factual.ct})")

        might, facts = pose(session, {
            "mode": "might", "keyframe": 0,
            "constraints": {"weight_lb": {"range": [1.0, 1000000.0]}},
            "behavior": "risk == HIGH",
        }, runner)
        witness_weight = might.witness.inputs["weight_lb"]
        print(f"\n'is there any weight that classifies high risk?' "
              f"-> {might.verdict}")
        print(f"witness weight: {witness_weight:,.0f} lb "
              f"(buggy BMI {witness_weight / 65.0**2:.1f})")
        print("a six-digit body weight is the tell: the BMI feature is "
              "being computed in the wrong units")

        corrected = open_session(
            fixtures.data_text("dt_health_corrected.decl"),
            fixtures.data_text("dt_factual.jsonl"),
            name="health-screen-fixed",
        )
        flipped, _ = pose(corrected, {
            "mode": "factual", "keyframe": 0, "constraints": {},
            "behavior": "risk == HIGH",
        }, runner)
        print(f"\nsame instance under the corrected-units program: "
              f"high risk -> {flipped.verdict}")
        print(f"\nledger: {[f.property['statement'] for f in session.facts]}")
    finally:
        runner.close()


if __name__ == "__main__":
    main()
