#!/usr/bin/env python3
"""Walk the intersection crash investigation end to end.

A car entered an intersection without right-of-way while the other car
signaled a right turn, and they collided. The same log is consistent with a
careful driver, a reckless one, and one hunting for crashes. The loop below
shows how factual and counterfactual queries separate the three designs.
"""

from deposition import fixtures
from deposition.session import derive_basis, open_session, pose
from deposition.solver import SolverRunner

SIGNAL_FAMILY = {"agent1_signal": {"in": ["LEFT", "STRAIGHT", "RIGHT"]}}
POS_FAMILY = dict(SIGNAL_FAMILY, agent1_pos_x={"range": [1.0, 1.5]})


def ask(session, runner, title, doc):
    response, added = pose(session, doc, runner)
    print(f"\n== {title}")
    print(f"   mode={doc['mode']}  behavior={doc['behavior']!r}")
    print(f"   verdict: {response.verdict}   paths explored: {response.ct}   "
          f"{response.timings.total:.3f}s")
    if response.witness is not None:
        factual = session.trace.steps[doc["keyframe"]]
        deltas = {
            n: v for n, v in response.witness.inputs.values.items()
            if factual[n] != v
        }
        print(f"   witness differs from the log on: {deltas}")
    for fact in added:
        print(f"   ledger + [{fact.fact_id}] {fact.property['statement']}")
    return response, added


def investigate(policy_name, runner):
    print(f"\n################ {policy_name} policy ################")
    session = open_session(
        fixtures.data_text(f"intersection_{policy_name}.decl"),
        fixtures.data_text("crash.jsonl"),
        name=f"crash-{policy_name}",
    )
    ask(session, runner, "did the car decide to move?",
        {"mode": "factual", "keyframe": 4, "constraints": {},
         "behavior": "move"})
    might, facts = ask(
        session, runner,
        "might a different turn signal have kept it stationary?",
        {"mode": "might", "keyframe": 4, "constraints": SIGNAL_FAMILY,
         "behavior": "!move"})
    if might.verdict == "true":
        seed = derive_basis(session, facts[0])
        print(f"   next-query basis from the witness: "
              f"signal={seed['agent1_signal']}")
    ask(session, runner,
        "would it still have moved anywhere in the approach window?",
        {"mode": "would", "keyframe": 4, "constraints": POS_FAMILY,
         "behavior": "move"})
    print(f"\nledger for {policy_name}: {len(session.facts)} proven facts")


def main():
    runner = SolverRunner()
    try:
        for name in fixtures.INTERSECTION_POLICIES:
            investigate(name, runner)
    finally:
        runner.close()
    print("\nReading the verdicts: the careful car stays for other signals, "
          "the reckless one never stays, and the crash-seeker only stays "
          "when entering would be flagrantly its fault.")


if __name__ == "__main__":
    main()
