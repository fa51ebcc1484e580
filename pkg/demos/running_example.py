"""Walk through the seven-fact running example.

Prints the plain and optimal repairs, the attack relation, the grounded
repair step by step, and a few verdicts with the tier that settled them.

    python3 demos/running_example.py
"""

from __future__ import annotations

from prioqa import RepairKind, Solver, compute_attacks, enumerate_repairs, grounded_repair, is_optimal
from prioqa.toy import atom_answers, running_example


def show(instance, facts) -> str:
    return "{" + ", ".join(sorted(instance.names_of(facts))) + "}"


def main() -> None:
    inst = running_example()
    print(f"{len(inst.universe)} facts, {len(inst.conflicts)} conflicts, {len(inst.priority)} priority pairs")

    repairs = list(enumerate_repairs(inst))
    print("\nrepairs:")
    for r in repairs:
        kinds = [k.value for k in (RepairKind.P, RepairKind.G, RepairKind.C) if is_optimal(inst, r, k)]
        print(f"  {show(inst, r):40s} optimal for: {' '.join(kinds) or '-'}")

    print("\nattacks:")
    for att in compute_attacks(inst):
        print(f"  {show(inst, att.attackers)} attacks {inst.name(att.target)}")

    g = grounded_repair(inst)
    print("\ngrounded repair:")
    for k, step in enumerate(g.steps, start=1):
        print(f"  step {k}: + {show(inst, step)}")
    print(f"  result: {show(inst, g.grounded)}")

    solver = Solver(inst)
    print("\nverdicts (answer, semantics, verdict, tier):")
    for answer in atom_answers(inst):
        for d in solver.decide_all([answer], ["grounded", "p-ar", "g-ar", "c-brave"]):
            print(f"  {d.answer_id:5s} {d.semantics:8s} {d.verdict:4s} {d.tier}")


if __name__ == "__main__":
    main()
