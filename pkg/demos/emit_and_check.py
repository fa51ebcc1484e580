"""Emit the P and C programs for the running example and compare an
outside ASP solver with the native verdicts.

The solver comes from PRIOQA_ASP_SOLVER, else clingo on PATH or as a
Python module.  Without one the programs are still printed.

    python3 demos/emit_and_check.py
"""

from __future__ import annotations

from prioqa.emit import ExternalSolver, emit_instance_facts, external_verdict, program_text
from prioqa.solver import Solver
from prioqa.toy import atom_answers, running_example


def main() -> None:
    inst = running_example()
    print("% facts for the running example")
    print(emit_instance_facts(inst))
    print("% p-ar program, strong localization")
    print(program_text("p-ar", "strong"))

    solver = ExternalSolver.from_env()
    if solver is None:
        print("no ASP solver found; skipping the comparison")
        return
    native = Solver(inst, localize="off")
    agree = 0
    total = 0
    for answer in atom_answers(inst):
        for sem in ("p-brave", "p-ar", "c-brave", "c-ar"):
            mine = native.decide(answer, sem).verdict
            theirs = external_verdict(solver, inst, answer, sem, "strong")
            total += 1
            agree += mine == theirs
            flag = "" if mine == theirs else "   <-- differs"
            print(f"{answer.answer_id:5s} {sem:8s} native={mine:3s} external={theirs}{flag}")
    print(f"\n{agree}/{total} verdicts agree")


if __name__ == "__main__":
    main()
