"""Query answering over inconsistent fact bases with a priority relation.

Typical use::

    from prioqa import load_instance, load_answers, Solver

    inst = load_instance(conflict_text, pref_text)
    inst, answers = load_answers(answer_text, inst)
    solver = Solver(inst)
    for d in solver.decide_all(answers, ["grounded", "p-ar", "g-ar"]):
        print(d.answer_id, d.semantics, d.verdict, d.tier)
"""

from .attacks import AttackRelation, GroundedResult, compute_attacks, gamma, grounded_repair, trivially_piar
from .emit import ProgramBlock, emit_block, emit_instance_facts, emit_semantics_program
from .errors import PrioQAError
from .factset import FactSet
from .ingest import load_answers, load_instance, parse_facts
from .localize import ReachMode, localized_instance, reach
from .model import AnswerCauses, Conflict, PrioritizedInstance, validate
from .optimality import RepairKind, enumerate_repairs, is_optimal, is_repair
from .solver import Decision, Semantics, Solver, Tier, decide_ar, decide_brave, decide_iar, decide_pipeline

__version__ = "0.1.0"

__all__ = [
    "AnswerCauses", "AttackRelation", "Conflict", "Decision", "FactSet", "GroundedResult",
    "PrioQAError", "PrioritizedInstance", "ProgramBlock", "ReachMode", "RepairKind", "Semantics",
    "Solver", "Tier", "compute_attacks", "decide_ar", "decide_brave", "decide_iar", "decide_pipeline",
    "emit_block", "emit_instance_facts", "emit_semantics_program", "enumerate_repairs", "gamma",
    "grounded_repair", "is_optimal", "is_repair", "load_answers", "load_instance", "localized_instance",
    "parse_facts", "reach", "trivially_piar", "validate",
]
