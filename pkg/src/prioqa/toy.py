"""The seven-fact running example used in docs, demos and tests.

Facts ``A(a) B(a) C(a) D(a)`` form a four-cycle of conflicts, ``A(b) B(b)
C(b)`` a chain of two.  The priority orients half of the a-side conflicts
and both b-side ones.
"""

from __future__ import annotations

from .model import AnswerCauses, PrioritizedInstance

FACTS = ["A(a)", "B(a)", "C(a)", "D(a)", "A(b)", "B(b)", "C(b)"]
ALIASES = {f"f{i + 1}": name for i, name in enumerate(FACTS)}

CONFLICTS = [
    ("c1", ["A(a)", "B(a)"]),
    ("c2", ["B(a)", "C(a)"]),
    ("c3", ["C(a)", "D(a)"]),
    ("c4", ["D(a)", "A(a)"]),
    ("c5", ["A(b)", "B(b)"]),
    ("c6", ["B(b)", "C(b)"]),
]

PRIORITY = [("A(a)", "B(a)"), ("C(a)", "D(a)"), ("A(b)", "B(b)"), ("B(b)", "C(b)")]

# fact-file rendering with f1..f7 standing for the facts above
CONFLICT_TEXT = """\
conf(c1). inConf(c1,f1). inConf(c1,f2).
conf(c2). inConf(c2,f2). inConf(c2,f3).
conf(c3). inConf(c3,f3). inConf(c3,f4).
conf(c4). inConf(c4,f4). inConf(c4,f1).
conf(c5). inConf(c5,f5). inConf(c5,f6).
conf(c6). inConf(c6,f6). inConf(c6,f7).
"""

PREF_TEXT = """\
pref(f1,f2). pref(f3,f4). pref(f5,f6). pref(f6,f7).
"""


def running_example() -> PrioritizedInstance:
    return PrioritizedInstance.build(CONFLICTS, PRIORITY, FACTS)


def atom_answer(instance: PrioritizedInstance, *names: str, answer_id: str | None = None) -> AnswerCauses:
    """Answer with one singleton cause per named fact."""
    causes = tuple(instance.facts([n]) for n in names)
    return AnswerCauses(answer_id or "|".join(names), causes)


def atom_answers(instance: PrioritizedInstance) -> list[AnswerCauses]:
    return [atom_answer(instance, instance.name(i)) for i in instance.universe]
