from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from prioqa.bench import small_random_instance
from prioqa.emit import (
    ExternalSolver,
    HeaderStyle,
    ProgramBlock,
    emit_answer_facts,
    emit_block,
    emit_grounded_program,
    emit_instance_facts,
    external_verdict,
    program_filename,
    program_text,
)
from prioqa.errors import InvalidCombination
from prioqa.ingest import load_answers, load_instance, parse_facts, quote, unquote
from prioqa.model import AnswerCauses, PrioritizedInstance
from prioqa.solver import Solver
from prioqa.toy import atom_answer, atom_answers
from conftest import GOLDEN
from strategies import instances, names

PROGRAMS = [
    ("g-brave", "off", False, 1),
    ("g-ar", "off", False, 1),
    ("g-ar", "off", False, 2),
    ("g-brave", "weak", False, 1),
    ("g-ar", "weak", True, 1),
    ("p-brave", "off", False, 1),
    ("p-ar", "off", False, 1),
    ("c-brave", "off", False, 1),
    ("c-ar", "off", False, 1),
    ("p-brave", "strong", False, 1),
    ("p-ar", "strong", True, 1),
    ("c-brave", "weak", False, 1),
]


@pytest.mark.parametrize("block", list(ProgramBlock), ids=lambda b: b.value)
def test_block_matches_golden(block):
    assert emit_block(block) == (GOLDEN / "blocks" / f"{block.value}.lp").read_text()


@pytest.mark.parametrize("sem,loc,binary,variant", PROGRAMS,
                         ids=[program_filename(*p) for p in PROGRAMS])
def test_program_matches_golden(sem, loc, binary, variant):
    golden = GOLDEN / "programs" / program_filename(sem, loc, binary, variant)
    assert program_text(sem, loc, binary, variant) == golden.read_text()


def test_grounded_program_matches_golden():
    assert emit_grounded_program() == (GOLDEN / "programs" / "grounded.lp").read_text()


def test_emission_is_deterministic():
    for p in PROGRAMS:
        assert program_text(*p) == program_text(*p)


def test_header_style_changes_only_headers():
    style = HeaderStyle(exists="%@E", forall="%@A", constraint="%@C")
    text = program_text("g-ar")
    alt = program_text("g-ar", style=style)
    assert alt != text
    swap = alt.replace("%@E", "%@exists").replace("%@A", "%@forall").replace("%@C", "%@constraint")
    assert swap == text


@pytest.mark.parametrize("sem,kwargs", [
    ("grounded", {}),
    ("trivial-piar", {}),
    ("p-iar", {}),
    ("s-brave", {}),
    ("g-brave", {"localize": "strong"}),
    ("p-brave", {"localize": "sideways"}),
    ("g-ar", {"gar_variant": 3}),
    ("g-brave", {"gar_variant": 2}),
    ("p-ar", {"gar_variant": 2}),
])
def test_invalid_combinations(sem, kwargs):
    with pytest.raises(InvalidCombination):
        program_text(sem, **kwargs)


def test_auto_localization_picks_weak_for_g_and_strong_otherwise():
    assert program_text("g-brave", "auto") == program_text("g-brave", "weak")
    assert program_text("c-ar", "auto") == program_text("c-ar", "strong")


# -- facts ---------------------------------------------------------------------


def count(text: str, pred: str) -> int:
    return sum(1 for f in parse_facts(text).facts if f.pred == pred)


def test_toy_fact_counts(toy):
    text = emit_instance_facts(toy)
    assert (count(text, "conf"), count(text, "inConf"), count(text, "pref")) == (6, 12, 4)


def test_empty_instance_emits_nothing():
    assert emit_instance_facts(PrioritizedInstance.build([])) == ""


def test_cause_facts(toy):
    answer = AnswerCauses("q", (toy.facts(["A(a)"]), toy.facts(["A(b)", "C(a)"])))
    text = emit_instance_facts(toy, answer)
    assert (count(text, "cause"), count(text, "inCause")) == (2, 3)


def test_instance_round_trip(toy):
    back = load_instance(emit_instance_facts(toy))
    assert names(back, back.universe) == names(toy, toy.universe)
    assert {frozenset(names(back, c.members)) for c in back.conflicts} == {frozenset(names(toy, c.members)) for c in toy.conflicts}
    assert {(back.name(a), back.name(b)) for a, b in back.priority} == \
           {(toy.name(a), toy.name(b)) for a, b in toy.priority}


def test_answer_round_trip(toy):
    answers = [atom_answer(toy, "A(a)", "C(b)", answer_id="q1"), atom_answer(toy, "B(a)", answer_id="q2")]
    inst, back = load_answers(emit_answer_facts(toy, answers), toy)
    assert [a.answer_id for a in back] == ["q1", "q2"]
    assert [[names(inst, c) for c in a.causes] for a in back] == \
           [[names(toy, c) for c in a.causes] for a in answers]


@pytest.mark.parametrize("name", ["abc", "x1_y", "42", "A(a)", "has space", 'q"uote', "back\\slash", "Upper"])
def test_quote_round_trip(name):
    token = quote(name)
    assert unquote(token) == name
    fact = parse_facts(f"pref({token},{token}).").facts[0]
    assert fact.args == (name, name)


@given(instances())
def test_random_instance_round_trip(data):
    inst, _ = data
    back = load_instance(emit_instance_facts(inst))
    assert {frozenset(names(back, c.members)) for c in back.conflicts} == {frozenset(names(inst, c.members)) for c in inst.conflicts}
    assert {(back.name(a), back.name(b)) for a, b in back.priority} == \
           {(inst.name(a), inst.name(b)) for a, b in inst.priority}


# -- outside solvers -----------------------------------------------------------


@pytest.fixture(scope="module")
def asp_solver():
    solver = ExternalSolver.from_env()
    if solver is None:
        pytest.skip("no ASP solver configured")
    return solver


def test_external_plain_programs_agree_with_native(toy, asp_solver):
    native = Solver(toy, localize="off")
    for answer in atom_answers(toy):
        for sem in ("p-brave", "p-ar", "c-brave", "c-ar"):
            expected = native.decide(answer, sem).verdict
            for loc in ("off", "strong", "weak"):
                for binary in (False, True):
                    assert external_verdict(asp_solver, toy, answer, sem, loc, binary) == expected, \
                        (answer.answer_id, sem, loc, binary)


@pytest.mark.slow
def test_external_plain_programs_on_random_instances(asp_solver):
    rng = np.random.default_rng(3)
    for _ in range(8):
        inst, answers = small_random_instance(rng, binary=bool(rng.random() < 0.5),
                                              prio_mode=str(rng.choice(["score", "nonscore", "none"])),
                                              max_facts=8, max_conflicts=6)
        native = Solver(inst, localize="off")
        for answer in answers[:2]:
            for sem in ("p-brave", "p-ar", "c-brave", "c-ar"):
                for loc in ("off", "weak", "strong"):
                    assert external_verdict(asp_solver, inst, answer, sem, loc) == \
                        native.decide(answer, sem).verdict


def test_aspq_documents_agree_with_native(toy):
    aspq_eval = pytest.importorskip("aspq_eval")
    from prioqa.emit import emit_semantics_program

    native = Solver(toy, localize="off")
    for answer in atom_answers(toy):
        facts = emit_instance_facts(toy, answer)
        for sem, variant in (("g-brave", 1), ("g-ar", 1), ("g-ar", 2)):
            for loc, binary in (("off", False), ("weak", False), ("weak", True)):
                doc = emit_semantics_program(sem, loc, binary, variant)
                coherent = aspq_eval.coherent(doc, facts)
                holds = coherent if (sem == "g-brave" or variant == 2) else not coherent
                assert ("yes" if holds else "no") == native.decide(answer, sem).verdict, \
                    (answer.answer_id, sem, variant, loc, binary)


def test_grounded_program_steps_match_native(toy):
    aspq_eval = pytest.importorskip("aspq_eval")
    steps = aspq_eval.grounded_steps(emit_grounded_program(), emit_instance_facts(toy))
    safe = set().union(*steps)
    names = {s.split("(", 1)[1].rsplit(",", 1)[0] for s in safe}
    native = Solver(toy).grounded.grounded
    expected = {quote(toy.name(i)) for i in native if i in toy.conflicting}
    assert names == expected
