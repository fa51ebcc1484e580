from __future__ import annotations

import json

import pytest
from hypothesis import given

from prioqa.errors import ModeMismatch
from prioqa.oracle import BruteForce, oracle_verdict
from prioqa.solver import (
    ALL_SEMANTICS,
    DEFAULT_GRID,
    NO,
    UNKNOWN,
    YES,
    Decision,
    Semantics,
    Solver,
    Tier,
    decide_ar,
    decide_brave,
    decide_iar,
    decide_pipeline,
    decisions_to_csv,
)
from prioqa.toy import atom_answer, atom_answers
from strategies import instances


def verdict(inst, name, sem, **kw):
    return Solver(inst, **kw).decide(atom_answer(inst, name), sem).verdict


def test_toy_verdicts(toy):
    assert verdict(toy, "A(a)", "g-ar") == YES
    assert verdict(toy, "A(a)", "p-ar") == NO
    assert verdict(toy, "B(a)", "p-brave") == YES
    assert verdict(toy, "B(a)", "g-brave") == NO
    for k in "pgc":
        assert verdict(toy, "C(b)", f"{k}-iar") == YES


def test_toy_tiers(toy):
    s = Solver(toy)
    assert s.decide(atom_answer(toy, "A(b)"), "c-ar").tier == Tier.TRIVIAL.value
    assert s.decide(atom_answer(toy, "C(b)"), "p-iar").tier == Tier.GROUNDED.value
    assert s.decide(atom_answer(toy, "A(a)"), "g-ar").tier == Tier.DIRECT.value
    # P-brave no settles G-brave
    assert s.decide(atom_answer(toy, "B(b)"), "g-brave").tier == Tier.PARETO_BOUND.value


def test_semantics_parsing():
    assert Semantics.parse("G-AR") == Semantics("ar", Semantics.parse("g-ar").kind)
    assert Semantics.parse("grounded").kind is None
    with pytest.raises(ValueError):
        Semantics.parse("x-ar")
    with pytest.raises(ValueError):
        Semantics.parse("p-sometimes")
    assert [s.label for s in DEFAULT_GRID] == ["grounded", "p-brave", "p-ar", "g-brave", "g-ar",
                                              "c-brave", "c-ar"]


def test_strong_reach_rejected_for_g(toy):
    with pytest.raises(ModeMismatch):
        Solver(toy, localize="strong").decide(atom_answer(toy, "A(a)"), "g-ar")


def test_budget_exhaustion_gives_unknown(toy):
    answer = atom_answer(toy, "B(a)")
    d = Solver(toy, budget=1).decide(answer, "g-ar", tiered=False)
    assert d.verdict == UNKNOWN
    assert "budget" in d.reason
    assert Solver(toy).decide(answer, "g-ar", tiered=False).verdict != UNKNOWN


def test_functional_wrappers(toy):
    a = atom_answer(toy, "A(a)")
    assert decide_brave(toy, a, "P").verdict == YES
    assert decide_ar(toy, a, "G").verdict == YES
    assert decide_iar(toy, a, "P").verdict == NO
    assert decide_pipeline(toy, a, "c-ar").verdict == YES


def test_decision_serialization(toy):
    ds = Solver(toy).decide_all(atom_answers(toy)[:2], ["grounded", "p-ar"])
    text = decisions_to_csv(ds)
    assert text.splitlines()[0] == ",".join(Decision.CSV_FIELDS)
    assert len(text.splitlines()) == 5
    assert json.loads(ds[0].to_json())["semantics"] == "grounded"


def _check_against_oracle(inst, answers, **opts):
    brute = BruteForce(inst)
    solver = Solver(inst, **opts)
    for a in answers:
        for sem in ALL_SEMANTICS:
            for tiered in (True, False):
                d = solver.decide(a, sem, tiered)
                if d.verdict == UNKNOWN:
                    continue
                expected = oracle_verdict(brute, a, sem.mode, sem.kind)
                assert (d.verdict == YES) == expected, (sem.label, tiered, opts)


@given(instances())
def test_verdicts_match_oracle(data):
    _check_against_oracle(*data)


@given(instances())
def test_verdicts_match_oracle_without_localization(data):
    _check_against_oracle(*data, localize="off")


@given(instances())
def test_verdicts_match_oracle_weak_reach(data):
    _check_against_oracle(*data, localize="weak")


@given(instances(binary=True))
def test_binary_procedures_agree_with_generic(data):
    inst, answers = data
    fast, generic = Solver(inst, binary=True), Solver(inst)
    for a in answers:
        for sem in ALL_SEMANTICS:
            assert fast.decide(a, sem, False).verdict == generic.decide(a, sem, False).verdict


@given(instances())
def test_verdict_chains(data):
    inst, answers = data
    s = Solver(inst)
    for a in answers:
        v = {sem.label: s.decide(a, sem).verdict == YES for sem in ALL_SEMANTICS}
        for k in "pgc":
            assert v[f"{k}-iar"] <= v[f"{k}-ar"] <= v[f"{k}-brave"]
        assert v["p-ar"] <= v["g-ar"] <= v["c-ar"]
        assert v["c-brave"] <= v["g-brave"] <= v["p-brave"]
        assert v["trivial-piar"] <= v["grounded"] <= v["p-iar"]
