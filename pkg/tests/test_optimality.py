from __future__ import annotations

import warnings

import pytest
from hypothesis import given

from prioqa.factset import FactSet
from prioqa.optimality import (
    RepairKind,
    completion_witness,
    enumerate_repairs,
    find_global_improvement,
    find_pareto_improvement,
    is_optimal,
    is_repair,
)
from prioqa.oracle import BruteForce
from prioqa.sat import Budget
from prioqa.errors import SearchBudgetExceeded
from strategies import instances, name_sets

REPAIRS = {
    frozenset({"A(a)", "C(a)", "B(b)"}), frozenset({"B(a)", "D(a)", "B(b)"}),
    frozenset({"A(a)", "C(a)", "A(b)", "C(b)"}), frozenset({"B(a)", "D(a)", "A(b)", "C(b)"}),
}
BEST = frozenset({"A(a)", "C(a)", "A(b)", "C(b)"})
PARETO = {BEST, frozenset({"B(a)", "D(a)", "A(b)", "C(b)"})}


def optimal(inst, kind):
    return [r for r in enumerate_repairs(inst) if is_optimal(inst, r, kind)]


def test_toy_repairs(toy):
    assert name_sets(toy, enumerate_repairs(toy)) == REPAIRS
    assert name_sets(toy, optimal(toy, "P")) == PARETO
    assert name_sets(toy, optimal(toy, "G")) == {BEST}
    assert name_sets(toy, optimal(toy, "C")) == {BEST}


def test_toy_improvements(toy):
    worse = toy.facts(["B(a)", "D(a)", "A(b)", "C(b)"])
    assert find_pareto_improvement(toy, worse) is None
    better = find_global_improvement(toy, worse)
    assert better is not None and frozenset(toy.names_of(better)) == BEST
    low = toy.facts(["A(a)", "C(a)", "B(b)"])
    assert find_pareto_improvement(toy, low) is not None


def test_completion_witness_extends_priority(toy):
    best = toy.facts(sorted(BEST))
    edges = completion_witness(toy, best)
    assert edges is not None
    assert not set(edges) & set(toy.priority)
    assert completion_witness(toy, toy.facts(["B(a)", "D(a)", "A(b)", "C(b)"])) is None


def test_is_repair_rejects_non_maximal(toy):
    assert not is_repair(toy, toy.facts(["A(a)", "A(b)"]))
    assert not is_repair(toy, toy.facts(["A(a)", "B(a)", "C(a)"]))


def test_enumeration_warns_on_large_input():
    from prioqa.model import PrioritizedInstance

    facts = [f"x{i}" for i in range(30)]
    inst = PrioritizedInstance.build([(f"c{i}", [facts[i], facts[i + 1]]) for i in range(0, 30, 2)])
    with pytest.warns(RuntimeWarning):
        assert sum(1 for _ in enumerate_repairs(inst)) == 2 ** 15


def test_enumeration_respects_budget(toy):
    with pytest.raises(SearchBudgetExceeded):
        list(enumerate_repairs(toy, Budget(2)))


@given(instances())
def test_enumeration_matches_oracle(data):
    inst, _ = data
    brute = BruteForce(inst)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        got = list(enumerate_repairs(inst))
    assert len(got) == len(set(got))
    assert set(got) == {brute.to_global(r) for r in brute.reps}


@given(instances())
def test_optimality_matches_oracle(data):
    inst, _ = data
    brute = BruteForce(inst)
    reps = [brute.to_global(r) for r in brute.reps]
    for kind in "SPGC":
        assert {r for r in reps if is_optimal(inst, r, kind)} == brute.optimal_repairs(kind)


@given(instances())
def test_kind_inclusions(data):
    inst, _ = data
    reps = list(enumerate_repairs(inst))
    c, g, p = ({r for r in reps if is_optimal(inst, r, k)} for k in "CGP")
    assert c <= g <= p
    assert c  # some completion-optimal repair always exists


@given(instances(prio="score"))
def test_score_structured_kinds_coincide(data):
    inst, _ = data
    brute = BruteForce(inst)
    assert brute.optimal_repairs("P") == brute.optimal_repairs("G") == brute.optimal_repairs("C")


@given(instances())
def test_pareto_witness_is_an_improvement(data):
    inst, _ = data
    for r in enumerate_repairs(inst):
        b = find_pareto_improvement(inst, r)
        if b is None:
            continue
        assert inst.is_consistent(b)
        added, removed = b - r, r - b
        assert any(all(inst.prefers_over(x, y) for y in removed) for x in added)


@given(instances())
def test_global_witness_is_an_improvement(data):
    inst, _ = data
    for r in enumerate_repairs(inst):
        b = find_global_improvement(inst, r)
        if b is None:
            continue
        assert inst.is_consistent(b) and b != r
        added = b - r
        assert all(any(inst.prefers_over(x, y) for x in added) for y in r - b)


def test_repair_kind_values():
    assert [k.value for k in RepairKind] == ["S", "P", "G", "C"]
    assert FactSet() == FactSet([])
