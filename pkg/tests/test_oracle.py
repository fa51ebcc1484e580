"""The oracle itself, checked on hand-made cases worked out on paper."""

from __future__ import annotations

import pytest

from prioqa.errors import OracleTooLarge
from prioqa.model import PrioritizedInstance
from prioqa.oracle import BruteForce, oracle_verdict
from prioqa.toy import atom_answer
from strategies import name_sets


def test_toy_values(toy):
    b = BruteForce(toy)
    assert len(b.reps) == 4
    assert len(b.optimal_local("P")) == 2
    assert name_sets(toy, b.optimal_repairs("G")) == {frozenset({"A(a)", "C(a)", "A(b)", "C(b)"})}
    assert b.optimal_repairs("C") == b.optimal_repairs("G")
    assert toy.names_of(b.grounded()) == ["A(b)", "C(b)"]


def test_toy_verdicts(toy):
    b = BruteForce(toy)
    assert oracle_verdict(b, atom_answer(toy, "A(a)"), "ar", "G")
    assert not oracle_verdict(b, atom_answer(toy, "A(a)"), "ar", "P")
    assert oracle_verdict(b, atom_answer(toy, "B(a)"), "brave", "P")
    assert not oracle_verdict(b, atom_answer(toy, "B(a)"), "brave", "G")
    assert oracle_verdict(b, atom_answer(toy, "A(b)"), "trivial-piar")


def test_pareto_differs_from_global():
    # x beats y and z beats w; {y, w} only loses to {x, z} as a pair
    inst = PrioritizedInstance.build(
        [("c1", ["x", "y"]), ("c2", ["z", "w"]), ("c3", ["x", "w"]), ("c4", ["y", "z"])],
        [("x", "y"), ("z", "w")])
    b = BruteForce(inst)
    assert name_sets(inst, b.optimal_repairs("P")) == {frozenset("xz"), frozenset("yw")}
    assert name_sets(inst, b.optimal_repairs("G")) == {frozenset("xz")}


def test_completion_differs_from_global():
    # three-fact conflict where only a completion breaks the tie
    inst = PrioritizedInstance.build([("c1", ["a", "b", "c"])], [("a", "b")])
    b = BruteForce(inst)
    assert name_sets(inst, b.optimal_repairs("S")) == {frozenset("ab"), frozenset("ac"), frozenset("bc")}
    # bc: a is preferred to b, so dropping a loses to ab under every completion
    assert frozenset("bc") not in name_sets(inst, b.optimal_repairs("C"))


def test_size_bound():
    inst = PrioritizedInstance.build([(f"c{i}", [f"a{i}", f"b{i}"]) for i in range(9)])
    with pytest.raises(OracleTooLarge):
        BruteForce(inst)
