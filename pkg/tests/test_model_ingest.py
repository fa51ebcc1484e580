from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prioqa import errors
from prioqa.factset import FactSet, ids_of, mask_of
from prioqa.ingest import load_answers, load_instance, parse_facts, quote, unquote
from prioqa.model import LENIENT, STRICT, PrioritizedInstance, find_priority_cycle, restrict
from prioqa.toy import CONFLICT_TEXT, PREF_TEXT

BIN = "conf(c1). inConf(c1,a). inConf(c1,b).\n"


# -- fact sets ---------------------------------------------------------------

@given(st.sets(st.integers(0, 200)))
def test_mask_round_trip(ids):
    assert set(ids_of(mask_of(ids))) == ids
    assert set(FactSet(ids)) == ids


@given(st.sets(st.integers(0, 64)), st.sets(st.integers(0, 64)))
def test_factset_algebra_matches_python_sets(a, b):
    fa, fb = FactSet(a), FactSet(b)
    assert set(fa | fb) == a | b
    assert set(fa & fb) == a & b
    assert set(fa - fb) == a - b
    assert (fa <= fb) == (a <= b)
    assert len(fa) == len(a)


# -- parsing -----------------------------------------------------------------

def test_toy_files_parse():
    inst = load_instance(CONFLICT_TEXT, PREF_TEXT)
    assert len(inst.universe) == 7
    assert len(inst.conflicts) == 6
    assert len(inst.priority) == 4
    assert inst.binary


def test_comments_and_whitespace_are_ignored():
    bag = parse_facts("% header\nconf(c1).   inConf( c1 , a ). % trailing\n")
    assert [f.pred for f in bag.facts] == ["conf", "inConf"]
    assert bag.facts[1].args == ("c1", "a")


def test_syntax_error_reports_position():
    with pytest.raises(errors.FactSyntaxError) as info:
        parse_facts("conf(c1).\ninConf(c1 a).", source="x.lp")
    assert (info.value.line, info.value.col) == (2, 11)
    assert str(info.value).startswith("x.lp:2:11:")


def test_unknown_predicate_and_arity():
    with pytest.raises(errors.UnknownPredicate):
        parse_facts("conflict(c1).")
    with pytest.raises(errors.ArityError):
        parse_facts("pref(a).")


def test_unexpected_character():
    with pytest.raises(errors.FactSyntaxError):
        parse_facts("conf(c1)!")


def test_quoted_names():
    bag = parse_facts('inConf(c1,"A(a)"). pref("x\\"y",b).')
    assert bag.facts[0].args == ("c1", "A(a)")
    assert bag.facts[1].args == ('x"y', "b")


@given(st.text(alphabet=st.characters(blacklist_characters="\n\r"), min_size=1, max_size=12))
def test_quote_round_trip(name):
    token = quote(name)
    if token.startswith('"'):
        assert unquote(token) == name
    else:
        assert token == name
    assert parse_facts(f"conf({token}).").facts[0].args == (name,)


# -- validation ----------------------------------------------------------------

def test_cyclic_priority_rejected_in_both_modes():
    for mode in (STRICT, LENIENT):
        with pytest.raises(errors.CyclicPriority):
            load_instance(BIN, "pref(a,b). pref(b,a).", mode)


def test_pref_between_unrelated_facts():
    text = BIN + "conf(c2). inConf(c2,c). inConf(c2,d)."
    with pytest.raises(errors.PrefNotCoConflicting):
        load_instance(text, "pref(a,c).")
    assert not load_instance(text, "pref(a,c).", LENIENT).priority


def test_non_minimal_and_duplicate_conflicts():
    sup = BIN + "conf(c2). inConf(c2,a). inConf(c2,b). inConf(c2,c)."
    dup = BIN + "conf(c2). inConf(c2,b). inConf(c2,a)."
    for text in (sup, dup):
        with pytest.raises(errors.NonMinimalConflict):
            load_instance(text)
        assert len(load_instance(text, mode=LENIENT).conflicts) == 1


def test_self_inconsistent_fact_is_dropped():
    inst = load_instance(BIN + "conf(c2). inConf(c2,z).")
    assert inst.names_of(inst.universe) == ["a", "b"]


def test_undeclared_conflict():
    with pytest.raises(errors.ValidationError):
        load_instance("inConf(c1,a). inConf(c1,b).")
    assert len(load_instance("inConf(c1,a). inConf(c1,b).", mode=LENIENT).conflicts) == 1


def test_cause_checks():
    inst = load_instance(BIN)
    with pytest.raises(errors.InconsistentCause):
        load_answers("cause(k1). inCause(k1,a). inCause(k1,b).", inst)
    with pytest.raises(errors.EmptyCause):
        load_answers("cause(k1).", inst, LENIENT)
    with pytest.raises(errors.DanglingCauseFact):
        load_answers("inCause(k1,a).", inst)
    with pytest.raises(errors.ValidationError):
        load_answers("cause(k1). inCause(k1,a). cause(k2). inCause(k2,a). inCause(k2,z).", inst)
    _, answers = load_answers("cause(k1). inCause(k1,a). cause(k2). inCause(k2,a). inCause(k2,z).",
                              inst, LENIENT)
    assert len(answers[0].causes) == 1


def test_answers_grouping_and_new_facts():
    inst = load_instance(BIN)
    text = "answer(q1,k1). cause(k1). inCause(k1,a). answer(q2,k2). cause(k2). inCause(k2,z)."
    inst2, answers = load_answers(text, inst)
    assert [a.answer_id for a in answers] == ["q1", "q2"]
    assert "z" in inst2.names_of(inst2.unconflicted)
    assert inst.names_of(inst.universe) == ["a", "b"]


def test_priority_cycle_finder():
    assert find_priority_cycle([(0, 1), (1, 2)]) is None
    cyc = find_priority_cycle([(0, 1), (1, 2), (2, 0)])
    assert cyc is not None and set(cyc) >= {0, 1, 2}


def test_restrict_keeps_inner_conflicts_only(toy):
    keep = toy.facts(["A(a)", "B(a)", "C(a)"])
    sub = restrict(toy, keep)
    assert sorted(sorted(sub.names_of(c.members)) for c in sub.conflicts) == [
        ["A(a)", "B(a)"], ["B(a)", "C(a)"]]
    assert sub.names_of(sub.priority and {a for a, _ in sub.priority}) == ["A(a)"]


def test_structural_equality_ignores_ids():
    a = PrioritizedInstance.build([("c1", ["x", "y"])], [("x", "y")])
    b = PrioritizedInstance.build([("k", ["y", "x"])], [("x", "y")], ["y", "x"])
    assert a == b
