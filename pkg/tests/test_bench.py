from __future__ import annotations

import csv
import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from prioqa.bench import (
    STATS_FIELDS,
    GenParams,
    RunRecord,
    gen_instance,
    instance_stats,
    run_suite,
    small_random_instance,
    write_cactus_csv,
    write_records_csv,
    write_stats_csv,
    write_summary_csv,
)
from prioqa.emit import emit_answer_facts, emit_instance_facts
from prioqa.errors import OracleTooLarge, ParamError
from prioqa.model import PrioritizedInstance, find_priority_cycle
from prioqa.oracle import BruteForce
from prioqa.toy import atom_answers

ALL_SEMANTICS = ["grounded", "trivial-piar", "s-brave", "s-ar", "s-iar",
                 "p-brave", "p-ar", "p-iar", "g-brave", "g-ar", "g-iar",
                 "c-brave", "c-ar", "c-iar"]


def rendered(params: GenParams) -> str:
    inst, answers = gen_instance(params)
    return emit_instance_facts(inst) + emit_answer_facts(inst, answers)


@pytest.mark.parametrize("mode", ["score", "nonscore", "rulelike", "total", "none"])
def test_generation_is_seed_deterministic(mode):
    p = GenParams(n_facts=100, conflict_ratio=0.2, prio_mode=mode, levels=5, seed=7)
    assert rendered(p) == rendered(GenParams(**vars(p)))
    assert rendered(p) != rendered(GenParams(**{**vars(p), "seed": 8}))


@pytest.mark.parametrize("kwargs", [
    {"orient_prob": 1.5},
    {"orient_prob": -0.1},
    {"levels": 0},
    {"conflict_ratio": 0.0},
    {"conflict_ratio": 1.2},
    {"prio_mode": "sideways"},
    {"nonbinary_count": 3, "binary": True},
    {"nonbinary_count": 3, "binary": False, "nonbinary_size": 2},
    {"n_facts": -1},
])
def test_bad_params(kwargs):
    with pytest.raises(ParamError):
        gen_instance(GenParams(**kwargs))


@given(st.integers(0, 10_000), st.sampled_from(["score", "nonscore", "rulelike", "total"]),
       st.booleans())
def test_generated_priority_is_acyclic_and_co_conflicting(seed, mode, binary):
    p = GenParams(n_facts=200, conflict_ratio=0.3, prio_mode=mode, binary=binary,
                  nonbinary_count=0 if binary else 5, seed=seed, n_answers=5)
    inst, answers = gen_instance(p)
    assert find_priority_cycle(inst.priority) is None
    co = set(inst.co_conflicting_pairs())
    assert all((a, b) in co or (b, a) in co for a, b in inst.priority)
    assert abs(len(inst.conflicting) / p.n_facts - p.conflict_ratio) <= 0.01
    for a in answers:
        assert all(1 <= len(c) <= 3 and inst.is_consistent(c) for c in a.causes)


def test_nonscore_orientation_share():
    inst, _ = gen_instance(GenParams(n_facts=4000, conflict_ratio=0.25, prio_mode="nonscore",
                                     orient_prob=0.8, seed=11))
    assert len(inst.conflicts) >= 500
    oriented = sum(1 for c in inst.conflicts
                   if any((a, b) in inst.priority for a in c.members for b in c.members))
    assert 0.75 <= oriented / len(inst.conflicts) <= 0.85


@pytest.mark.parametrize("binary", [True, False])
def test_score_priorities_make_optimal_kinds_coincide(binary):
    rng = np.random.default_rng(5)
    for _ in range(60):
        inst, _ = small_random_instance(rng, binary=binary, prio_mode="score")
        brute = BruteForce(inst)
        p = set(brute.optimal_local("P"))
        assert p == set(brute.optimal_local("G")) == set(brute.optimal_local("C"))


# -- suites --------------------------------------------------------------------


def test_toy_suite_resolves_everything(toy):
    records, summary = run_suite([("toy", toy, atom_answers(toy))], ALL_SEMANTICS)
    assert len(records) == len(atom_answers(toy)) * len(ALL_SEMANTICS)
    assert summary.unknown == 0
    assert all(r.verdict in ("yes", "no") for r in records)


def test_tiny_budget_leaves_direct_g_decisions_unknown(toy):
    records, summary = run_suite([("toy", toy, atom_answers(toy))], ["g-brave", "g-ar"], budget=1,
                                 tiered=False)
    assert summary.unknown > 0
    assert all(r.verdict == "unknown" for r in records if r.timeout)


def suite_key(records):
    return [(r.instance, r.answer_id, r.semantics, r.verdict, r.tier) for r in records]


def test_suite_is_repeatable_and_order_stable():
    work = []
    for seed in range(4):
        inst, answers = gen_instance(GenParams(n_facts=60, conflict_ratio=0.4, seed=seed, n_answers=6))
        work.append((f"i{seed}", inst, answers))
    sems = ["grounded", "p-ar", "g-brave", "c-ar"]
    first, _ = run_suite(work, sems)
    again, _ = run_suite(work, sems)
    pooled, _ = run_suite(work, sems, jobs=2)
    assert suite_key(first) == suite_key(again) == suite_key(pooled)


# -- statistics and CSV --------------------------------------------------------


def test_toy_stats(toy):
    row = instance_stats(toy, oracle=True)
    assert row["in_all_repairs"] == 0
    assert row["gamma_empty_extra"] == 1
    assert row["step_sizes"] == "1;1"
    assert row["grounded"] == 2
    assert row["inter_p_minus_g"] == 0


def test_empty_instance_stats():
    row = instance_stats(PrioritizedInstance.build([]), oracle=True)
    numeric = {k: v for k, v in row.items() if k not in ("instance", "step_sizes", "grounded_ms")}
    assert all(v == 0 for v in numeric.values())


def test_oracle_stats_refuse_large_instances():
    inst, _ = gen_instance(GenParams(n_facts=200, conflict_ratio=0.5, seed=1))
    with pytest.raises(OracleTooLarge):
        instance_stats(inst, oracle=True)


def test_csv_headers(toy):
    records, summary = run_suite([("toy", toy, atom_answers(toy))], ["grounded", "p-ar"])
    out = io.StringIO()
    write_records_csv(records, out)
    rows = list(csv.reader(io.StringIO(out.getvalue())))
    assert tuple(rows[0]) == RunRecord.FIELDS and len(rows) == len(records) + 1

    out = io.StringIO()
    write_cactus_csv(records, out)
    rows = list(csv.DictReader(io.StringIO(out.getvalue())))
    for sem in ("grounded", "p-ar"):
        times = [float(r["elapsed_ms"]) for r in rows if r["semantics"] == sem]
        assert times == sorted(times) and len(times) == len(atom_answers(toy))

    out = io.StringIO()
    write_summary_csv(summary, out)
    assert out.getvalue().splitlines()[0] == "semantics,Trivial,Grounded,ParetoBound,Direct,yes,no,unknown"

    out = io.StringIO()
    write_stats_csv([instance_stats(toy, label="toy")], out)
    assert out.getvalue().splitlines()[0] == ",".join(STATS_FIELDS)
