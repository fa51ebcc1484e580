"""Synthetic instances, batch runs and CSV statistics.

Generated instances imitate the uXcY benchmark shape: a fixed share of the
facts take part in conflicts, the rest are conflict-free.  Priorities come
from levels (score-structured), from random orientation of conflict pairs
(non-score), or from a ranking of predicate groups (rule-like analogue).
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .attacks import GroundedResult, grounded_repair
from .errors import ParamError
from .factset import FactSet
from .model import AnswerCauses, PrioritizedInstance, find_priority_cycle
from .sat import DEFAULT_BUDGET
from .solver import YES, UNKNOWN, Semantics, Solver

PRIO_MODES = ("score", "nonscore", "rulelike", "total", "none")


@dataclass
class GenParams:
    n_facts: int = 1000
    conflict_ratio: float = 0.2
    binary: bool = True
    nonbinary_count: int = 0
    nonbinary_size: int = 3
    # binary conflicts per conflicting fact, times two (i.e. average degree)
    avg_degree: float = 1.5
    prio_mode: str = "nonscore"
    levels: int = 5
    orient_prob: float = 0.8
    groups: int = 10
    n_answers: int = 20
    seed: int = 0

    def check(self) -> None:
        if self.n_facts < 0:
            raise ParamError("n_facts must be non-negative")
        if not 0.0 < self.conflict_ratio <= 1.0:
            raise ParamError("conflict_ratio must lie in (0, 1]")
        if not 0.0 <= self.orient_prob <= 1.0:
            raise ParamError("orient_prob must lie in [0, 1]")
        if self.levels < 1:
            raise ParamError("levels must be at least 1")
        if self.prio_mode not in PRIO_MODES:
            raise ParamError(f"prio_mode must be one of {PRIO_MODES}")
        if self.nonbinary_count and (self.binary or self.nonbinary_size < 3):
            raise ParamError("non-binary conflicts need binary=False and size >= 3")
        if self.avg_degree <= 0:
            raise ParamError("avg_degree must be positive")
        if self.groups < 1:
            raise ParamError("groups must be at least 1")


def _orient(pairs: Iterable[tuple[int, int]], p: GenParams, rng: np.random.Generator,
            n: int) -> list[tuple[int, int]]:
    """Priority edges over the given unordered co-conflicting pairs."""
    pairs = list(pairs)
    mode = p.prio_mode
    if mode == "none" or not pairs:
        return []
    if mode in ("score", "total"):
        level = rng.permutation(n) if mode == "total" else rng.integers(0, p.levels, size=n)
        out = []
        for a, b in pairs:
            if level[a] > level[b]:
                out.append((a, b))
            elif level[b] > level[a]:
                out.append((b, a))
        return out
    if mode == "rulelike":
        group = rng.integers(0, p.groups, size=n)
        rank = rng.permutation(p.groups)
        out = []
        for a, b in pairs:
            ra, rb = rank[group[a]], rank[group[b]]
            if ra != rb:
                out.append((a, b) if ra > rb else (b, a))
        return out

    # non-score: orient each pair with the given probability, in a random
    # direction, skipping orientations that would close a cycle
    coin = rng.random(len(pairs))
    flip = rng.random(len(pairs)) < 0.5
    succ: dict[int, list[int]] = {}
    out = []

    def reaches(src: int, dst: int) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    for k, (a, b) in enumerate(pairs):
        if coin[k] >= p.orient_prob:
            continue
        if flip[k]:
            a, b = b, a
        if reaches(b, a):
            continue
        succ.setdefault(a, []).append(b)
        out.append((a, b))
    return out


def _sample_conflicts(p: GenParams, rng: np.random.Generator, conflicting: np.ndarray) -> list[tuple[int, ...]]:
    k = len(conflicting)
    if k < 2:
        return []
    big: list[tuple[int, ...]] = []
    inside_big: set[tuple[int, int]] = set()
    seen_big: set[tuple[int, ...]] = set()
    for _ in range(p.nonbinary_count):
        if p.nonbinary_size > k:
            break
        members = tuple(sorted(int(x) for x in rng.choice(conflicting, p.nonbinary_size, replace=False)))
        if members in seen_big:
            continue
        seen_big.add(members)
        big.append(members)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                inside_big.add((members[i], members[j]))
    covered = {a for c in big for a in c}

    edges: set[tuple[int, int]] = set()

    def add(a: int, b: int) -> bool:
        e = (a, b) if a < b else (b, a)
        if a == b or e in edges or e in inside_big:
            return False
        edges.add(e)
        return True

    # every designated fact gets at least one conflict
    loose = [int(x) for x in rng.permutation(conflicting) if int(x) not in covered]
    for i in range(0, len(loose) - 1, 2):
        add(loose[i], loose[i + 1])
    if len(loose) % 2 == 1:
        last = loose[-1]
        for _ in range(100):
            if add(last, int(rng.choice(conflicting))):
                break

    target = max(len(edges), math.ceil(k * p.avg_degree / 2) - len(big))
    max_edges = k * (k - 1) // 2 - len(inside_big)
    target = min(target, max_edges)
    stalls = 0
    while len(edges) < target and stalls < 1000:
        batch = rng.choice(conflicting, size=(2 * (target - len(edges)) + 8, 2))
        before = len(edges)
        for a, b in batch:
            if len(edges) >= target:
                break
            add(int(a), int(b))
        stalls = stalls + 1 if len(edges) == before else 0
    return big + sorted(edges)


def _sample_answers(p: GenParams, rng: np.random.Generator, inst: PrioritizedInstance,
                    conflicting: np.ndarray) -> list[AnswerCauses]:
    n = p.n_facts
    free = np.setdiff1d(np.arange(n), conflicting)
    answers = []
    for q in range(p.n_answers):
        causes: list[FactSet] = []
        for _ in range(int(rng.integers(1, 3))):
            for _attempt in range(20):
                size = int(rng.integers(1, 4))
                picks = set()
                for _ in range(size):
                    pool = conflicting if (len(free) == 0 or rng.random() < 0.7) else free
                    if len(pool):
                        picks.add(int(rng.choice(pool)))
                cause = FactSet(picks)
                if cause and inst.is_consistent(cause) and \
                        not any(c <= cause or cause <= c for c in causes):
                    causes.append(cause)
                    break
        if causes:
            answers.append(AnswerCauses(f"q{q}", tuple(causes)))
    return answers


def gen_instance(params: GenParams) -> tuple[PrioritizedInstance, list[AnswerCauses]]:
    """Seed-deterministic synthetic instance and candidate answers."""
    params.check()
    rng = np.random.default_rng(params.seed)
    n = params.n_facts
    k = int(round(params.conflict_ratio * n))
    conflicting = np.sort(rng.choice(n, size=k, replace=False)) if k else np.zeros(0, dtype=np.int64)
    confs = _sample_conflicts(params, rng, conflicting)

    pairs = []
    seen = set()
    for c in confs:
        for i in range(len(c)):
            for j in range(i + 1, len(c)):
                if (c[i], c[j]) not in seen:
                    seen.add((c[i], c[j]))
                    pairs.append((c[i], c[j]))
    pref = _orient(pairs, params, rng, n)

    names = [f"f{i}" for i in range(n)]
    inst = PrioritizedInstance.build(
        [(f"c{j}", [names[a] for a in c]) for j, c in enumerate(confs)],
        [(names[a], names[b]) for a, b in pref],
        names,
    )
    if find_priority_cycle(inst.priority) is not None:
        raise AssertionError("generator produced a cyclic priority")
    return inst, _sample_answers(params, rng, inst, conflicting)


def free_pairs(instance: PrioritizedInstance) -> int:
    """Co-conflicting pairs left unoriented by the priority."""
    pr = instance.priority
    return sum(1 for a, b in instance.co_conflicting_pairs() if (a, b) not in pr and (b, a) not in pr)


def small_random_instance(
    rng: np.random.Generator,
    binary: bool = True,
    prio_mode: str = "nonscore",
    max_facts: int = 12,
    max_conflicts: int = 8,
    max_size: int = 4,
    max_free_pairs: int | None = 12,
    n_answers: int = 4,
) -> tuple[PrioritizedInstance, list[AnswerCauses]]:
    """Tiny random instance for oracle comparisons.

    Conflicts are drawn over at most ``max_facts`` conflicting facts and
    kept inclusion-minimal; a couple of conflict-free facts are added.
    Draws whose unoriented pairs exceed ``max_free_pairs`` are rejected so
    the completion oracle stays cheap.
    """
    while True:
        n = int(rng.integers(2, max_facts + 1))
        m = int(rng.integers(1, max_conflicts + 1))
        confs: list[frozenset[int]] = []
        for _ in range(m):
            size = 2 if binary or rng.random() < 0.4 else int(rng.integers(3, max_size + 1))
            size = min(size, n)
            c = frozenset(int(x) for x in rng.choice(n, size=size, replace=False))
            if any(d <= c or c <= d for d in confs):
                continue
            confs.append(c)
        used = sorted(set().union(*confs))
        remap = {a: i for i, a in enumerate(used)}
        confs = [frozenset(remap[a] for a in c) for c in confs]
        n = len(used)
        pairs = sorted({(a, b) for c in confs for a in c for b in c if a < b})
        p = GenParams(n_facts=n, prio_mode=prio_mode, levels=int(rng.integers(2, 5)),
                      orient_prob=0.8, binary=binary)
        pref = _orient(pairs, p, rng, n)
        extra = int(rng.integers(0, 3))
        names = [f"f{i}" for i in range(n + extra)]
        inst = PrioritizedInstance.build(
            [(f"c{j}", [names[a] for a in sorted(c)]) for j, c in enumerate(confs)],
            [(names[a], names[b]) for a, b in pref],
            names,
        )
        if max_free_pairs is not None and free_pairs(inst) > max_free_pairs:
            continue
        answers = []
        for q in range(n_answers):
            causes: list[FactSet] = []
            for _ in range(int(rng.integers(1, 3))):
                size = int(rng.integers(1, 3))
                cause = FactSet(int(x) for x in rng.choice(n + extra, size=min(size, n + extra), replace=False))
                if inst.is_consistent(cause) and not any(c <= cause or cause <= c for c in causes):
                    causes.append(cause)
            if causes:
                answers.append(AnswerCauses(f"q{q}", tuple(causes)))
        return inst, answers


# -- suites ----------------------------------------------------------------


@dataclass
class RunRecord:
    instance: str
    answer_id: str
    semantics: str
    verdict: str
    tier: str
    elapsed_ms: float
    nodes: int
    timeout: bool

    FIELDS = ("instance", "answer_id", "semantics", "verdict", "tier", "elapsed_ms", "nodes", "timeout")

    def row(self) -> list:
        return [self.instance, self.answer_id, self.semantics, self.verdict, self.tier,
                f"{self.elapsed_ms:.3f}", self.nodes, int(self.timeout)]


@dataclass
class SuiteSummary:
    # semantics label -> column -> count; columns are the tier names plus yes/no/unknown
    by_semantics: dict[str, dict[str, int]] = field(default_factory=dict)
    grounded_steps: dict[str, list[int]] = field(default_factory=dict)
    total: int = 0
    unknown: int = 0

    def table(self) -> list[dict]:
        cols = ("Trivial", "Grounded", "ParetoBound", "Direct", "yes", "no", "unknown")
        return [{"semantics": s, **{c: counts.get(c, 0) for c in cols}}
                for s, counts in self.by_semantics.items()]


def _run_one(job) -> tuple[list[RunRecord], list[int]]:
    label, instance, answers, sems, budget, localize, binary, tiered = job
    solver = Solver(instance, localize=localize, binary=binary, budget=budget)
    records = []
    for a in answers:
        for s in sems:
            d = solver.decide(a, s, tiered)
            records.append(RunRecord(label, d.answer_id, d.semantics, d.verdict, d.tier,
                                     d.elapsed_ms, d.search_nodes, d.verdict == UNKNOWN))
    return records, [len(s) for s in solver.grounded.steps]


def run_suite(
    instances: Sequence[tuple[str, PrioritizedInstance, Sequence[AnswerCauses]]],
    semantics: Sequence[Semantics | str],
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    localize: str = "auto",
    binary: bool = False,
    tiered: bool = True,
) -> tuple[list[RunRecord], SuiteSummary]:
    """Decide every (answer, semantics) pair of every instance.

    With ``jobs > 1`` instances are spread over worker processes.  Records
    come back in input order whatever the completion order.
    """
    sems = [Semantics.parse(s) if isinstance(s, str) else s for s in semantics]
    work = [(label, inst, list(ans), sems, budget, localize, binary and inst.binary, tiered)
            for label, inst, ans in instances]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]

    summary = SuiteSummary()
    records: list[RunRecord] = []
    for (label, _, _), (recs, steps) in zip(instances, results):
        summary.grounded_steps[label] = steps
        for r in recs:
            counts = summary.by_semantics.setdefault(r.semantics, {})
            counts[r.tier] = counts.get(r.tier, 0) + 1
            counts[r.verdict] = counts.get(r.verdict, 0) + 1
            summary.total += 1
            summary.unknown += r.timeout
        records.extend(recs)
    return records, summary


# -- statistics ------------------------------------------------------------


STATS_FIELDS = ("instance", "facts", "conflicting", "conflicts", "in_all_repairs",
                "gamma_empty_extra", "steps", "step_sizes", "grounded", "grounded_ms",
                "inter_p_minus_g", "inter_g_minus_p", "inter_c_minus_g")


def instance_stats(
    instance: PrioritizedInstance,
    grounded: GroundedResult | None = None,
    oracle: bool = False,
    label: str = "",
) -> dict:
    """One row of instance statistics.

    ``in_all_repairs`` counts conflict-free facts (they are in every plain
    repair), ``gamma_empty_extra`` the conflicting facts nobody attacks.
    The oracle columns compare the intersections of the optimal repairs
    with the grounded repair and with each other.
    """
    if grounded is None:
        start = time.perf_counter()
        grounded = grounded_repair(instance)
        ms = (time.perf_counter() - start) * 1000.0
    else:
        ms = float("nan")
    steps = [len(s) for s in grounded.steps]
    row = {
        "instance": label,
        "facts": len(instance.universe),
        "conflicting": len(instance.conflicting),
        "conflicts": len(instance.conflicts),
        "in_all_repairs": len(instance.unconflicted),
        "gamma_empty_extra": steps[0] if steps else 0,
        "steps": len(steps) if any(steps) else 0,
        "step_sizes": ";".join(str(x) for x in steps) if any(steps) else "",
        "grounded": len(grounded.grounded),
        "grounded_ms": round(ms, 3),
        "inter_p_minus_g": "",
        "inter_g_minus_p": "",
        "inter_c_minus_g": "",
    }
    if oracle:
        from .oracle import BruteForce

        brute = BruteForce(instance)
        inter = {}
        for kind in "PGC":
            m = -1
            for r in brute.optimal_local(kind):
                m &= brute.to_global(r).mask
            inter[kind] = m & instance.universe.mask
        g = grounded.grounded.mask
        row["inter_p_minus_g"] = bin(inter["P"] & ~g).count("1")
        row["inter_g_minus_p"] = bin(inter["G"] & ~inter["P"]).count("1")
        row["inter_c_minus_g"] = bin(inter["C"] & ~inter["G"]).count("1")
    return row


def write_stats_csv(rows: Iterable[dict], out: TextIO) -> None:
    w = csv.DictWriter(out, fieldnames=STATS_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def write_records_csv(records: Iterable[RunRecord], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RunRecord.FIELDS)
    for r in records:
        w.writerow(r.row())


def write_cactus_csv(records: Iterable[RunRecord], out: TextIO) -> None:
    """Per semantics, solved decisions sorted by time: semantics, rank, elapsed_ms, cumulative_ms."""
    by_sem: dict[str, list[float]] = {}
    for r in records:
        if not r.timeout:
            by_sem.setdefault(r.semantics, []).append(r.elapsed_ms)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("semantics", "rank", "elapsed_ms", "cumulative_ms"))
    for sem in sorted(by_sem):
        total = 0.0
        for rank, t in enumerate(sorted(by_sem[sem]), start=1):
            total += t
            w.writerow((sem, rank, f"{t:.3f}", f"{total:.3f}"))


def write_summary_csv(summary: SuiteSummary, out: TextIO) -> None:
    rows = summary.table()
    cols = ("semantics", "Trivial", "Grounded", "ParetoBound", "Direct", "yes", "no", "unknown")
    w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def params_dict(p: GenParams) -> dict:
    return asdict(p)
