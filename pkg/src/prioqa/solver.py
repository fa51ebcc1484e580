"""Per-answer decisions under every supported semantics.

Direct decisions encode "some optimal repair satisfying a side condition
exists" as a SAT problem whose models are the Pareto-optimal repairs (or
all repairs for S).  Pareto optimality is enough to be exact for P; for G
and C the models are enumerated and each is checked with the stronger test.

``decide`` adds the cheap tiers in front: unattacked facts, the grounded
repair, and for G the bounds obtained from P.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .attacks import (
    AttackRelation,
    compute_attacks,
    compute_attacks_binary,
    grounded_repair,
    holds_in,
    trivially_piar,
)
from .errors import ModeMismatch, SearchBudgetExceeded
from .factset import FactSet, ids_of
from .localize import ReachMode, component, reach
from .model import AnswerCauses, PrioritizedInstance, restrict
from .optimality import RepairKind, completion_witness, find_global_improvement
from .sat import DEFAULT_BUDGET, Budget, SatSolver

YES, NO, UNKNOWN = "yes", "no", "unknown"

LOCALIZE_CHOICES = ("off", "strong", "weak", "auto")


class Tier(enum.Enum):
    TRIVIAL = "Trivial"
    GROUNDED = "Grounded"
    PARETO_BOUND = "ParetoBound"
    DIRECT = "Direct"


@dataclass(frozen=True)
class Semantics:
    """``mode`` is brave, ar, iar, grounded or trivial-piar; ``kind`` only for the first three."""

    mode: str
    kind: RepairKind | None = None

    @classmethod
    def parse(cls, label: str) -> Semantics:
        label = label.strip().lower()
        if label in ("grounded", "trivial-piar"):
            return cls(label)
        kind, _, mode = label.partition("-")
        if mode not in ("brave", "ar", "iar") or kind.upper() not in "SPGC" or len(kind) != 1:
            raise ValueError(f"unknown semantics {label!r}")
        return cls(mode, RepairKind(kind.upper()))

    @property
    def label(self) -> str:
        if self.kind is None:
            return self.mode
        return f"{self.kind.value.lower()}-{self.mode}"

    def __str__(self) -> str:
        return self.label


ALL_SEMANTICS = [Semantics("grounded"), Semantics("trivial-piar")] + [
    Semantics(m, k) for k in RepairKind for m in ("brave", "ar", "iar")
]
DEFAULT_GRID = [Semantics("grounded")] + [
    Semantics(m, RepairKind(k)) for k in "PGC" for m in ("brave", "ar")
]


@dataclass
class Decision:
    answer_id: str
    semantics: str
    verdict: str
    tier: str
    localized_facts: int = 0
    search_nodes: int = 0
    elapsed_ms: float = 0.0
    reason: str = ""

    CSV_FIELDS = ("answer_id", "semantics", "verdict", "tier", "localized_facts",
                  "search_nodes", "elapsed_ms")

    def to_dict(self) -> dict:
        d = asdict(self)
        if not d["reason"]:
            del d["reason"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def csv_row(self) -> list:
        return [self.answer_id, self.semantics, self.verdict, self.tier, self.localized_facts,
                self.search_nodes, f"{self.elapsed_ms:.3f}"]


def decisions_to_csv(decisions: Iterable[Decision]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(Decision.CSV_FIELDS)
    for d in decisions:
        w.writerow(d.csv_row())
    return buf.getvalue()


class _Unknown(Exception):
    pass


class Solver:
    """Decision engine bound to one preprocessed instance.

    ``localize`` is off, strong, weak or auto (weak for G, strong for P and
    C).  Strong reachability is refused for G.  With ``binary`` set (binary
    instances only) attacks, reachability and the SAT encoding take their
    binary-conflict shortcuts.
    """

    def __init__(
        self,
        instance: PrioritizedInstance,
        localize: str = "auto",
        binary: bool = False,
        budget: int = DEFAULT_BUDGET,
    ):
        if localize not in LOCALIZE_CHOICES:
            raise ValueError(f"localize must be one of {LOCALIZE_CHOICES}")
        if binary and not instance.binary:
            raise ModeMismatch("binary shortcuts requested on an instance with non-binary conflicts")
        self.instance = instance
        self.localize = localize
        self.binary = binary
        self.budget_limit = budget
        self.attacks = self._attacks(instance)
        self.grounded = grounded_repair(instance, self.attacks)
        self.gamma_empty = trivially_piar(instance, self.attacks)
        # (fact, kind) -> fact lies in every optimal repair
        self._fact_memo: dict[tuple[int, RepairKind], bool] = {}
        self._preferred_by: dict[int, list[int]] = {}
        for a, b in sorted(instance.priority):
            self._preferred_by.setdefault(b, []).append(a)

    def _attacks(self, inst: PrioritizedInstance) -> AttackRelation:
        return compute_attacks_binary(inst) if self.binary else compute_attacks(inst)

    # -- localization ------------------------------------------------------

    def reach_mode(self, kind: RepairKind) -> ReachMode | None:
        loc = self.localize
        if loc == "off":
            return None
        if loc == "strong" and kind is RepairKind.G:
            raise ModeMismatch("strong reachability is not used for globally-optimal repairs")
        if self.binary:
            return ReachMode.BINARY
        if loc == "auto":
            return ReachMode.WEAK if kind is RepairKind.G else ReachMode.STRONG
        return ReachMode(loc)

    def localized(self, seed: FactSet, kind: RepairKind) -> tuple[PrioritizedInstance, list]:
        """Sub-instance for ``seed`` plus ordering pairs the completion check must respect."""
        if self.localize == "off":
            return self.instance, []
        if kind is RepairKind.S:
            keep = component(self.instance, seed)
        else:
            keep = reach(self.instance, seed, self.reach_mode(kind))
        order = self.outside_paths(keep) if kind is RepairKind.C else []
        return restrict(self.instance, keep), order

    def outside_paths(self, keep: FactSet) -> list[tuple[int, int]]:
        """Pairs (a, b) of kept facts joined by a priority path through dropped facts.

        Strong reachability may cut such paths; a completion of the cut
        relation could then order ``b`` above ``a``, which no completion of
        the full relation allows.  Weak reachability keeps every predecessor
        of a kept fact, so this list is empty for it.
        """
        km = keep.mask
        pred = self._preferred_by
        out = set()
        for b in ids_of(km):
            stack = [z for z in pred.get(b, ()) if not (km >> z) & 1]
            seen = set(stack)
            while stack:
                z = stack.pop()
                for y in pred.get(z, ()):
                    if (km >> y) & 1:
                        out.add((y, b))
                    elif y not in seen:
                        seen.add(y)
                        stack.append(y)
        return sorted(out)

    # -- core search -------------------------------------------------------

    def find_optimal_repair(
        self,
        sub: PrioritizedInstance,
        kind: RepairKind,
        budget: Budget,
        include: FactSet | None = None,
        avoid: Sequence[FactSet] = (),
        order: Sequence[tuple[int, int]] = (),
    ) -> FactSet | None:
        """An optimal repair of ``sub`` containing ``include`` and no set of ``avoid``."""
        facts = ids_of(sub.conflicting.mask)
        var = {a: k + 1 for k, a in enumerate(facts)}
        sat = SatSolver(budget)
        sat.nvars = len(facts)
        for c in sub.conflicts:
            sat.add_clause([-var[a] for a in c.members])

        # each excluded fact needs a defeating set inside the repair: any
        # blocking conflict for S, an attack for the other kinds
        if kind is RepairKind.S:
            edges: dict[int, list[tuple[int, ...]]] = {}
            for c in sub.conflicts:
                for a in c.members:
                    edges.setdefault(a, []).append(tuple(b for b in c.members if b != a))
        else:
            rel = self._attacks(sub)
            edges = {a: rel.attackers_of(a) for a in facts}
        for a in facts:
            clause = [var[a]]
            for e in edges.get(a, ()):
                if self.binary:
                    clause.append(var[e[0]])
                else:
                    y = sat.new_var()
                    clause.append(y)
                    for b in e:
                        sat.add_clause([-y, var[b]])
            sat.add_clause(clause)

        for cause in avoid:
            sat.add_clause([-var[a] for a in cause if a in var])
        assume = [var[a] for a in include if a in var] if include is not None else []

        for model in sat.models(range(1, len(facts) + 1), assume):
            r = FactSet(a for a in facts if model[var[a]]) | sub.unconflicted
            if kind in (RepairKind.S, RepairKind.P):
                return r
            if kind is RepairKind.G:
                if find_global_improvement(sub, r, budget) is None:
                    return r
            elif completion_witness(sub, r, budget, order) is not None:
                return r
        return None

    def _brave(self, answer: AnswerCauses, kind: RepairKind, budget: Budget) -> tuple[bool, int]:
        sub, order = self.localized(answer.support, kind)
        for cause in sorted(answer.causes, key=lambda c: (len(c), c.mask)):
            if self.find_optimal_repair(sub, kind, budget, include=cause, order=order) is not None:
                return True, len(sub.universe)
        return False, len(sub.universe)

    def _ar(self, answer: AnswerCauses, kind: RepairKind, budget: Budget) -> tuple[bool, int]:
        sub, order = self.localized(answer.support, kind)
        found = self.find_optimal_repair(sub, kind, budget, avoid=answer.causes, order=order)
        return found is None, len(sub.universe)

    def fact_in_all(self, a: int, kind: RepairKind, budget: Budget) -> bool:
        """``a`` belongs to every optimal repair of the given kind."""
        key = (a, kind)
        if key in self._fact_memo:
            return self._fact_memo[key]
        if a in self.instance.unconflicted:
            result = True
        elif kind is not RepairKind.S and a in self.grounded.grounded:
            result = True
        else:
            single = FactSet([a])
            sub, order = self.localized(single, kind)
            result = self.find_optimal_repair(sub, kind, budget, avoid=[single], order=order) is None
        self._fact_memo[key] = result
        return result

    def _iar(self, answer: AnswerCauses, kind: RepairKind, budget: Budget) -> tuple[bool, int]:
        """Unknown per-fact results only matter when no cause settles the verdict."""
        undecided = False
        for cause in sorted(answer.causes, key=lambda c: (len(c), c.mask)):
            cause_ok = True
            cause_unknown = False
            for a in cause:
                try:
                    inside = self.fact_in_all(a, kind, budget)
                except SearchBudgetExceeded:
                    cause_unknown = True
                    continue
                if not inside:
                    cause_ok = False
                    break
            if cause_ok and not cause_unknown:
                return True, len(answer.support)
            if cause_ok and cause_unknown:
                undecided = True
        if undecided:
            raise _Unknown
        return False, len(answer.support)

    # -- public entry points -----------------------------------------------

    def _timed(self, answer: AnswerCauses, sem: Semantics, tier: Tier, fn) -> Decision:
        budget = Budget(self.budget_limit)
        start = time.perf_counter()
        try:
            verdict, size = fn(budget)
            out = Decision(answer.answer_id, sem.label, YES if verdict else NO, tier.value, size)
        except (SearchBudgetExceeded, _Unknown):
            out = Decision(answer.answer_id, sem.label, UNKNOWN, tier.value,
                           reason=f"search budget of {self.budget_limit} nodes exhausted")
        out.search_nodes = budget.used
        out.elapsed_ms = (time.perf_counter() - start) * 1000.0
        return out

    def decide_brave(self, answer: AnswerCauses, kind) -> Decision:
        kind = RepairKind(kind)
        return self._timed(answer, Semantics("brave", kind), Tier.DIRECT,
                           lambda b: self._brave(answer, kind, b))

    def decide_ar(self, answer: AnswerCauses, kind) -> Decision:
        kind = RepairKind(kind)
        return self._timed(answer, Semantics("ar", kind), Tier.DIRECT,
                           lambda b: self._ar(answer, kind, b))

    def decide_iar(self, answer: AnswerCauses, kind) -> Decision:
        kind = RepairKind(kind)
        return self._timed(answer, Semantics("iar", kind), Tier.DIRECT,
                           lambda b: self._iar(answer, kind, b))

    def decide_direct(self, answer: AnswerCauses, sem: Semantics) -> Decision:
        if sem.mode == "grounded":
            return self._timed(answer, sem, Tier.GROUNDED,
                               lambda b: (holds_in(self.grounded.grounded, answer), 0))
        if sem.mode == "trivial-piar":
            return self._timed(answer, sem, Tier.TRIVIAL,
                               lambda b: (holds_in(self.gamma_empty, answer), 0))
        fn = {"brave": self.decide_brave, "ar": self.decide_ar, "iar": self.decide_iar}[sem.mode]
        return fn(answer, sem.kind)

    def decide(self, answer: AnswerCauses, sem: Semantics | str, tiered: bool = True) -> Decision:
        """Tiered decision; with ``tiered=False`` always run the direct procedure."""
        if isinstance(sem, str):
            sem = Semantics.parse(sem)
        if sem.kind is not None and sem.kind is RepairKind.G and self.localize == "strong":
            raise ModeMismatch("strong reachability is not used for globally-optimal repairs")
        if not tiered or sem.kind is RepairKind.S:
            return self.decide_direct(answer, sem)
        if sem.mode == "grounded":
            tier = Tier.TRIVIAL if holds_in(self.gamma_empty, answer) else Tier.GROUNDED
            return self._timed(answer, sem, tier,
                               lambda b: (holds_in(self.grounded.grounded, answer), 0))
        if holds_in(self.gamma_empty, answer):
            return self._timed(answer, sem, Tier.TRIVIAL, lambda b: (True, 0))
        if sem.mode == "trivial-piar":
            return self._timed(answer, sem, Tier.TRIVIAL, lambda b: (False, 0))
        if holds_in(self.grounded.grounded, answer):
            return self._timed(answer, sem, Tier.GROUNDED, lambda b: (True, 0))
        if sem.kind is RepairKind.G:
            bound = self._pareto_bound(answer, sem)
            if bound is not None:
                return bound
        return self.decide_direct(answer, sem)

    def _pareto_bound(self, answer: AnswerCauses, sem: Semantics) -> Decision | None:
        """Settle a G question from P answers when they are conclusive.

        Every globally-optimal repair is Pareto-optimal and at least one
        exists, so P-AR yes gives G-AR and G-brave yes, P-brave no gives
        both no, and P-IAR yes gives G-IAR yes.
        """
        start = time.perf_counter()
        nodes = 0
        checks = [("iar", True)] if sem.mode == "iar" else (
            [("ar", True), ("brave", False)] if sem.mode == "ar" else [("brave", False), ("ar", True)])
        for mode, settles_on in checks:
            d = self.decide_direct(answer, Semantics(mode, RepairKind.P))
            nodes += d.search_nodes
            if d.verdict == UNKNOWN:
                continue
            if (d.verdict == YES) == settles_on:
                return Decision(answer.answer_id, sem.label, d.verdict, Tier.PARETO_BOUND.value,
                                d.localized_facts, nodes, (time.perf_counter() - start) * 1000.0)
        return None

    def decide_all(self, answers: Iterable[AnswerCauses], semantics: Iterable[Semantics | str],
                   tiered: bool = True) -> list[Decision]:
        sems = [Semantics.parse(s) if isinstance(s, str) else s for s in semantics]
        return [self.decide(a, s, tiered) for a in answers for s in sems]


# -- functional wrappers ---------------------------------------------------


def decide_brave(instance, answer, kind, **opts) -> Decision:
    return Solver(instance, **opts).decide_brave(answer, kind)


def decide_ar(instance, answer, kind, **opts) -> Decision:
    return Solver(instance, **opts).decide_ar(answer, kind)


def decide_iar(instance, answer, kind, **opts) -> Decision:
    return Solver(instance, **opts).decide_iar(answer, kind)


def decide_pipeline(instance, answer, semantics, **opts) -> Decision:
    return Solver(instance, **opts).decide(answer, semantics)
