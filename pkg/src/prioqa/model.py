"""Prioritized fact bases: conflicts over interned facts plus a priority relation.

Consistency is purely syntactic here: a set of facts is consistent iff it
contains no conflict.  The logical theory that produced the conflicts never
appears at runtime.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import errors
from .factset import FactSet, ids_of, mask_of

STRICT = "strict"
LENIENT = "lenient"


class Interner:
    """Bijection between external fact names and dense 0-based ids."""

    __slots__ = ("names", "index")

    def __init__(self, names: Iterable[str] = ()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for n in names:
            self.intern(n)

    def intern(self, name: str) -> int:
        i = self.index.get(name)
        if i is None:
            i = len(self.names)
            self.names.append(name)
            self.index[name] = i
        return i

    def copy(self) -> Interner:
        new = Interner.__new__(Interner)
        new.names = list(self.names)
        new.index = dict(self.index)
        return new

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class Conflict:
    label: str
    members: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AnswerCauses:
    """A candidate query answer given by its causes."""

    answer_id: str
    causes: tuple[FactSet, ...]
    cause_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.cause_ids:
            ids = tuple(f"k{i + 1}" for i in range(len(self.causes)))
            object.__setattr__(self, "cause_ids", ids)

    @property
    def support(self) -> FactSet:
        """Union of all causes."""
        m = 0
        for c in self.causes:
            m |= c.mask
        return FactSet.from_mask(m)


class PrioritizedInstance:
    """Fact universe, conflict hypergraph and acyclic priority relation.

    Treated as immutable once built.  ``restrict`` and ``preprocess`` return
    new instances that share the interner, so fact ids stay comparable
    between an instance and its sub-instances.
    """

    def __init__(
        self,
        interner: Interner,
        universe: FactSet,
        conflicts: Sequence[Conflict],
        priority: Iterable[tuple[int, int]],
    ):
        self.interner = interner
        self.universe = universe
        self.conflicts: tuple[Conflict, ...] = tuple(conflicts)
        self.priority: frozenset[tuple[int, int]] = frozenset(priority)

        prefers: dict[int, set[int]] = {}
        for a, b in self.priority:
            prefers.setdefault(a, set()).add(b)
        self.prefers: dict[int, frozenset[int]] = {
            a: frozenset(bs) for a, bs in prefers.items()
        }

        conflicts_of: dict[int, list[int]] = {}
        for ci, c in enumerate(self.conflicts):
            for a in c.members:
                conflicts_of.setdefault(a, []).append(ci)
        self.conflicts_of: dict[int, tuple[int, ...]] = {
            a: tuple(cs) for a, cs in conflicts_of.items()
        }
        self.conflicting = FactSet(conflicts_of)
        self.unconflicted = universe - self.conflicting
        self.binary = all(len(c) == 2 for c in self.conflicts)

    # -- construction ------------------------------------------------------

    @classmethod
    def build(
        cls,
        conflicts: Iterable,
        priority: Iterable[tuple[str, str]] = (),
        facts: Iterable[str] = (),
    ) -> PrioritizedInstance:
        """Build from external names, without validation.

        ``conflicts`` holds either member-name iterables or
        ``(label, members)`` pairs.  Ids are assigned in first-appearance
        order: ``facts`` first, then conflict members, then priority pairs.
        Duplicate priority pairs collapse.
        """
        interner = Interner(facts)
        confs = []
        for k, item in enumerate(conflicts):
            if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str) \
                    and not isinstance(item[1], str):
                label, members = item
            else:
                label, members = f"c{k}", item
            ids = sorted({interner.intern(m) for m in members})
            confs.append(Conflict(label, tuple(ids)))
        pref = {(interner.intern(a), interner.intern(b)) for a, b in priority}
        universe = FactSet.from_mask((1 << len(interner)) - 1)
        return cls(interner, universe, confs, pref)

    # -- naming ------------------------------------------------------------

    def name(self, i: int) -> str:
        return self.interner.names[i]

    def id(self, name: str) -> int:
        return self.interner.index[name]

    def names_of(self, s: FactSet | Iterable[int]) -> list[str]:
        return [self.interner.names[i] for i in s]

    def facts(self, names: Iterable[str]) -> FactSet:
        return FactSet(self.interner.index[n] for n in names)

    # -- queries -----------------------------------------------------------

    def prefers_over(self, a: int, b: int) -> bool:
        bs = self.prefers.get(a)
        return bs is not None and b in bs

    @property
    def n_facts(self) -> int:
        return len(self.universe)

    def conflict_masks(self) -> list[int]:
        return [mask_of(c.members) for c in self.conflicts]

    def is_consistent(self, s: FactSet) -> bool:
        m = s.mask
        seen = set()
        for a in ids_of(m & self.conflicting.mask):
            for ci in self.conflicts_of[a]:
                if ci in seen:
                    continue
                seen.add(ci)
                if all((m >> b) & 1 for b in self.conflicts[ci].members):
                    return False
        return True

    def co_conflicting_pairs(self) -> set[tuple[int, int]]:
        """Unordered pairs (a < b) that share a conflict."""
        pairs = set()
        for c in self.conflicts:
            ms = c.members
            for i in range(len(ms)):
                for j in range(i + 1, len(ms)):
                    pairs.add((ms[i], ms[j]))
        return pairs

    # -- structural identity -----------------------------------------------

    def signature(self):
        names = self.interner.names
        return (
            frozenset(names[i] for i in self.universe),
            tuple(sorted(tuple(sorted(names[i] for i in c.members)) for c in self.conflicts)),
            frozenset((names[a], names[b]) for a, b in self.priority),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrioritizedInstance):
            return NotImplemented
        return self.signature() == other.signature()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"PrioritizedInstance(facts={len(self.universe)}, "
            f"conflicts={len(self.conflicts)}, priority={len(self.priority)}, "
            f"binary={self.binary})"
        )


# -- validation ------------------------------------------------------------


@dataclass
class Violation:
    kind: str
    ids: tuple
    message: str
    repaired: bool = False


@dataclass
class ValidationReport:
    mode: str
    instance: PrioritizedInstance
    answers: list[AnswerCauses] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def unrepaired(self) -> list[Violation]:
        return [v for v in self.violations if not v.repaired]

    def lines(self) -> list[str]:
        return [
            f"{v.kind}: {v.message}" + (" [repaired]" if v.repaired else "")
            for v in self.violations
        ]


_ERROR_CLASSES = {
    "CyclicPriority": errors.CyclicPriority,
    "PrefNotCoConflicting": errors.PrefNotCoConflicting,
    "NonMinimalConflict": errors.NonMinimalConflict,
    "InconsistentCause": errors.InconsistentCause,
    "EmptyCause": errors.EmptyCause,
    "NonMinimalCause": errors.ValidationError,
    "DanglingCauseFact": errors.DanglingCauseFact,
}

# never repaired, fatal in both modes
_FATAL = {"CyclicPriority", "InconsistentCause", "EmptyCause"}


def find_priority_cycle(priority: Iterable[tuple[int, int]]) -> list[int] | None:
    """Return one directed cycle of the relation, or None when acyclic."""
    succ: dict[int, list[int]] = {}
    for a, b in priority:
        succ.setdefault(a, []).append(b)
    for vs in succ.values():
        vs.sort()
    color: dict[int, int] = {}
    for root in sorted(succ):
        if color.get(root):
            continue
        color[root] = 1
        path = [root]
        stack = [iter(succ.get(root, ()))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = 2
                stack.pop()
                continue
            c = color.get(nxt, 0)
            if c == 1:
                return path[path.index(nxt):] + [nxt]
            if c == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append(iter(succ.get(nxt, ())))
    return None


def _non_minimal_conflicts(inst: PrioritizedInstance) -> list[tuple[int, int]]:
    """Pairs (i, j): conflict i is a subset of (or equal to, for i < j) conflict j.

    Singleton conflicts are skipped; preprocessing removes them wholesale.
    """
    out = []
    seen: dict[tuple[int, ...], int] = {}
    for j, c in enumerate(inst.conflicts):
        if c.members in seen and len(c) > 1:
            out.append((seen[c.members], j))
        else:
            seen.setdefault(c.members, j)
    sizes = {len(c) for c in inst.conflicts if len(c) > 1}
    if len(sizes) <= 1:
        return out
    for i, d in enumerate(inst.conflicts):
        if len(d) < 2 or len(d) == max(sizes):
            continue
        pivot = min(d.members, key=lambda a: len(inst.conflicts_of[a]))
        dset = set(d.members)
        for j in inst.conflicts_of[pivot]:
            c = inst.conflicts[j]
            if len(c) > len(d) and dset.issubset(c.members):
                out.append((i, j))
    return out


def validate(
    instance: PrioritizedInstance,
    answers: Iterable[AnswerCauses] = (),
    mode: str = STRICT,
) -> ValidationReport:
    """Check instance and answer invariants.

    Strict mode raises on any violation (the exception carries the report).
    Lenient mode drops duplicate or non-minimal conflicts, priority pairs
    that share no conflict, and non-minimal causes, then returns the
    repaired data in the report.  Cycles, empty causes and inconsistent
    causes are fatal in both modes.
    """
    if mode not in (STRICT, LENIENT):
        raise ValueError(f"unknown validation mode {mode!r}")
    names = instance.interner.names
    violations: list[Violation] = []
    repair = mode == LENIENT

    drop_conflicts: set[int] = set()
    for i, j in _non_minimal_conflicts(instance):
        ci, cj = instance.conflicts[i], instance.conflicts[j]
        what = "duplicates" if ci.members == cj.members else "is a strict superset of"
        violations.append(Violation(
            "NonMinimalConflict", (cj.label, ci.label),
            f"conflict {cj.label} {what} conflict {ci.label}", repair,
        ))
        drop_conflicts.add(j)

    cycle = find_priority_cycle(instance.priority)
    if cycle is not None:
        violations.append(Violation(
            "CyclicPriority", tuple(names[a] for a in cycle),
            "priority cycle " + " > ".join(names[a] for a in cycle),
        ))

    drop_pref: set[tuple[int, int]] = set()
    for a, b in sorted(instance.priority):
        shared = any(b in instance.conflicts[ci].members
                     for ci in instance.conflicts_of.get(a, ()))
        if a != b and not shared:
            violations.append(Violation(
                "PrefNotCoConflicting", (names[a], names[b]),
                f"pref({names[a]},{names[b]}) relates facts sharing no conflict", repair,
            ))
            drop_pref.add((a, b))

    fixed = instance
    if repair and (drop_conflicts or drop_pref):
        fixed = PrioritizedInstance(
            instance.interner,
            instance.universe,
            [c for k, c in enumerate(instance.conflicts) if k not in drop_conflicts],
            instance.priority - drop_pref,
        )

    kept_answers = []
    for ans in answers:
        causes = []
        ids = []
        for cid, cause in zip(ans.cause_ids, ans.causes):
            if not cause:
                violations.append(Violation(
                    "EmptyCause", (ans.answer_id, cid),
                    f"answer {ans.answer_id}: cause {cid} is empty",
                ))
                continue
            if not fixed.is_consistent(cause):
                violations.append(Violation(
                    "InconsistentCause", (ans.answer_id, cid),
                    f"answer {ans.answer_id}: cause {cid} contains a conflict",
                ))
                continue
            causes.append(cause)
            ids.append(cid)
        minimal = []
        for k, cause in enumerate(causes):
            dominated = any(
                (other < cause) or (other == cause and m < k)
                for m, other in enumerate(causes) if m != k
            )
            if dominated:
                violations.append(Violation(
                    "NonMinimalCause", (ans.answer_id, ids[k]),
                    f"answer {ans.answer_id}: cause {ids[k]} is not inclusion-minimal",
                    repair,
                ))
            else:
                minimal.append(k)
        kept = minimal if repair else range(len(causes))
        kept_answers.append(AnswerCauses(
            ans.answer_id,
            tuple(causes[k] for k in kept),
            tuple(ids[k] for k in kept),
        ))

    report = ValidationReport(mode, fixed, kept_answers, violations)
    fatal = [v for v in violations if not v.repaired or v.kind in _FATAL]
    if fatal:
        v = fatal[0]
        raise _ERROR_CLASSES[v.kind](v.message, v.ids, report)
    return report


# -- transformations -------------------------------------------------------


def preprocess(instance: PrioritizedInstance) -> PrioritizedInstance:
    """Remove self-inconsistent facts together with every conflict and
    priority pair that mentions them."""
    bad = {c.members[0] for c in instance.conflicts if len(c) == 1}
    if not bad:
        return instance
    bad_mask = mask_of(bad)
    return PrioritizedInstance(
        instance.interner,
        FactSet.from_mask(instance.universe.mask & ~bad_mask),
        [c for c in instance.conflicts if not bad.intersection(c.members)],
        [(a, b) for a, b in instance.priority if a not in bad and b not in bad],
    )


def restrict(instance: PrioritizedInstance, keep: FactSet) -> PrioritizedInstance:
    """Sub-instance over ``keep``: conflicts inside it, priority pairs within it."""
    if not keep <= instance.universe:
        raise ValueError("restrict: keep must be a subset of the universe")
    km = keep.mask
    if km == instance.universe.mask:
        return PrioritizedInstance(instance.interner, keep, instance.conflicts,
                                   instance.priority)
    local = ids_of(km & instance.conflicting.mask)
    cids = set()
    for a in local:
        cids.update(instance.conflicts_of[a])
    conflicts = [
        instance.conflicts[ci] for ci in sorted(cids)
        if all((km >> b) & 1 for b in instance.conflicts[ci].members)
    ]
    pref = [
        (a, b) for a in local for b in instance.prefers.get(a, ())
        if (km >> b) & 1
    ]
    return PrioritizedInstance(instance.interner, keep, conflicts, pref)


def conflict_multiset(instance: PrioritizedInstance) -> Counter:
    return Counter(c.members for c in instance.conflicts)
