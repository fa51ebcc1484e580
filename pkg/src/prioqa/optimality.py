"""Repair predicates and optimality checks.

These are the production procedures; ``oracle`` holds the slow
definition-level counterparts they are tested against.
"""

from __future__ import annotations

import enum
import warnings
from typing import Iterable, Iterator

from .attacks import AttackRelation, compute_attacks, compute_attacks_binary
from .factset import FactSet, ids_of, mask_of
from .model import PrioritizedInstance
from .sat import Budget, SatSolver

ENUMERATION_WARN_FACTS = 25


class RepairKind(enum.Enum):
    S = "S"
    P = "P"
    G = "G"
    C = "C"


def is_consistent(instance: PrioritizedInstance, s: FactSet) -> bool:
    return instance.is_consistent(s)


def is_repair(instance: PrioritizedInstance, s: FactSet) -> bool:
    """Consistent and no excluded fact can be added back."""
    if not s <= instance.universe or not instance.unconflicted <= s:
        return False
    if not instance.is_consistent(s):
        return False
    m = s.mask
    conflicts = instance.conflicts
    for a in ids_of(instance.conflicting.mask & ~m):
        blocked = False
        for ci in instance.conflicts_of[a]:
            if all((m >> b) & 1 for b in conflicts[ci].members if b != a):
                blocked = True
                break
        if not blocked:
            return False
    return True


def find_pareto_improvement(
    instance: PrioritizedInstance,
    r: FactSet,
    attacks: AttackRelation | None = None,
    binary: bool = False,
) -> FactSet | None:
    """A Pareto improvement of the consistent set ``r``, or None.

    One exists iff some excluded fact ``a`` has no attacker set inside
    ``r``; then ``r + a`` minus the facts ``a`` dominates is one.  Facts
    that can simply be added are covered by the same test.
    """
    if attacks is None:
        attacks = compute_attacks_binary(instance) if binary else compute_attacks(instance)
    m = r.mask
    for a in ids_of(instance.universe.mask & ~m):
        if any(all((m >> b) & 1 for b in e) for e in attacks.attackers_of(a)):
            continue
        dominated = mask_of(instance.prefers.get(a, ()))
        return FactSet.from_mask((m | (1 << a)) & ~dominated)
    return None


def find_global_improvement(
    instance: PrioritizedInstance,
    r: FactSet,
    budget: Budget | None = None,
) -> FactSet | None:
    """A global improvement of the consistent set ``r``, or None.

    Search is over the nonempty set ``A`` of facts to add; the facts of
    ``r`` dominated by ``A`` are dropped and the rest kept.  Any improvement
    contains one of this shape, so the search is complete.  One boolean per
    outside fact; each conflict says "not all its outside members are added
    while none of its inside members is dominated by an added fact".
    """
    m = r.mask
    outside = ids_of(instance.universe.mask & ~m)
    if not outside:
        return None
    var = {o: k + 1 for k, o in enumerate(outside)}
    beaten_by: dict[int, list[int]] = {}
    wins = {}
    for o in outside:
        won = [b for b in instance.prefers.get(o, ()) if (m >> b) & 1]
        wins[o] = len(won)
        for b in won:
            beaten_by.setdefault(b, []).append(o)

    sat = SatSolver(budget)
    sat.nvars = len(outside)
    done: set[int] = set()
    for o in outside:
        for ci in instance.conflicts_of.get(o, ()):
            if ci in done:
                continue
            done.add(ci)
            clause = []
            for x in instance.conflicts[ci].members:
                if (m >> x) & 1:
                    clause.extend(var[y] for y in beaten_by.get(x, ()))
                else:
                    clause.append(-var[x])
            sat.add_clause(clause)
    sat.add_clause(var.values())
    sat.order = [var[o] for o in sorted(outside, key=lambda o: (-wins[o], o))]
    if not sat.solve():
        return None
    added = [o for o in outside if sat.model[var[o]]]
    dropped = 0
    for a in added:
        dropped |= mask_of(instance.prefers.get(a, ()))
    return FactSet.from_mask((m & ~dropped) | mask_of(added))


def completion_witness(
    instance: PrioritizedInstance,
    r: FactSet,
    budget: Budget | None = None,
    order: Iterable[tuple[int, int]] = (),
) -> list[tuple[int, int]] | None:
    """Extra priority edges under which the repair ``r`` is optimal, or None.

    Under a total priority every optimality notion agrees with "each
    excluded fact is attacked from inside the repair".  So each excluded
    fact picks a conflict whose other members all lie in ``r`` and that it
    does not win in the base relation; those members must then beat it.  A
    choice works iff the base relation plus the implied edges is acyclic,
    because any acyclic relation extends to a completion.

    ``order`` lists extra pairs ``(a, b)`` that every admissible completion
    must keep acyclic with, e.g. priority paths of a larger instance that
    run through facts missing from this one.
    """
    budget = budget if budget is not None else Budget()
    m = r.mask
    options: list[tuple[int, list[tuple[int, ...]]]] = []
    for a in ids_of(instance.conflicting.mask & ~m):
        pa = instance.prefers.get(a, frozenset())
        opts = []
        for ci in instance.conflicts_of[a]:
            others = tuple(b for b in instance.conflicts[ci].members if b != a)
            if all((m >> b) & 1 for b in others) and not any(b in pa for b in others):
                opts.append(others)
        if not opts:
            return None
        options.append((a, opts))
    options.sort(key=lambda item: (len(item[1]), item[0]))

    succ: dict[int, list[int]] = {}
    for a, b in sorted(instance.priority) + sorted(order):
        succ.setdefault(a, []).append(b)

    def reaches(src: int, targets: set[int]) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            x = stack.pop()
            if x in targets:
                return True
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    chosen: list[tuple[int, int]] = []

    def search(k: int) -> bool:
        if k == len(options):
            return True
        a, opts = options[k]
        for others in opts:
            budget.spend()
            if reaches(a, set(others)):
                continue
            for b in others:
                succ.setdefault(b, []).append(a)
                chosen.append((b, a))
            if search(k + 1):
                return True
            for b in others:
                succ[b].pop()
                chosen.pop()
        return False

    if not search(0):
        return None
    base = instance.priority
    return sorted({e for e in chosen if e not in base})


def is_optimal(
    instance: PrioritizedInstance,
    r: FactSet,
    kind: RepairKind,
    budget: Budget | None = None,
    attacks: AttackRelation | None = None,
    order: Iterable[tuple[int, int]] = (),
) -> bool:
    kind = RepairKind(kind)
    if not is_repair(instance, r):
        return False
    if kind is RepairKind.S:
        return True
    if find_pareto_improvement(instance, r, attacks) is not None:
        return False
    if kind is RepairKind.P:
        return True
    if kind is RepairKind.G:
        return find_global_improvement(instance, r, budget) is None
    return completion_witness(instance, r, budget, order) is not None


def enumerate_repairs(instance: PrioritizedInstance, budget: Budget | None = None) -> Iterator[FactSet]:
    """All repairs, as complements of the minimal hitting sets of the conflicts.

    Branching picks the unhit conflict with the fewest free members and
    tries its members in id order, forbidding earlier siblings, so every
    minimal hitting set is produced exactly once.
    """
    budget = budget if budget is not None else Budget()
    if len(instance.conflicting) > ENUMERATION_WARN_FACTS:
        warnings.warn(
            f"enumerating repairs over {len(instance.conflicting)} conflicting facts",
            RuntimeWarning, stacklevel=2)
    universe = instance.universe.mask
    confs = [mask_of(c.members) for c in instance.conflicts]

    def has_private(h: int, hs: int, skip: int) -> bool:
        bit = 1 << h
        return any((c & hs) == bit and not (c >> skip) & 1 for c in confs)

    def rec(hs: int, forbidden: int) -> Iterator[int]:
        budget.spend()
        best = None
        best_free = 0
        for c in confs:
            if c & hs:
                continue
            free = c & ~forbidden
            if best is None or bin(free).count("1") < bin(best_free).count("1"):
                best, best_free = c, free
                if not free:
                    break
        if best is None:
            yield hs
            return
        cand = ids_of(best_free)
        blocked = forbidden
        for x in cand:
            # adding x must leave each earlier pick a conflict only it hits
            if all(has_private(h, hs, x) for h in ids_of(hs)):
                yield from rec(hs | (1 << x), blocked)
            blocked |= 1 << x

    for hs in rec(0, 0):
        yield FactSet.from_mask(universe & ~hs)
