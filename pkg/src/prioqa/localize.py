"""Hypergraph reachability used to cut an instance down to the part that
matters for one answer."""

from __future__ import annotations

import enum

from .errors import ModeMismatch
from .factset import FactSet, ids_of
from .model import AnswerCauses, PrioritizedInstance, restrict


class ReachMode(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    BINARY = "binary"


def reach(instance: PrioritizedInstance, seed: FactSet, mode: ReachMode) -> FactSet:
    """Facts reachable from ``seed``.

    From a reached fact ``a`` and a conflict ``C`` containing it, all of
    ``C`` becomes reachable when ``a`` is preferred to no other member
    (STRONG), when ``a`` is not preferred to at least one other member
    (WEAK), or, for binary conflicts, when ``a`` is not preferred to its
    partner (BINARY).  Each conflict is expanded at most once.
    """
    mode = ReachMode(mode)
    if mode is ReachMode.BINARY and not instance.binary:
        raise ModeMismatch("binary reachability requires binary conflicts")
    if not seed <= instance.universe:
        raise ValueError("reach: seed must be a subset of the universe")
    conflicts = instance.conflicts
    conflicts_of = instance.conflicts_of
    prefers = instance.prefers
    seen = set(ids_of(seed.mask))
    stack = list(seen)
    expanded: set[int] = set()
    empty: frozenset[int] = frozenset()
    while stack:
        a = stack.pop()
        pa = prefers.get(a, empty)
        for ci in conflicts_of.get(a, ()):
            if ci in expanded:
                continue
            ms = conflicts[ci].members
            if mode is ReachMode.STRONG:
                edge = not any(b in pa for b in ms if b != a)
            elif mode is ReachMode.WEAK:
                edge = any(b not in pa for b in ms if b != a)
            else:
                edge = (ms[1] if ms[0] == a else ms[0]) not in pa
            if not edge:
                continue
            expanded.add(ci)
            for b in ms:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return FactSet(seen)


def localized_instance(
    instance: PrioritizedInstance,
    answer: AnswerCauses,
    mode: ReachMode,
) -> tuple[PrioritizedInstance, AnswerCauses]:
    """Restrict ``instance`` to the facts reachable from the answer's causes."""
    keep = reach(instance, answer.support, mode)
    return restrict(instance, keep), answer


def component(instance: PrioritizedInstance, seed: FactSet) -> FactSet:
    """Undirected closure of ``seed`` over conflicts, priority ignored.

    Plain repairs factor over connected components, so this is the safe
    localization when no priority-based optimality is involved.
    """
    if not seed <= instance.universe:
        raise ValueError("component: seed must be a subset of the universe")
    conflicts = instance.conflicts
    seen = set(ids_of(seed.mask))
    stack = list(seen)
    expanded: set[int] = set()
    while stack:
        a = stack.pop()
        for ci in instance.conflicts_of.get(a, ()):
            if ci in expanded:
                continue
            expanded.add(ci)
            for b in conflicts[ci].members:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return FactSet(seen)
