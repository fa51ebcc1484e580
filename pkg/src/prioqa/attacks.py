"""Attack relation, characteristic function and the grounded repair.

A conflict ``C`` yields the attack ``C - {a} -> a`` for every member ``a``
that is not preferred to any other member of ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import InternalInconsistency
from .factset import FactSet, ids_of, mask_of
from .model import AnswerCauses, PrioritizedInstance


@dataclass(frozen=True)
class Attack:
    attackers: tuple[int, ...]
    target: int
    conflict: int


@dataclass
class AttackRelation:
    attacks: list[Attack]
    by_target: dict[int, list[int]] = field(default_factory=dict)
    # (conflict index, fact) pairs where the fact beats some co-member
    non_attacking: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self):
        if not self.by_target:
            for k, att in enumerate(self.attacks):
                self.by_target.setdefault(att.target, []).append(k)

    def __len__(self) -> int:
        return len(self.attacks)

    def __iter__(self) -> Iterator[Attack]:
        return iter(self.attacks)

    def attacked(self) -> FactSet:
        return FactSet(self.by_target)

    def attackers_of(self, a: int) -> list[tuple[int, ...]]:
        return [self.attacks[k].attackers for k in self.by_target.get(a, ())]

    def named(self, instance: PrioritizedInstance) -> set[tuple[frozenset[str], str]]:
        n = instance.interner.names
        return {(frozenset(n[b] for b in att.attackers), n[att.target]) for att in self.attacks}


def compute_attacks(instance: PrioritizedInstance) -> AttackRelation:
    """All attacks, ordered by conflict index then target id."""
    attacks = []
    non_attacking = set()
    prefers = instance.prefers
    for ci, conf in enumerate(instance.conflicts):
        ms = conf.members
        for a in ms:
            pa = prefers.get(a)
            if pa and any(b in pa for b in ms if b != a):
                non_attacking.add((ci, a))
            else:
                attacks.append(Attack(tuple(b for b in ms if b != a), a, ci))
    return AttackRelation(attacks, non_attacking=non_attacking)


def compute_attacks_binary(instance: PrioritizedInstance) -> AttackRelation:
    """Binary-conflict shortcut: ``b`` attacks ``a`` iff {a, b} conflict and not a > b."""
    attacks = []
    non_attacking = set()
    for ci, conf in enumerate(instance.conflicts):
        a, b = conf.members
        for x, y in ((a, b), (b, a)):
            if instance.prefers_over(x, y):
                non_attacking.add((ci, x))
            else:
                attacks.append(Attack((y,), x, ci))
    return AttackRelation(attacks, non_attacking=non_attacking)


def gamma(instance: PrioritizedInstance, attacks: AttackRelation, b: FactSet) -> FactSet:
    """Characteristic function: facts each of whose attacks is countered from ``b``.

    An attack ``E -> a`` is countered when some member of ``E`` is itself
    attacked by a subset of ``b``.  Unattacked and unconflicted facts are
    always returned.
    """
    bm = b.mask
    defeated = 0
    for att in attacks.attacks:
        if all((bm >> x) & 1 for x in att.attackers):
            defeated |= 1 << att.target
    out = instance.universe.mask
    for att in attacks.attacks:
        if not any((defeated >> x) & 1 for x in att.attackers):
            out &= ~(1 << att.target)
    return FactSet.from_mask(out)


def trivially_piar(instance: PrioritizedInstance, attacks: AttackRelation | None = None) -> FactSet:
    """Facts of Γ(∅): unattacked conflicting facts plus unconflicted ones."""
    if attacks is None:
        attacks = compute_attacks(instance)
    return FactSet.from_mask(instance.universe.mask & ~mask_of(attacks.by_target))


@dataclass
class GroundedResult:
    grounded: FactSet
    steps: list[FactSet]
    unconflicted: FactSet

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def gamma_empty(self) -> FactSet:
        return self.unconflicted | self.steps[0]


def grounded_repair(instance: PrioritizedInstance, attacks: AttackRelation | None = None) -> GroundedResult:
    """Least fixpoint of Γ by counter propagation.

    Each attack keeps the number of its attackers still outside the current
    set (when it reaches zero its target is defeated) and a flag telling
    whether one of its attackers is defeated; each fact keeps the number of
    its uncountered attacks.  A fact enters the next layer when that number
    drops to zero.  ``steps[i]`` is Γ^{i+1}(∅) minus Γ^i(∅), unconflicted
    facts excluded.
    """
    if attacks is None:
        attacks = compute_attacks(instance)
    size = len(instance.interner)
    atts = attacks.attacks
    missing = [len(a.attackers) for a in atts]
    countered = [False] * len(atts)
    undefended = [0] * size
    member_of: list[list[int]] = [[] for _ in range(size)]
    for k, att in enumerate(atts):
        undefended[att.target] += 1
        for x in att.attackers:
            member_of[x].append(k)
    defeated = [False] * size

    delta = [a for a in ids_of(instance.conflicting.mask) if undefended[a] == 0]
    steps = [delta]
    while True:
        newly_defeated = []
        for a in delta:
            for k in member_of[a]:
                missing[k] -= 1
                if missing[k] == 0:
                    t = atts[k].target
                    if not defeated[t]:
                        defeated[t] = True
                        newly_defeated.append(t)
        nxt = []
        for t in newly_defeated:
            for k in member_of[t]:
                if not countered[k]:
                    countered[k] = True
                    tgt = atts[k].target
                    undefended[tgt] -= 1
                    if undefended[tgt] == 0:
                        nxt.append(tgt)
        if not nxt:
            break
        nxt.sort()
        steps.append(nxt)
        delta = nxt

    members = [a for layer in steps for a in layer]
    inside = [False] * size
    for a in members:
        inside[a] = True
    for conf in instance.conflicts:
        if all(inside[a] for a in conf.members):
            raise InternalInconsistency(
                f"grounded fixpoint contains conflict {conf.label}; "
                "the conflict list is probably not inclusion-minimal")
    step_sets = [FactSet(layer) for layer in steps]
    grounded = FactSet(members) | instance.unconflicted
    return GroundedResult(grounded, step_sets, instance.unconflicted)


def holds_in(s: FactSet, answer: AnswerCauses) -> bool:
    """True iff some cause of ``answer`` is included in ``s``."""
    return any(c <= s for c in answer.causes)
