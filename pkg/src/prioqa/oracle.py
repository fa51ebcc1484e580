"""Brute-force ground truth for small instances.

Everything here works straight from the definitions, over local bit
indices of the conflicting facts, and shares no search code with
``optimality`` or ``solver``.  Repairs come from scanning all subsets;
Pareto and global optimality test every consistent subset; completion
optimality enumerates orientations of the unordered pairs that matter.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import OracleTooLarge
from .factset import FactSet, ids_of
from .model import AnswerCauses, PrioritizedInstance

MAX_FACTS = 16
MAX_FREE_PAIRS = 16


class BruteForce:
    def __init__(self, instance: PrioritizedInstance, max_facts: int = MAX_FACTS,
                 max_free_pairs: int = MAX_FREE_PAIRS, order=()):
        self.instance = instance
        self.ids = ids_of(instance.conflicting.mask)
        self.n = n = len(self.ids)
        if n > max_facts:
            raise OracleTooLarge(f"{n} conflicting facts exceed the oracle bound of {max_facts}")
        self.max_free_pairs = max_free_pairs
        self.pos = {g: i for i, g in enumerate(self.ids)}
        self.conf = [sum(1 << self.pos[a] for a in c.members) for c in instance.conflicts]
        self.beats = [0] * n       # beats[i]: facts i is preferred to
        self.beaten = [0] * n      # beaten[i]: facts preferred to i
        for a, b in instance.priority:
            if a in self.pos and b in self.pos:
                self.beats[self.pos[a]] |= 1 << self.pos[b]
                self.beaten[self.pos[b]] |= 1 << self.pos[a]
        # ordering pairs constrain completions, not domination: the extra
        # pairs given, plus priority paths through conflict-free facts,
        # which have no local bit
        succ: dict[int, set[int]] = {}
        for a, b in list(instance.priority) + list(order):
            succ.setdefault(a, set()).add(b)
        self.order = [0] * n
        for a in self.ids:
            stack = list(succ.get(a, ()))
            seen = set(stack)
            while stack:
                y = stack.pop()
                if y in self.pos:
                    self.order[self.pos[a]] |= 1 << self.pos[y]
                    continue
                for z in succ.get(y, ()):
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)

        all_sets = np.arange(1 << n, dtype=np.int64)
        ok = np.ones(1 << n, dtype=bool)
        for c in self.conf:
            ok &= (all_sets & c) != c
        maximal = ok.copy()
        for i in range(n):
            bit = 1 << i
            maximal &= ((all_sets & bit) != 0) | ~ok[all_sets | bit]
        self.consistent = all_sets[ok]
        self._optimal: dict[str, list[int]] = {}
        self.reps = [int(x) for x in all_sets[maximal]]

    # -- conversions -------------------------------------------------------

    def to_global(self, local: int) -> FactSet:
        m = self.instance.unconflicted.mask
        for i, g in enumerate(self.ids):
            if (local >> i) & 1:
                m |= 1 << g
        return FactSet.from_mask(m)

    def to_local(self, s: FactSet) -> int:
        return sum(1 << i for i, g in enumerate(self.ids) if g in s)

    # -- definition-level improvement tests --------------------------------

    def pareto_improvable(self, r: int) -> bool:
        cons = self.consistent
        added = cons & ~r
        removed = r & ~cons
        hit = np.zeros(len(cons), dtype=bool)
        for b in range(self.n):
            hit |= ((added >> b) & 1).astype(bool) & ((removed & ~self.beats[b]) == 0)
        return bool(hit.any())

    def globally_improvable(self, r: int, candidates=None, beaten=None) -> bool:
        cons = self.consistent if candidates is None else candidates
        beaten = self.beaten if beaten is None else beaten
        added = cons & ~r
        removed = r & ~cons
        ok = cons != r
        for a in range(self.n):
            if (r >> a) & 1:
                ok &= (((removed >> a) & 1) == 0) | ((added & beaten[a]) != 0)
        return bool(ok.any())

    def completion_optimal(self, r: int) -> bool:
        """Some completion makes ``r`` globally optimal.

        Only pairs with one side in ``r`` and one outside influence whether
        a set improves ``r``, so only those are enumerated; the rest of a
        completion exists iff the chosen orientation is acyclic together
        with the base relation.  Improvement candidates are restricted to
        repairs: a consistent superset of an improvement is again one.
        """
        n = self.n
        pairs = set()
        for c in self.conf:
            ms = [i for i in range(n) if (c >> i) & 1]
            for x in ms:
                for y in ms:
                    if (r >> x) & 1 and not (r >> y) & 1:
                        if not (self.beats[x] >> y) & 1 and not (self.beats[y] >> x) & 1:
                            pairs.add((x, y))
        pairs = sorted(pairs)
        if len(pairs) > self.max_free_pairs:
            raise OracleTooLarge(f"{len(pairs)} free pairs exceed the oracle bound")
        reps = np.asarray(self.reps, dtype=np.int64)

        # reach[v]: bitmask of nodes reachable from v (transitive closure)
        reach = [x | y for x, y in zip(self.beats, self.order)]
        changed = True
        while changed:
            changed = False
            for v in range(n):
                new = reach[v]
                for w in range(n):
                    if (reach[v] >> w) & 1:
                        new |= reach[w]
                if new != reach[v]:
                    reach[v] = new
                    changed = True

        def add_edge(reach: list[int], u: int, v: int) -> list[int] | None:
            if u == v or (reach[v] >> u) & 1:
                return None
            out = list(reach)
            gain = (1 << v) | reach[v]
            for w in range(n):
                if w == u or (reach[w] >> u) & 1:
                    out[w] |= gain
            return out

        def rec(k: int, reach: list[int], beaten: list[int]) -> bool:
            if k == len(pairs):
                return not self.globally_improvable(r, reps, beaten)
            x, y = pairs[k]
            for u, v in ((x, y), (y, x)):
                nr = add_edge(reach, u, v)
                if nr is None:
                    continue
                nb = list(beaten)
                nb[v] |= 1 << u
                if rec(k + 1, nr, nb):
                    return True
            return False

        return rec(0, reach, list(self.beaten))

    # -- optimal repair sets -----------------------------------------------

    def optimal_local(self, kind: str) -> list[int]:
        kind = getattr(kind, "value", kind)
        if kind not in self._optimal:
            self._optimal[kind] = self._compute_optimal(kind)
        return list(self._optimal[kind])

    def _compute_optimal(self, kind: str) -> list[int]:
        if kind == "S":
            return list(self.reps)
        if kind == "P":
            return [r for r in self.reps if not self.pareto_improvable(r)]
        if kind == "G":
            return [r for r in self.reps if not self.globally_improvable(r)]
        if kind == "C":
            return [r for r in self.reps if self.completion_optimal(r)]
        raise ValueError(f"unknown repair kind {kind!r}")

    def optimal_repairs(self, kind: str) -> set[FactSet]:
        return {self.to_global(r) for r in self.optimal_local(kind)}

    # -- attacks and grounded ------------------------------------------------

    @cached_property
    def attacks(self) -> list[tuple[int, int]]:
        """(attacker mask, target) straight from the definition."""
        out = []
        for c in self.conf:
            for a in range(self.n):
                if (c >> a) & 1 and not (self.beats[a] & c):
                    out.append((c & ~(1 << a), a))
        return out

    def gamma_local(self, b: int) -> int:
        defeated = 0
        for e, t in self.attacks:
            if e & b == e:
                defeated |= 1 << t
        out = (1 << self.n) - 1
        for e, t in self.attacks:
            if not (e & defeated):
                out &= ~(1 << t)
        return out

    def gamma(self, b: FactSet) -> FactSet:
        return self.to_global(self.gamma_local(self.to_local(b)))

    def grounded_local(self) -> int:
        b = 0
        while True:
            nb = self.gamma_local(b)
            if nb == b:
                return b
            b = nb

    def grounded(self) -> FactSet:
        return self.to_global(self.grounded_local())


def oracle_optimal_repairs(instance: PrioritizedInstance, kind) -> set[FactSet]:
    return BruteForce(instance).optimal_repairs(kind)


def oracle_verdict(brute: BruteForce, answer: AnswerCauses, mode: str, kind=None) -> bool:
    """Verdict by definition: mode is brave, ar, iar, grounded or trivial-piar."""
    causes = [c.mask for c in answer.causes]
    if mode == "grounded":
        g = brute.grounded().mask
        return any(c & g == c for c in causes)
    if mode == "trivial-piar":
        g = brute.to_global(brute.gamma_local(0)).mask
        return any(c & g == c for c in causes)
    reps = [brute.to_global(r).mask for r in brute.optimal_local(kind)]
    if mode == "brave":
        return any(c & r == c for r in reps for c in causes)
    if mode == "ar":
        return all(any(c & r == c for c in causes) for r in reps)
    if mode == "iar":
        inter = -1
        for r in reps:
            inter &= r
        return any(c & inter == c for c in causes)
    raise ValueError(f"unknown mode {mode!r}")
