"""Small DPLL solver with two-watched-literal propagation.

No clause learning: the formulas handed to it come from localized
sub-instances and stay small.  Every decision (and every flip) costs one
node from the shared ``Budget``.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import SearchBudgetExceeded

DEFAULT_BUDGET = 10**7


class Budget:
    """Node counter shared by every search run for one decision."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise SearchBudgetExceeded(self.limit)


class SatSolver:
    def __init__(self, budget: Budget | None = None, default_phase: bool = True):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[list[int]]] = {}
        self.units: list[int] = []
        self.trivially_unsat = False
        self.budget = budget if budget is not None else Budget()
        self.default_phase = default_phase
        self.order: list[int] = []
        self.phase: dict[int, bool] = {}
        self.model: list[bool] = []

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def add_clause(self, lits: Iterable[int]) -> None:
        s = set(lits)
        if any(-lit in s for lit in s):
            return
        c = sorted(s, key=lambda lit: (abs(lit), lit))
        for lit in c:
            if abs(lit) > self.nvars:
                self.nvars = abs(lit)
        if not c:
            self.trivially_unsat = True
        elif len(c) == 1:
            self.units.append(c[0])
        else:
            self.clauses.append(c)
            self.watches.setdefault(c[0], []).append(c)
            self.watches.setdefault(c[1], []).append(c)

    def _var_order(self) -> list[int]:
        seen = set(self.order)
        return list(self.order) + [v for v in range(1, self.nvars + 1) if v not in seen]

    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        """Search for a model; on success it is left in ``self.model``."""
        if self.trivially_unsat:
            return False
        watches = self.watches
        val = [0] * (self.nvars + 1)
        trail: list[int] = []

        def assign(lit: int) -> None:
            val[lit if lit > 0 else -lit] = 1 if lit > 0 else -1
            trail.append(lit)

        def lit_value(lit: int) -> int:
            v = val[lit if lit > 0 else -lit]
            return v if lit > 0 else -v

        def propagate(qhead: int) -> bool:
            """Unit propagation from trail[qhead:]; False on conflict."""
            while qhead < len(trail):
                false_lit = -trail[qhead]
                qhead += 1
                ws = watches.get(false_lit)
                if not ws:
                    continue
                kept: list[list[int]] = []
                k = 0
                n = len(ws)
                while k < n:
                    c = ws[k]
                    k += 1
                    if c[0] == false_lit:
                        c[0], c[1] = c[1], c[0]
                    first = c[0]
                    if lit_value(first) == 1:
                        kept.append(c)
                        continue
                    moved = False
                    for m in range(2, len(c)):
                        if lit_value(c[m]) != -1:
                            c[1], c[m] = c[m], c[1]
                            watches.setdefault(c[1], []).append(c)
                            moved = True
                            break
                    if moved:
                        continue
                    kept.append(c)
                    if lit_value(first) == -1:
                        kept.extend(ws[k:])
                        watches[false_lit] = kept
                        return False
                    assign(first)
                watches[false_lit] = kept
            return True

        for lit in list(self.units) + list(assumptions):
            v = lit_value(lit)
            if v == -1:
                return False
            if v == 0:
                assign(lit)
        if not propagate(0):
            return False

        order = self._var_order()
        phase = self.phase
        default_phase = self.default_phase
        decisions: list[tuple[int, int, bool, int]] = []
        p = 0
        while True:
            while p < len(order) and val[order[p]] != 0:
                p += 1
            if p == len(order):
                self.model = [v > 0 for v in val]
                return True
            var = order[p]
            lit = var if phase.get(var, default_phase) else -var
            self.budget.spend()
            decisions.append((len(trail), lit, False, p))
            assign(lit)
            ok = propagate(len(trail) - 1)
            while not ok:
                while decisions and decisions[-1][2]:
                    decisions.pop()
                if not decisions:
                    return False
                mark, lit, _, p = decisions.pop()
                while len(trail) > mark:
                    val[abs(trail.pop())] = 0
                self.budget.spend()
                decisions.append((mark, -lit, True, p))
                assign(-lit)
                ok = propagate(mark)

    def models(self, project: Sequence[int], assumptions: Sequence[int] = ()) -> Iterator[list[bool]]:
        """Enumerate models, blocking each one on the ``project`` variables."""
        while self.solve(assumptions):
            model = self.model
            yield model
            self.add_clause([-v if model[v] else v for v in project])
