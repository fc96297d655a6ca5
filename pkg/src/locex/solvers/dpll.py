"""Clause-level case splitting over a theory consistency check.

The search picks the unsatisfied clause with the fewest open literals and
tries its literals in order; branch i asserts literal i and, where the
theory can express it, the negation of literals 0..i-1.  Every clause that
fixes a literal or closes a branch is recorded, which yields an UNSAT core:
the recorded clauses support the same refutation tree on their own.

Before branching, every open literal that the theory refutes under the
current trail is fixed to false, and unit propagation runs again.  Such
literals are entailed false by the trail alone, so the core argument is
unchanged.
"""
from __future__ import annotations

from typing import Callable, Sequence

from ..errors import ResourceBudgetExceeded
from ..terms import Atom, Clause, Literal

TheoryCheck = Callable[[list[Literal]], bool]


class Search:
    def __init__(self, clauses: Sequence[Clause], consistent: TheoryCheck,
                 negatable: Callable[[Literal], bool] = lambda lit: True,
                 budget: int = 200_000):
        self.clauses = list(clauses)
        self.consistent = consistent
        self.negatable = negatable
        self.budget = budget
        self.nodes = 0
        self.used: set[int] = set()
        self.model: dict[Atom, bool] | None = None
        self.trail: list[Literal] = []

    def run(self) -> bool:
        return self._search({}, [])

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResourceBudgetExceeded(f"case-split budget of {self.budget} nodes exceeded")

    def _propagate(self, assign: dict[Atom, bool], trail: list[Literal]) -> bool:
        changed = True
        while changed:
            changed = False
            for idx, c in enumerate(self.clauses):
                open_lits = []
                sat = False
                for lit in c.lits:
                    v = assign.get(lit.atom)
                    if v is None:
                        open_lits.append(lit)
                    elif v == lit.positive:
                        sat = True
                        break
                if sat:
                    continue
                if not open_lits:
                    self.used.add(idx)
                    return False
                if len(open_lits) == 1:
                    lit = open_lits[0]
                    assign[lit.atom] = lit.positive
                    trail.append(lit)
                    self.used.add(idx)
                    changed = True
        return True

    def _refute(self, assign: dict[Atom, bool], trail: list[Literal]) -> bool:
        """Fix theory-refuted open literals; True when anything changed."""
        changed = False
        for c in self.clauses:
            if any(assign.get(lit.atom) == lit.positive for lit in c.lits):
                continue
            for lit in c.lits:
                if lit.atom in assign:
                    continue
                if not self.consistent(trail + [lit]):
                    assign[lit.atom] = not lit.positive
                    if self.negatable(lit):
                        trail.append(lit.negate())
                    changed = True
        return changed

    def _search(self, assign: dict[Atom, bool], trail: list[Literal]) -> bool:
        self._tick()
        assign, trail = dict(assign), list(trail)
        while True:
            if not self._propagate(assign, trail):
                return False
            if not self.consistent(trail):
                return False
            if not self._refute(assign, trail):
                break
        best = None
        for idx, c in enumerate(self.clauses):
            open_lits = []
            sat = False
            for lit in c.lits:
                v = assign.get(lit.atom)
                if v is None:
                    open_lits.append(lit)
                elif v == lit.positive:
                    sat = True
                    break
            if sat:
                continue
            if best is None or len(open_lits) < len(best[1]):
                best = (idx, open_lits)
        if best is None:
            self.model = assign
            self.trail = trail
            return True
        idx, open_lits = best
        self.used.add(idx)
        for i, lit in enumerate(open_lits):
            a2 = dict(assign)
            t2 = list(trail)
            for prev in open_lits[:i]:
                if self.negatable(prev) and prev.atom not in a2:
                    a2[prev.atom] = not prev.positive
                    t2.append(prev.negate())
            if a2.get(lit.atom, lit.positive) != lit.positive:
                continue
            a2[lit.atom] = lit.positive
            t2.append(lit)
            if self._search(a2, t2):
                return True
        return False
