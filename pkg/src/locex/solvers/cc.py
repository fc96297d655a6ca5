"""Congruence closure with injective symbols, user predicates and orders.

Handles a conjunction of ground literals for the EQ, PO and TO base
theories.  Orders are treated as graphs over congruence classes: cycles of
<= collapse into one class (antisymmetry), a strict edge inside a class is
a contradiction, and for PO a negated <= is refuted exactly when the
target is reachable.  Over TO a negated <= arrives here as a strict edge
in the other direction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..terms import EQ, LE, LT, App, Literal, Term, subterms


@dataclass(frozen=True)
class StructWitness:
    """Finite model: term classes, an order on classes, and true predicate facts."""

    classes: tuple[tuple[Term, ...], ...]
    leq: frozenset[tuple[int, int]] = frozenset()
    facts: frozenset[tuple[str, tuple[int, ...]]] = frozenset()

    def index(self) -> dict[Term, int]:
        out: dict[Term, int] = {}
        for i, cls in enumerate(self.classes):
            for t in cls:
                out[t] = i
        return out

    def describe(self) -> list[str]:
        lines = []
        for i, cls in enumerate(self.classes):
            lines.append(f"class {i} = {{{', '.join(map(str, cls))}}}")
        if self.leq:
            pairs = sorted(p for p in self.leq if p[0] != p[1])
            lines.append("order " + " ".join(f"{a}<={b}" for a, b in pairs))
        for pred, args in sorted(self.facts):
            lines.append(f"fact ({pred} {' '.join(map(str, args))})")
        return lines


class Closure:
    def __init__(self, base: str, literals: list[Literal], injective: frozenset[str] = frozenset(),
                 extra_terms: Iterable[Term] = ()):
        self.base = base
        self.literals = literals
        self.injective = injective
        self.terms: list[Term] = []
        self.ids: dict[Term, int] = {}
        tops = [a for lit in literals for a in lit.atom.args]
        for a in [*tops, *extra_terms]:
            for s in subterms(a):
                if s not in self.ids:
                    self.ids[s] = len(self.terms)
                    self.terms.append(s)
        self.parent = list(range(len(self.terms)))
        self.apps = [(i, t) for i, t in enumerate(self.terms) if isinstance(t, App) and t.args]
        self._ok: bool | None = None

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def _tid(self, t: Term) -> int:
        return self.ids[t]

    def _congruence(self) -> bool:
        changed = False
        while True:
            step = False
            sigs: dict[tuple, int] = {}
            inj: dict[tuple, tuple[int, ...]] = {}
            for i, t in self.apps:
                args = tuple(self.find(self.ids[a]) for a in t.args)
                key = (t.sym, args)
                other = sigs.get(key)
                if other is None:
                    sigs[key] = i
                elif self.union(other, i):
                    step = True
                if t.sym in self.injective:
                    ikey = (t.sym, self.find(i))
                    seen = inj.get(ikey)
                    if seen is None:
                        inj[ikey] = args
                    else:
                        for x, y in zip(seen, args):
                            if self.union(x, y):
                                step = True
            if not step:
                return changed
            changed = True

    def _edges(self) -> tuple[dict[int, list[int]], list[tuple[int, int]]]:
        succ: dict[int, list[int]] = {}
        strict: list[tuple[int, int]] = []
        for lit in self.literals:
            p = lit.atom.pred
            if p not in (LE, LT):
                continue
            a, b = (self.find(self.ids[x]) for x in lit.atom.args)
            if lit.positive:
                succ.setdefault(a, []).append(b)
                if p == LT:
                    strict.append((a, b))
            elif self.base == "TO":
                # not a <= b  ==>  b < a ;  not a < b  ==>  b <= a
                succ.setdefault(b, []).append(a)
                if p == LE:
                    strict.append((b, a))
        return succ, strict

    def reach(self, succ: dict[int, list[int]], src: int) -> set[int]:
        seen = {src}
        stack = [src]
        while stack:
            for n in succ.get(stack.pop(), ()):
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return seen

    def check(self) -> bool:
        if self._ok is not None:
            return self._ok
        self._ok = self._check()
        return self._ok

    def _check(self) -> bool:
        for lit in self.literals:
            if lit.positive and lit.atom.pred == EQ:
                self.union(*(self.ids[x] for x in lit.atom.args))
        ordered = self.base in ("PO", "TO")
        while True:
            self._congruence()
            if not ordered:
                break
            succ, strict = self._edges()
            nodes = sorted({self.find(i) for i in range(len(self.terms))})
            reach = {n: self.reach(succ, n) for n in nodes}
            merged = False
            for n in nodes:
                for m in reach[n]:
                    if m != n and n in reach[m] and self.union(n, m):
                        merged = True
            if not merged:
                for a, b in strict:
                    if self.find(a) == self.find(b):
                        return False
                self._reach = reach
                self._succ = succ
                break
        for lit in self.literals:
            if not lit.positive and lit.atom.pred == EQ:
                a, b = (self.ids[x] for x in lit.atom.args)
                if self.find(a) == self.find(b):
                    return False
            if ordered and not lit.positive and self.base == "PO":
                a, b = (self.find(self.ids[x]) for x in lit.atom.args)
                if lit.atom.pred == LE and b in self._reach[a]:
                    return False
                if lit.atom.pred == LT and b in self._reach[a] and a != b:
                    return False
        facts: dict[tuple, bool] = {}
        for lit in self.literals:
            if lit.atom.pred in (EQ, LE, LT):
                continue
            key = (lit.atom.pred, tuple(self.find(self.ids[x]) for x in lit.atom.args))
            if facts.setdefault(key, lit.positive) != lit.positive:
                return False
        self._facts = facts
        return True

    def model(self) -> StructWitness:
        if not self.check():
            raise ValueError("no model of an inconsistent literal set")
        reps = []
        for i in range(len(self.terms)):
            r = self.find(i)
            if r not in reps:
                reps.append(r)
        pos = {r: k for k, r in enumerate(reps)}
        classes = tuple(tuple(self.terms[i] for i in range(len(self.terms)) if self.find(i) == r)
                        for r in reps)
        leq: set[tuple[int, int]] = set()
        if self.base == "PO":
            for r in reps:
                for m in self._reach.get(r, {r}):
                    leq.add((pos[r], pos[self.find(m)]))
        elif self.base == "TO":
            rank = self._linearize(reps)
            for r in reps:
                for s in reps:
                    if rank[r] <= rank[s]:
                        leq.add((pos[r], pos[s]))
        facts = frozenset((p, tuple(pos[a] for a in args))
                          for (p, args), v in self._facts.items() if v)
        return StructWitness(classes, frozenset(leq), facts)

    def _linearize(self, reps: list[int]) -> dict[int, int]:
        indeg = {r: 0 for r in reps}
        succ: dict[int, list[int]] = {r: [] for r in reps}
        for a, outs in self._succ.items():
            fa = self.find(a)
            for b in outs:
                fb = self.find(b)
                if fa != fb and fb not in succ[fa]:
                    succ[fa].append(fb)
                    indeg[fb] += 1
        rank: dict[int, int] = {}
        ready = sorted(r for r in reps if indeg[r] == 0)
        while ready:
            r = ready.pop(0)
            rank[r] = len(rank)
            for s in succ[r]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
                    ready.sort()
        return rank
