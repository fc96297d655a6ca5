"""Flattening, purification and congruence axioms.

Extension-rooted ground terms are replaced bottom-up, left to right, by
constants ``_p1, _p2, ...``; each replacement records a definition
``f(c1, ..., cn) = _pk`` whose arguments are constants.  An argument that
is a compound base term gets its own name ``_bk`` and a base equation in
G0.  Identical terms always get the same name, so the name table is
injective and ``unfold`` inverts purification.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import ReductionError
from .terms import (
    EQ,
    App,
    Clause,
    Num,
    Term,
    Var,
    clause_subterms,
    eq,
    implies,
    map_clause,
)

PURE_PREFIXES = ("_p", "_b")


@dataclass(frozen=True)
class Definition:
    sym: str
    args: tuple[Term, ...]
    const: str

    @property
    def lhs(self) -> App:
        return App(self.sym, self.args)

    @property
    def clause(self) -> Clause:
        return Clause.of(eq(self.lhs, App(self.const, ())))

    def __str__(self) -> str:
        return str(self.clause)


@dataclass(frozen=True)
class ReductionArtifacts:
    K0: tuple[Clause, ...]
    G0: tuple[Clause, ...]
    D: tuple[Definition, ...]
    N0: tuple[Clause, ...] = ()
    names: Mapping[str, Term] = field(default_factory=dict)

    @property
    def base_problem(self) -> tuple[Clause, ...]:
        return self.K0 + self.G0 + self.N0

    @property
    def with_definitions(self) -> tuple[Clause, ...]:
        return self.K0 + self.G0 + tuple(d.clause for d in self.D)


class Purifier:
    """Stateful purification; one instance per reduction keeps names stable."""

    def __init__(self, ext: Iterable[str]):
        self.ext = frozenset(ext)
        self.defs: dict[App, Definition] = {}
        self.base_names: dict[Term, str] = {}
        self.names: dict[str, Term] = {}
        self.base_eqs: list[Clause] = []
        self._pending_base: list[Clause] = []

    def _unfolded(self, t: Term) -> Term:
        if isinstance(t, App):
            if not t.args and t.sym in self.names:
                return self.names[t.sym]
            if t.args:
                return App(t.sym, tuple(self._unfolded(a) for a in t.args))
        return t

    def _arg_const(self, a: Term) -> Term:
        if isinstance(a, Num) or (isinstance(a, App) and not a.args):
            return a
        name = self.base_names.get(a)
        if name is None:
            name = f"_b{len(self.base_names) + 1}"
            self.base_names[a] = name
            self.names[name] = self._unfolded(a)
            eq_clause = Clause.of(eq(a, App(name, ())))
            self.base_eqs.append(eq_clause)
            self._pending_base.append(eq_clause)
        return App(name, ())

    def term(self, t: Term) -> Term:
        if isinstance(t, Var):
            raise ReductionError(f"non-ground term {t} reached purification")
        if not isinstance(t, App):
            return t
        if t.sym not in self.ext:
            return App(t.sym, tuple(self.term(a) for a in t.args)) if t.args else t
        args = tuple(self.term(a) for a in t.args)
        args = tuple(self._arg_const(a) for a in args)
        key = App(t.sym, args)
        d = self.defs.get(key)
        if d is None:
            name = f"_p{len(self.defs) + 1}"
            d = Definition(t.sym, args, name)
            self.defs[key] = d
            self.names[name] = self._unfolded(key)
        return App(d.const, ())

    def clause(self, c: Clause) -> Clause:
        return map_clause(c, self.term)

    def clauses(self, cs: Iterable[Clause]) -> tuple[Clause, ...]:
        return tuple(self.clause(c) for c in cs)

    def take_base_eqs(self) -> tuple[Clause, ...]:
        out = tuple(self._pending_base)
        self._pending_base.clear()
        return out

    @property
    def definitions(self) -> tuple[Definition, ...]:
        return tuple(self.defs.values())


def flatten_purify(KG: Sequence[Clause], G: Sequence[Clause], ext: Iterable[str],
                   purifier: Purifier | None = None) -> ReductionArtifacts:
    p = purifier or Purifier(ext)
    before = len(p.defs)
    G0 = p.clauses(G)
    K0 = p.clauses(KG)
    G0 = G0 + p.take_base_eqs()
    D = p.definitions[before:]
    art = ReductionArtifacts(K0, G0, D, (), dict(p.names))
    assert_pure(art.K0 + art.G0, p.ext)
    return art


def congruence_axioms(D: Sequence[Definition]) -> tuple[Clause, ...]:
    out = []
    for d1, d2 in combinations(D, 2):
        if d1.sym != d2.sym or len(d1.args) != len(d2.args):
            continue
        prem = [eq(a, b) for a, b in zip(d1.args, d2.args)]
        out.append(implies(prem, eq(App(d1.const, ()), App(d2.const, ()))))
    return tuple(out)


def reduce(KG: Sequence[Clause], G: Sequence[Clause], ext: Iterable[str],
           purifier: Purifier | None = None) -> ReductionArtifacts:
    art = flatten_purify(KG, G, ext, purifier)
    N0 = congruence_axioms(art.D)
    assert_pure(N0, frozenset(ext))
    return ReductionArtifacts(art.K0, art.G0, art.D, N0, art.names)


def assert_pure(clauses: Iterable[Clause], ext: frozenset[str]) -> None:
    for c in clauses:
        for s in clause_subterms(c):
            if isinstance(s, App) and s.sym in ext:
                raise AssertionError(f"extension symbol {s.sym} left in {c}")


def is_purification_constant(name: str) -> bool:
    return name.startswith(PURE_PREFIXES) and name[2:].isdigit()


def unfold_term(t: Term, names: Mapping[str, Term], only: frozenset[str] | None = None) -> Term:
    if isinstance(t, App):
        if not t.args:
            if is_purification_constant(t.sym):
                if only is not None and t.sym not in only:
                    return t
                if t.sym not in names:
                    raise ReductionError(f"unknown purification constant {t.sym}")
                return names[t.sym]
            return t
        return App(t.sym, tuple(unfold_term(a, names, only) for a in t.args))
    return t


def unfold(artifacts: ReductionArtifacts | Mapping[str, Term], C: Iterable[Clause],
           only: Iterable[str] | None = None) -> tuple[Clause, ...]:
    names = artifacts.names if isinstance(artifacts, ReductionArtifacts) else artifacts
    keep = frozenset(only) if only is not None else None
    return tuple(map_clause(c, lambda t: unfold_term(t, names, keep)) for c in C)


def drop_trivial(C: Iterable[Clause]) -> tuple[Clause, ...]:
    """Remove clauses containing a literal t = t (used after unfolding base equations)."""
    out = []
    for c in C:
        if any(l.positive and l.atom.pred == EQ and l.atom.args[0] == l.atom.args[1] for l in c.lits):
            continue
        out.append(c)
    return tuple(out)


__all__ = ["Definition", "ReductionArtifacts", "Purifier", "flatten_purify",
           "congruence_axioms", "reduce", "unfold", "unfold_term", "is_purification_constant"]
