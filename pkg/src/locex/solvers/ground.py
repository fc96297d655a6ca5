"""Ground satisfiability for the EQ, PO, TO and LRA base theories."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

from ..errors import SolverError, WitnessError
from ..terms import (
    ARITH,
    EQ,
    LE,
    LT,
    App,
    Atom,
    Clause,
    Literal,
    Num,
    Term,
    Var,
    subterms,
    term_key,
)
from .cc import Closure, StructWitness
from .dpll import Search
from .lra import Constraint, Lin, feasible, linearize

BASES = ("EQ", "LRA", "PO", "TO")
DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class RationalWitness:
    values: tuple[tuple[str, Fraction], ...]
    # values of uninterpreted applications, when the input had any
    terms: tuple[tuple[Term, Fraction], ...] = ()

    def describe(self) -> list[str]:
        from ..terms import format_rational
        out = [f"{v} = {format_rational(q)}" for v, q in self.values]
        out += [f"{t} = {format_rational(q)}" for t, q in self.terms]
        return out


Witness = Union[StructWitness, RationalWitness]


@dataclass(frozen=True)
class BaseVerdict:
    sat: bool
    witness: Witness | None = None
    core: tuple[Clause, ...] | None = None
    nodes: int = field(default=0, compare=False)

    @property
    def kind(self) -> str:
        return "sat" if self.sat else "unsat"


# -- input checks and normalization -----------------------------------------

def _check_term(base: str, t: Term) -> None:
    for s in subterms(t):
        if isinstance(s, Var):
            raise SolverError(f"non-ground term {t}")
        if isinstance(s, Num) and base != "LRA":
            raise SolverError(f"numeral {s} outside LRA")
        if isinstance(s, App) and s.sym in ARITH:
            if base != "LRA":
                raise SolverError(f"arithmetic {s.sym} outside LRA")
            if s.sym == "*" and not isinstance(s.args[0], Num):
                raise SolverError(f"non-linear product {s}")


def _check_atom(base: str, a: Atom) -> None:
    if a.pred in (LE, LT):
        if base == "EQ":
            raise SolverError(f"order atom {a} over EQ")
    elif a.pred != EQ and base == "LRA":
        raise SolverError(f"predicate {a.pred} outside LRA")
    for t in a.args:
        _check_term(base, t)


def norm_literal(lit: Literal) -> Literal:
    a = lit.atom
    if a.pred == EQ and term_key(a.args[1]) < term_key(a.args[0]):
        return Literal(lit.positive, Atom(EQ, (a.args[1], a.args[0])))
    return lit


def _rewrite(base: str, lit: Literal) -> list[list[Literal]]:
    """CNF (list of disjunctions) equivalent to one literal over ``base``."""
    a = lit.atom
    if base in ("PO", "TO") and a.pred == LT:
        s, t = a.args
        if lit.positive:
            return [[Literal(True, Atom(LE, (s, t)))], [norm_literal(Literal(False, Atom(EQ, (s, t))))]]
        return [[Literal(False, Atom(LE, (s, t))), norm_literal(Literal(True, Atom(EQ, (s, t))))]]
    if base == "LRA" and a.pred == EQ and not lit.positive:
        s, t = a.args
        return [[Literal(True, Atom(LT, (s, t))), Literal(True, Atom(LT, (t, s)))]]
    return [[norm_literal(lit)]]


def preprocess(base: str, F: Sequence[Clause]) -> list[tuple[Clause, int]]:
    out: list[tuple[Clause, int]] = []
    for idx, c in enumerate(F):
        for lit in c.lits:
            _check_atom(base, lit.atom)
        parts = [_rewrite(base, lit) for lit in c.lits]
        for choice in product(*parts):
            lits = [l for disj in choice for l in disj]
            out.append((Clause.of(*lits), idx))
    return out


# -- LRA with uninterpreted applications ------------------------------------

class Ackermann:
    """Names uninterpreted applications by fresh reals and adds congruence clauses."""

    def __init__(self) -> None:
        self.names: dict[Term, str] = {}

    def name(self, t: App) -> str:
        n = self.names.get(t)
        if n is None:
            n = self.names[t] = f"_a{len(self.names) + 1}"
        return n

    def collect(self, F: Iterable[Clause]) -> None:
        for c in F:
            for lit in c.lits:
                for a in lit.atom.args:
                    for s in subterms(a):
                        if isinstance(s, App) and s.args and s.sym not in ARITH:
                            self.name(s)

    def clauses(self) -> list[Clause]:
        out = []
        items = list(self.names)
        for i, s in enumerate(items):
            for t in items[i + 1:]:
                if s.sym != t.sym or len(s.args) != len(t.args):
                    continue
                lits = []
                for x, y in zip(s.args, t.args):
                    if x != y:
                        lits += [Literal(True, Atom(LT, (x, y))), Literal(True, Atom(LT, (y, x)))]
                lits.append(norm_literal(Literal(True, Atom(EQ, (s, t)))))
                out.append(Clause.of(*lits))
        return out

    def lin(self, t: Term) -> Lin:
        return linearize(t, self.name)


def _lra_constraints(trail: Iterable[Literal], ack: Ackermann) -> tuple[list[Lin], list[Constraint]]:
    eqs: list[Lin] = []
    cons: list[Constraint] = []
    for lit in trail:
        s, t = lit.atom.args
        d = ack.lin(s).add(ack.lin(t), Fraction(-1))
        p = lit.atom.pred
        if p == EQ:
            if not lit.positive:
                raise SolverError("disequality reached the LRA theory check")
            eqs.append(d)
        elif lit.positive:
            cons.append(Constraint(d, p == LT))
        else:
            # not s <= t  ==>  t < s ;  not s < t  ==>  t <= s
            cons.append(Constraint(d.scale(Fraction(-1)), p == LE))
    return eqs, cons


# -- entry points --------------------------------------------------------------

def solve_ground(base: str, F: Sequence[Clause], injective: Iterable[str] = (),
                 budget: int = DEFAULT_BUDGET) -> BaseVerdict:
    if base not in BASES:
        raise SolverError(f"unknown base theory {base!r}")
    F = list(F)
    injective = frozenset(injective)
    pre = preprocess(base, F)
    clauses = [c for c, _ in pre]
    origin: list[int | None] = [i for _, i in pre]
    cache: dict[frozenset, bool] = {}

    if base == "LRA":
        ack = Ackermann()
        ack.collect(clauses)
        extra = ack.clauses()
        clauses += extra
        origin += [None] * len(extra)

        def consistent(trail: list[Literal]) -> bool:
            key = frozenset(trail)
            if key not in cache:
                eqs, cons = _lra_constraints(trail, ack)
                cache[key] = feasible(eqs, cons, budget) is not None
            return cache[key]

        def negatable(lit: Literal) -> bool:
            return not (lit.positive and lit.atom.pred == EQ)
    else:
        def consistent(trail: list[Literal]) -> bool:
            key = frozenset(trail)
            if key not in cache:
                cache[key] = Closure(base, trail, injective).check()
            return cache[key]

        def negatable(lit: Literal) -> bool:
            return True

    search = Search(clauses, consistent, negatable, budget)
    if search.run():
        trail = search.trail
        if base == "LRA":
            eqs, cons = _lra_constraints(trail, ack)
            env = feasible(eqs, cons, budget)
            consts = sorted({s.sym for c in F for lit in c.lits for a in lit.atom.args
                             for s in subterms(a) if isinstance(s, App) and not s.args})
            full = {v: env.get(v, Fraction(0)) for v in consts}
            uf = tuple((t, env.get(n, Fraction(0))) for t, n in ack.names.items())
            witness: Witness = RationalWitness(tuple(full.items()), uf)
        else:
            extra_terms = [a for c in F for lit in c.lits for a in lit.atom.args]
            witness = Closure(base, trail, injective, extra_terms).model()
        return BaseVerdict(True, witness, None, search.nodes)
    used = sorted({origin[i] for i in search.used if origin[i] is not None})
    return BaseVerdict(False, None, tuple(F[i] for i in used), search.nodes)


def _eval_rational(t: Term, w: RationalWitness, vals: dict[str, Fraction],
                   uf: dict[Term, Fraction]) -> Fraction:
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        raise WitnessError(f"non-ground term {t}")
    if not t.args:
        if t.sym not in vals:
            raise WitnessError(f"witness has no value for {t.sym}")
        return vals[t.sym]
    if t.sym == "+":
        return _eval_rational(t.args[0], w, vals, uf) + _eval_rational(t.args[1], w, vals, uf)
    if t.sym == "-":
        return _eval_rational(t.args[0], w, vals, uf) - _eval_rational(t.args[1], w, vals, uf)
    if t.sym == "*":
        return t.args[0].value * _eval_rational(t.args[1], w, vals, uf)
    if t not in uf:
        raise WitnessError(f"witness has no value for {t}")
    return uf[t]


def check_witness(base: str, F: Sequence[Clause], w: Witness,
                  injective: Iterable[str] = ()) -> bool:
    """Direct evaluation of every clause of F under the witness."""
    injective = frozenset(injective)
    if base == "LRA":
        if not isinstance(w, RationalWitness):
            raise WitnessError("LRA needs a rational witness")
        vals, uf = dict(w.values), dict(w.terms)
        seen: dict[tuple, Fraction] = {}
        for t, v in uf.items():
            key = (t.sym, tuple(_eval_rational(a, w, vals, uf) for a in t.args))
            if seen.setdefault(key, v) != v:
                return False
        for c in F:
            ok = False
            for lit in c.lits:
                s, t = (_eval_rational(a, w, vals, uf) for a in lit.atom.args)
                p = lit.atom.pred
                val = s == t if p == EQ else s <= t if p == LE else s < t if p == LT else None
                if val is None:
                    raise WitnessError(f"predicate {p} outside LRA")
                if val == lit.positive:
                    ok = True
                    break
            if not ok:
                return False
        return True
    if not isinstance(w, StructWitness):
        raise WitnessError(f"{base} needs a structure witness")
    idx: dict[Term, int] = {}
    for i, cls in enumerate(w.classes):
        for t in cls:
            if t in idx:
                raise WitnessError(f"{t} listed in two classes")
            idx[t] = i

    def cls_of(t: Term) -> int:
        if t not in idx:
            raise WitnessError(f"witness does not interpret {t}")
        return idx[t]

    table: dict[tuple, int] = {}
    inj: dict[tuple, tuple] = {}
    for t, i in idx.items():
        if isinstance(t, App) and t.args:
            args = tuple(cls_of(a) for a in t.args)
            if table.setdefault((t.sym, args), i) != i:
                return False
            if t.sym in injective and inj.setdefault((t.sym, i), args) != args:
                return False
    n = len(w.classes)
    leq = w.leq
    if base in ("PO", "TO"):
        for a in range(n):
            if (a, a) not in leq:
                return False
        for a, b in leq:
            if a != b and (b, a) in leq:
                return False
            for c in range(n):
                if (b, c) in leq and (a, c) not in leq:
                    return False
        if base == "TO":
            for a in range(n):
                for b in range(n):
                    if (a, b) not in leq and (b, a) not in leq:
                        return False
    for c in F:
        ok = False
        for lit in c.lits:
            p = lit.atom.pred
            args = tuple(cls_of(a) for a in lit.atom.args)
            if p == EQ:
                val = args[0] == args[1]
            elif p == LE:
                val = args in leq
            elif p == LT:
                val = args in leq and args[0] != args[1]
            else:
                val = (p, args) in w.facts
            if val == lit.positive:
                ok = True
                break
        if not ok:
            return False
    return True


__all__ = ["BaseVerdict", "RationalWitness", "StructWitness", "Witness",
           "solve_ground", "check_witness"]
