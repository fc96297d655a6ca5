"""First-order terms, literals and clauses, plus the syntactic checks
(flatness, linearity, variable coverage) that locality results depend on.

All values are immutable and hash-consed by structure: two terms are the
same term iff they are structurally equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Union

from .errors import FlatnessError, UndefinedVariableError

EQ = "="
LE = "<="
LT = "<"
ARITH = frozenset({"+", "-", "*"})
ORDER_PREDS = frozenset({LE, LT})


@dataclass(frozen=True)
class Var:
    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash(("V", self.name)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return self.name

    @property
    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class App:
    sym: str
    args: tuple[Term, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.sym, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App):
            return NotImplemented
        return self._hash == other._hash and self.sym == other.sym and self.args == other.args

    def __repr__(self) -> str:
        return f"App({str(self)!r})"

    @cached_property
    def _text(self) -> str:
        if not self.args:
            return self.sym
        return "(" + " ".join([self.sym, *map(str, self.args)]) + ")"

    def __str__(self) -> str:
        return self._text

    @cached_property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args)


@dataclass(frozen=True)
class Num:
    value: Fraction
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        object.__setattr__(self, "_hash", hash(("N", self.value)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return format_rational(self.value)

    @property
    def size(self) -> int:
        return 1


Term = Union[Var, App, Num]


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def const(name: str) -> App:
    return App(name, ())


def app(sym: str, *args: Term) -> App:
    return App(sym, tuple(args))


def term_key(t: Term) -> tuple[int, str]:
    """Deterministic total order on terms: size first, then printed form."""
    return (t.size, str(t))


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return "(" + " ".join([self.pred, *map(str, self.args)]) + ")"


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Atom

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"

    def negate(self) -> Literal:
        return Literal(not self.positive, self.atom)

    @property
    def is_equality(self) -> bool:
        return self.atom.pred == EQ


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals; the empty clause is falsum."""

    lits: tuple[Literal, ...]

    @staticmethod
    def of(*lits: Literal) -> Clause:
        return Clause(tuple(dict.fromkeys(lits)))

    def __str__(self) -> str:
        return "(" + " ".join(["cl", *map(str, self.lits)]) + ")"

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.lits)

    def __len__(self) -> int:
        return len(self.lits)


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


def pos(pred: str, *args: Term) -> Literal:
    return Literal(True, Atom(pred, tuple(args)))


def neg(pred: str, *args: Term) -> Literal:
    return Literal(False, Atom(pred, tuple(args)))


def eq(s: Term, t: Term) -> Literal:
    return pos(EQ, s, t)


def neq(s: Term, t: Term) -> Literal:
    return neg(EQ, s, t)


def le(s: Term, t: Term) -> Literal:
    return pos(LE, s, t)


def clause(*lits: Literal) -> Clause:
    return Clause.of(*lits)


def implies(premises: Iterable[Literal], *conclusions: Literal) -> Clause:
    return Clause.of(*(p.negate() for p in premises), *conclusions)


def dedupe(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


# -- traversal -------------------------------------------------------------

def subterms(t: Term) -> Iterator[Term]:
    """Post-order (arguments before the term itself), left to right."""
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)
    yield t


def clause_terms(c: Clause) -> Iterator[Term]:
    """Top-level argument terms of every literal, in order."""
    for lit in c.lits:
        yield from lit.atom.args


def clause_subterms(c: Clause) -> Iterator[Term]:
    for t in clause_terms(c):
        yield from subterms(t)


def term_vars(t: Term) -> Iterator[str]:
    for s in subterms(t):
        if isinstance(s, Var):
            yield s.name


def clause_vars(c: Clause) -> tuple[str, ...]:
    return dedupe(v for t in clause_terms(c) for v in term_vars(t))


def is_ground(t: Term) -> bool:
    return not any(isinstance(s, Var) for s in subterms(t))


def is_ground_clause(c: Clause) -> bool:
    return all(is_ground(t) for t in clause_terms(c))


def function_symbols(t: Term) -> Iterator[str]:
    for s in subterms(t):
        if isinstance(s, App):
            yield s.sym


def clause_symbols(c: Clause) -> set[str]:
    return {f for t in clause_terms(c) for f in function_symbols(t)}


def constants_of(c: Clause) -> tuple[str, ...]:
    return dedupe(s.sym for s in clause_subterms(c) if isinstance(s, App) and not s.args)


def map_term(t: Term, fn: Callable[[Term], Term | None]) -> Term:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep."""
    if isinstance(t, App) and t.args:
        new_args = tuple(map_term(a, fn) for a in t.args)
        if new_args != t.args:
            t = App(t.sym, new_args)
    out = fn(t)
    return t if out is None else out


def map_clause(c: Clause, fn: Callable[[Term], Term]) -> Clause:
    return Clause.of(*(
        Literal(lit.positive, Atom(lit.atom.pred, tuple(fn(a) for a in lit.atom.args)))
        for lit in c.lits
    ))


def rooted_in(t: Term, symbols: Iterable[str] | frozenset[str]) -> bool:
    return isinstance(t, App) and t.sym in symbols


def ext_subterms(c: Clause, ext: Iterable[str]) -> tuple[App, ...]:
    """Distinct extension-rooted subterm occurrences of ``c`` in traversal order."""
    ext = frozenset(ext)
    return dedupe(s for s in clause_subterms(c) if isinstance(s, App) and s.sym in ext)


# -- syntactic properties --------------------------------------------------

def is_flat(c: Clause, ext: Iterable[str]) -> bool:
    """No argument of an extension-rooted term contains a function symbol.

    Constants count as function symbols. Ground clauses are flat.
    """
    if is_ground_clause(c):
        return True
    return all(
        all(isinstance(a, Var) for a in t.args) for t in ext_subterms(c, ext)
    )


def is_linear(c: Clause, ext: Iterable[str]) -> bool:
    ext = frozenset(ext)
    if is_ground_clause(c):
        return True
    if not is_flat(c, ext):
        raise FlatnessError(f"linearity is only defined for flat clauses: {c}")
    owner: dict[str, App] = {}
    for t in ext_subterms(c, ext):
        names = [a.name for a in t.args]
        if len(set(names)) != len(names):
            return False
        for v in names:
            if owner.setdefault(v, t) != t:
                return False
    return True


def vars_covered(c: Clause, ext: Iterable[str]) -> bool:
    covered: set[str] = set()
    for t in ext_subterms(c, ext):
        for a in t.args:
            covered.update(term_vars(a))
    return all(v in covered for v in clause_vars(c))


def substitute_term(t: Term, sigma: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        try:
            return sigma[t.name]
        except KeyError:
            raise UndefinedVariableError(f"unmapped variable {t.name}") from None
    if isinstance(t, App) and t.args:
        return App(t.sym, tuple(substitute_term(a, sigma) for a in t.args))
    return t


def apply_substitution(c: Clause, sigma: Mapping[str, Term]) -> Clause:
    """Simultaneous substitution; every variable of ``c`` must be mapped."""
    return map_clause(c, lambda t: substitute_term(t, sigma))
