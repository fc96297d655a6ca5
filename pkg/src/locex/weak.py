"""Finite partial structures and weak satisfaction.

A literal whose terms do not all evaluate is weakly satisfied; otherwise
it has its ordinary truth value.  ``find_total_extension`` is an
exhaustive search for a total model of K into which a partial structure
weakly embeds, over carriers of bounded size.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import ParseError, ResourceBudgetExceeded, UndefinedVariableError
from .sexpr import SList, Token, head, read_all
from .terms import EQ, LE, LT, App, Clause, Literal, Num, Term, Var, clause_vars

Element = Hashable


class _Undefined:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()
NOT_FOUND = None
DEFAULT_ASSIGNMENT_BOUND = 10 ** 6


@dataclass(frozen=True)
class PartialStructure:
    carrier: tuple[Element, ...]
    funcs: Mapping[str, Mapping[tuple, Element]] = field(default_factory=dict)
    preds: Mapping[str, frozenset[tuple]] = field(default_factory=dict)
    # symbols whose interpretation must be total on the carrier
    base_symbols: frozenset[str] = frozenset()
    # numeric structures interpret + - * <= < natively on their elements
    numeric: bool = False

    def __post_init__(self) -> None:
        members = set(self.carrier)
        for f, table in self.funcs.items():
            for args, v in table.items():
                if v not in members or any(a not in members for a in args):
                    raise ValueError(f"{f}{args} -> {v} leaves the carrier")

    def is_total(self, f: str, arity: int) -> bool:
        table = self.funcs.get(f, {})
        return all(t in table for t in itertools.product(self.carrier, repeat=arity))

    def arity(self, f: str) -> int | None:
        for args in self.funcs.get(f, {}):
            return len(args)
        return None

    def leq(self, a: Element, b: Element) -> bool:
        if self.numeric:
            return a <= b
        return (a, b) in self.preds.get(LE, frozenset())


def eval_term(A: PartialStructure, beta: Mapping[str, Element], t: Term):
    if isinstance(t, Var):
        if t.name not in beta:
            raise UndefinedVariableError(f"unmapped variable {t.name}")
        return beta[t.name]
    if isinstance(t, Num):
        return t.value if A.numeric else UNDEFINED
    args = []
    for a in t.args:
        v = eval_term(A, beta, a)
        if v is UNDEFINED:
            return UNDEFINED
        args.append(v)
    if A.numeric and t.sym in ("+", "-", "*"):
        x, y = args
        return x + y if t.sym == "+" else x - y if t.sym == "-" else x * y
    return A.funcs.get(t.sym, {}).get(tuple(args), UNDEFINED)


def holds(A: PartialStructure, pred: str, args: Sequence[Element]) -> bool:
    if pred == EQ:
        return args[0] == args[1]
    if pred == LE:
        return A.leq(args[0], args[1])
    if pred == LT:
        return A.leq(args[0], args[1]) and args[0] != args[1]
    return tuple(args) in A.preds.get(pred, frozenset())


def weak_sat_literal(A: PartialStructure, beta: Mapping[str, Element], lit: Literal) -> bool:
    vals = [eval_term(A, beta, t) for t in lit.atom.args]
    if any(v is UNDEFINED for v in vals):
        return True
    return holds(A, lit.atom.pred, vals) == lit.positive


def weak_sat_clause(A: PartialStructure, beta: Mapping[str, Element], C: Clause) -> bool:
    return any(weak_sat_literal(A, beta, lit) for lit in C.lits)


def sat_clause(A: PartialStructure, beta: Mapping[str, Element], C: Clause) -> bool:
    """Classical truth; every term of C must be defined."""
    for lit in C.lits:
        vals = [eval_term(A, beta, t) for t in lit.atom.args]
        if any(v is UNDEFINED for v in vals):
            raise ValueError(f"classical evaluation of {C} hit an undefined term")
        if holds(A, lit.atom.pred, vals) == lit.positive:
            return True
    return False


def assignments(carrier: Sequence[Element], variables: Sequence[str]) -> Iterator[dict[str, Element]]:
    """Lexicographic in variable name, then carrier index."""
    names = sorted(variables)
    for combo in itertools.product(carrier, repeat=len(names)):
        yield dict(zip(names, combo))


def _check_bound(A: PartialStructure, variables: Sequence[str], bound: int) -> None:
    if len(A.carrier) ** len(variables) > bound:
        raise ResourceBudgetExceeded(
            f"{len(A.carrier)}^{len(variables)} assignments exceed the bound {bound}")


def weak_sat_set(A: PartialStructure, K: Iterable[Clause],
                 bound: int = DEFAULT_ASSIGNMENT_BOUND) -> bool:
    for C in K:
        vs = clause_vars(C)
        _check_bound(A, vs, bound)
        for beta in assignments(A.carrier, vs):
            if not weak_sat_clause(A, beta, C):
                return False
    return True


def sat_set(A: PartialStructure, K: Iterable[Clause], bound: int = DEFAULT_ASSIGNMENT_BOUND) -> bool:
    for C in K:
        vs = clause_vars(C)
        _check_bound(A, vs, bound)
        for beta in assignments(A.carrier, vs):
            if not sat_clause(A, beta, C):
                return False
    return True


def check_weak_embedding(A: PartialStructure, B: PartialStructure,
                         h: Mapping[Element, Element]) -> bool:
    if any(a not in h for a in A.carrier):
        raise ValueError("embedding must be total on the carrier of A")
    image = [h[a] for a in A.carrier]
    if len(set(image)) != len(image) or any(b not in set(B.carrier) for b in image):
        return False
    for f, table in A.funcs.items():
        btable = B.funcs.get(f, {})
        for args, v in table.items():
            if btable.get(tuple(h[a] for a in args), UNDEFINED) != h[v]:
                return False
    preds = set(A.preds) | set(B.preds)
    if not A.numeric:
        for p in sorted(preds):
            n = _pred_arity(A, p) or _pred_arity(B, p)
            if n is None:
                continue
            for args in itertools.product(A.carrier, repeat=n):
                if holds(A, p, args) != holds(B, p, [h[a] for a in args]):
                    return False
    return True


def _pred_arity(S: PartialStructure, p: str) -> int | None:
    if p in (LE, LT, EQ):
        return 2
    for t in S.preds.get(p, ()):
        return len(t)
    return None


# -- base-theory finite-model checks ---------------------------------------

def order_ok(S: PartialStructure, total: bool) -> bool:
    rel = S.preds.get(LE, frozenset())
    C = S.carrier
    for a in C:
        if (a, a) not in rel:
            return False
    for a, b in rel:
        if a != b and (b, a) in rel:
            return False
        for c in C:
            if (b, c) in rel and (a, c) not in rel:
                return False
    if total:
        return all((a, b) in rel or (b, a) in rel for a in C for b in C)
    return True


def base_ok(S: PartialStructure, base: str, injective: Iterable[str] = ()) -> bool:
    for c in injective:
        seen: dict[Element, tuple] = {}
        for args, v in S.funcs.get(c, {}).items():
            if seen.setdefault(v, args) != args:
                return False
    if base == "PO":
        return order_ok(S, total=False)
    if base == "TO":
        return order_ok(S, total=True)
    return True


# -- total extensions --------------------------------------------------------

@dataclass(frozen=True)
class Extension:
    structure: PartialStructure
    embedding: Mapping[Element, Element]


def total_extensions(A: PartialStructure, K: Sequence[Clause], base: str,
                     max_size: int, arities: Mapping[str, int] | None = None,
                     injective: Iterable[str] = (), budget: int = 10 ** 6,
                     same_carrier: bool = False) -> Iterator[Extension]:
    """Every (B, h) with B total, B |= K, base_ok(B) and h a weak embedding.

    Carriers grow from |A| up to ``max_size`` by adding fresh elements; with
    ``same_carrier`` only carrier-preserving completions are produced.
    """
    if A.numeric:
        raise ValueError("total extensions are searched over finite non-numeric carriers only")
    if max_size < len(A.carrier):
        raise ValueError("max_size is smaller than the carrier")
    injective = tuple(injective)
    ar = dict(arities or {})
    for f in A.funcs:
        n = A.arity(f)
        if n is not None:
            ar.setdefault(f, n)
    ops = sorted(ar)
    preds = sorted(p for p in A.preds if p not in (EQ, LT))
    if base in ("PO", "TO") and LE not in preds:
        preds.append(LE)
        preds.sort()
    pred_ar = {p: (_pred_arity(A, p) or 2) for p in preds}
    work = 0
    top = len(A.carrier) if same_carrier else max_size
    for size in range(len(A.carrier), top + 1):
        fresh = tuple(f"_e{i}" for i in range(size - len(A.carrier)))
        carrier = tuple(A.carrier) + fresh
        h = {a: a for a in A.carrier}
        holes: list[tuple[str, tuple]] = []
        for f in ops:
            table = A.funcs.get(f, {})
            for args in itertools.product(carrier, repeat=ar[f]):
                if args not in table:
                    holes.append((f, args))
        old = set(A.carrier)
        free_facts: list[tuple[str, tuple]] = []
        fixed: dict[str, set] = {p: set() for p in preds}
        for p in preds:
            for args in itertools.product(carrier, repeat=pred_ar[p]):
                if all(a in old for a in args):
                    if args in A.preds.get(p, frozenset()):
                        fixed[p].add(args)
                else:
                    free_facts.append((p, args))
        for values in itertools.product(carrier, repeat=len(holes)):
            funcs = {f: dict(A.funcs.get(f, {})) for f in ops}
            for (f, args), v in zip(holes, values):
                funcs[f][args] = v
            for bits in itertools.product((False, True), repeat=len(free_facts)):
                work += 1
                if work > budget:
                    raise ResourceBudgetExceeded("total-extension search budget exceeded")
                rel = {p: set(fixed[p]) for p in preds}
                for (p, args), b in zip(free_facts, bits):
                    if b:
                        rel[p].add(args)
                B = PartialStructure(carrier, funcs, {p: frozenset(r) for p, r in rel.items()},
                                     A.base_symbols)
                if not base_ok(B, base, injective):
                    continue
                if not sat_set(B, K):
                    continue
                if check_weak_embedding(A, B, h):
                    yield Extension(B, h)


def find_total_extension(A: PartialStructure, K: Sequence[Clause], base: str,
                         max_size: int, **kw) -> Extension | None:
    """First witness in enumeration order, or NOT_FOUND (None).

    NOT_FOUND only says nothing exists up to ``max_size``.
    """
    for ext in total_extensions(A, K, base, max_size, **kw):
        assert check_weak_embedding(A, ext.structure, ext.embedding)
        assert weak_sat_set(ext.structure, K)
        return ext
    return NOT_FOUND


# -- structure literals --------------------------------------------------------

def parse_structure(text: str, base_symbols: Iterable[str] = ()) -> PartialStructure:
    """Read '(struct (carrier a b) (fun f (a -> b)) (pred <= (a a) (a b) (b b)))'."""
    nodes = read_all(text)
    if len(nodes) != 1 or head(nodes[0]) != "struct":
        raise ParseError("expected a single (struct ...) form")
    carrier: list[str] = []
    funcs: dict[str, dict[tuple, str]] = {}
    preds: dict[str, set] = {}

    def names(items) -> list[str]:
        out = []
        for x in items:
            if not isinstance(x, Token):
                raise ParseError("expected an element name", x.line, x.col)
            out.append(x.text)
        return out

    for part in nodes[0].items[1:]:
        h = head(part)
        if h == "carrier":
            carrier = names(part.items[1:])
        elif h == "fun":
            f = part.items[1].text
            funcs.setdefault(f, {})
            for entry in part.items[2:]:
                if not isinstance(entry, SList):
                    raise ParseError("expected (args -> value)", entry.line, entry.col)
                toks = names(entry.items)
                if "->" not in toks:
                    raise ParseError("missing '->'", entry.line, entry.col)
                k = toks.index("->")
                funcs[f][tuple(toks[:k])] = toks[k + 1]
        elif h == "pred":
            p = part.items[1].text
            preds.setdefault(p, set())
            for entry in part.items[2:]:
                preds[p].add(tuple(names(entry.items)))
        else:
            raise ParseError(f"unknown structure part {h!r}", part.line, part.col)
    return PartialStructure(tuple(carrier), funcs, {p: frozenset(v) for p, v in preds.items()},
                            frozenset(base_symbols))


def numeric_structure(values: Iterable[Fraction], funcs: Mapping[str, Mapping[tuple, Fraction]]
                      ) -> PartialStructure:
    vals = tuple(dict.fromkeys(Fraction(v) for v in values))
    return PartialStructure(vals, funcs, {}, frozenset(), numeric=True)


__all__ = ["UNDEFINED", "NOT_FOUND", "PartialStructure", "Extension", "eval_term",
           "weak_sat_clause", "weak_sat_set", "sat_clause", "sat_set", "check_weak_embedding",
           "find_total_extension", "total_extensions", "parse_structure", "base_ok",
           "numeric_structure", "App"]
