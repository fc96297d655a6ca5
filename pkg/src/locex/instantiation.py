"""Ground-subterm sets and the instance set K[G].

Instances are produced by one-way matching of the extension-rooted terms
of each template clause against the members of Psi with the same root
symbol.  Templates whose extension terms carry base-symbol skeletons (the
selector axioms, ``s1(c(x1, x2))``) are first flattened into an equivalent
clause with a fresh variable and an extra premise, so matching only ever
binds variables sitting directly under extension symbols.  Variables that
no extension term covers are then bound by matching the base-rooted
subterms they occur in against Psi.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .catalog import ExtensionSpec, expand, schema_ground_subterms
from .errors import NonFlatTemplate, UncoveredVariables
from .terms import (
    EQ,
    App,
    Atom,
    Clause,
    Literal,
    Num,
    Term,
    Var,
    apply_substitution,
    clause_subterms,
    clause_vars,
    dedupe,
    is_ground,
    is_ground_clause,
    subterms,
    term_key,
    term_vars,
)


@dataclass(frozen=True)
class GroundTermSet:
    """Psi: a subterm-closed set of ground terms in (size, text) order."""

    terms: tuple[Term, ...]
    tags: Mapping[Term, tuple[str, ...]]

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, t: object) -> bool:
        return t in self._members

    @property
    def _members(self) -> frozenset[Term]:
        m = self.__dict__.get("_m")
        if m is None:
            m = frozenset(self.terms)
            object.__setattr__(self, "_m", m)
        return m

    def ext_rooted(self) -> tuple[Term, ...]:
        return tuple(t for t in self.terms if t in self.tags)

    def rooted(self, sym: str) -> tuple[App, ...]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {}
            for t in self.terms:
                if isinstance(t, App) and t.args:
                    idx.setdefault(t.sym, []).append(t)
            object.__setattr__(self, "_idx", idx)
        return tuple(idx.get(sym, ()))


def term_closure(terms: Iterable[Term], owners: Mapping[str, Sequence[str]]) -> GroundTermSet:
    seen: dict[Term, None] = {}
    for t in terms:
        for s in subterms(t):
            seen.setdefault(s, None)
    ordered = tuple(sorted(seen, key=term_key))
    tags = {t: tuple(owners[t.sym]) for t in ordered
            if isinstance(t, App) and t.sym in owners}
    return GroundTermSet(ordered, tags)


def _ground_parts(t: Term) -> Iterator[Term]:
    if is_ground(t):
        yield t
    elif isinstance(t, App):
        for a in t.args:
            yield from _ground_parts(a)


def clause_ground_terms(clauses: Iterable[Clause]) -> Iterator[Term]:
    for c in clauses:
        for lit in c.lits:
            for a in lit.atom.args:
                yield from _ground_parts(a)


def symbol_owners(specs: Iterable[ExtensionSpec]) -> dict[str, list[str]]:
    owners: dict[str, list[str]] = {}
    for spec in specs:
        for s in spec.symbols:
            owners.setdefault(s, []).append(spec.block_id)
    return owners


def ground_subterms(K: Iterable[Clause], G: Iterable[Clause],
                    specs: Sequence[ExtensionSpec] = ()) -> GroundTermSet:
    terms = list(clause_ground_terms(G))
    for spec in specs:
        terms.extend(schema_ground_subterms(spec))
    terms.extend(clause_ground_terms(K))
    return term_closure(terms, symbol_owners(specs))


# -- matching ----------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    clause: Clause
    template: int
    subst: tuple[tuple[str, Term], ...]

    def __str__(self) -> str:
        binding = " ".join(f"{v}:={t}" for v, t in self.subst if not v.startswith("_"))
        return f"(instance {self.template} ({binding}) {self.clause})"


@dataclass(frozen=True)
class InstanceSet:
    instances: tuple[Instance, ...]

    @property
    def clauses(self) -> tuple[Clause, ...]:
        return tuple(i.clause for i in self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __len__(self) -> int:
        return len(self.instances)


def match(pattern: Term, term: Term, binding: dict[str, Term]) -> dict[str, Term] | None:
    """Extend ``binding`` so that pattern instantiates to ``term``."""
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            out = dict(binding)
            out[pattern.name] = term
            return out
        return binding if bound == term else None
    if isinstance(pattern, Num) or not pattern.args:
        return binding if pattern == term else None
    if not isinstance(term, App) or term.sym != pattern.sym or len(term.args) != len(pattern.args):
        return None
    for p, t in zip(pattern.args, term.args):
        binding = match(p, t, binding)
        if binding is None:
            return None
    return binding


@dataclass(frozen=True)
class Template:
    """A clause prepared for matching: flattened, with its match points."""

    index: int
    original: Clause
    flat: Clause
    introduced: frozenset[Literal]
    ext_terms: tuple[App, ...]


def _has_ext(t: Term, ext: frozenset[str]) -> bool:
    return any(isinstance(s, App) and s.sym in ext for s in subterms(t))


def prepare(c: Clause, index: int, ext: frozenset[str]) -> Template:
    counter = 0
    introduced: list[Literal] = []
    names: dict[Term, Var] = {}

    def flatten(t: Term) -> Term:
        nonlocal counter
        if not isinstance(t, App) or not t.args:
            return t
        args = tuple(flatten(a) for a in t.args)
        if t.sym in ext:
            new_args = []
            for a in args:
                if isinstance(a, Var) or is_ground(a):
                    new_args.append(a)
                    continue
                if _has_ext(a, ext):
                    raise NonFlatTemplate(f"extension term nested under {t.sym} in {c}")
                z = names.get(a)
                if z is None:
                    counter += 1
                    z = names[a] = Var(f"_z{counter}")
                    introduced.append(Literal(False, Atom(EQ, (z, a))))
                new_args.append(z)
            args = tuple(new_args)
        return App(t.sym, args)

    lits = [Literal(l.positive, Atom(l.atom.pred, tuple(flatten(a) for a in l.atom.args)))
            for l in c.lits]
    flat = Clause.of(*introduced, *lits)
    ext_terms = dedupe(s for s in clause_subterms(flat)
                       if isinstance(s, App) and s.sym in ext and not is_ground(s))
    for t in ext_terms:
        if any(_has_ext(a, ext) for a in t.args):
            raise NonFlatTemplate(f"extension term nested under {t.sym} in {c}")
    covered = {v for t in ext_terms for a in t.args for v in term_vars(a)}
    in_apps = {v for s in clause_subterms(flat) if isinstance(s, App) and s.args
               for v in term_vars(s)}
    loose = [v for v in clause_vars(flat) if v not in covered and v not in in_apps]
    if loose:
        raise UncoveredVariables(
            f"variables {', '.join(loose)} of {c} occur under no function symbol")
    return Template(index, c, flat, frozenset(introduced), ext_terms)


def _bindings(tpl: Template, psi: GroundTermSet) -> Iterator[dict[str, Term]]:
    pats = tpl.ext_terms

    def ext_step(i: int, binding: dict[str, Term]) -> Iterator[dict[str, Term]]:
        if i == len(pats):
            yield from base_step(binding)
            return
        for t in psi.rooted(pats[i].sym):
            b = match(pats[i], t, binding)
            if b is not None:
                yield from ext_step(i + 1, b)

    def base_step(binding: dict[str, Term]) -> Iterator[dict[str, Term]]:
        unbound = [v for v in clause_vars(tpl.flat) if v not in binding]
        if not unbound:
            yield binding
            return
        target = unbound[0]
        site = next(s for s in clause_subterms(tpl.flat)
                    if isinstance(s, App) and s.args and target in set(term_vars(s)))
        for t in psi.rooted(site.sym):
            b = match(site, t, binding)
            if b is not None:
                yield from base_step(b)

    yield from ext_step(0, {})


def _trivially_false(lit: Literal) -> bool:
    return not lit.positive and lit.atom.pred == EQ and lit.atom.args[0] == lit.atom.args[1]


def instantiate(K: Sequence[Clause], psi: GroundTermSet,
                ext: Iterable[str] | None = None) -> InstanceSet:
    """All instances of K whose extension-rooted terms are members of Psi."""
    ext = frozenset(ext if ext is not None else {t.sym for t in psi.tags})
    out: dict[Clause, Instance] = {}
    for idx, c in enumerate(K):
        if is_ground_clause(c):
            out.setdefault(c, Instance(c, idx, ()))
            continue
        tpl = prepare(c, idx, ext)
        if not tpl.ext_terms:
            continue
        for binding in _bindings(tpl, psi):
            inst = apply_substitution(tpl.flat, binding)
            keep = [l for l, src in zip(inst.lits, tpl.flat.lits)
                    if not (src in tpl.introduced and _trivially_false(l))]
            inst = Clause.of(*keep)
            subst = tuple(sorted(binding.items()))
            out.setdefault(inst, Instance(inst, idx, subst))
    for inst in out.values():
        for s in clause_subterms(inst.clause):
            if isinstance(s, App) and s.sym in ext and s not in psi:
                raise AssertionError(f"instance term {s} outside Psi")
    return InstanceSet(tuple(out.values()))


def expand_all(specs: Sequence[ExtensionSpec]) -> tuple[Clause, ...]:
    return tuple(c for spec in specs for c in expand(spec))


def kg(K: Sequence[Clause] | None, G: Iterable[Clause],
       specs: Sequence[ExtensionSpec]) -> InstanceSet:
    K = expand_all(specs) if K is None else tuple(K)
    G = tuple(G)
    psi = ground_subterms(K, G, specs)
    return instantiate(K, psi, {s for spec in specs for s in spec.symbols})
