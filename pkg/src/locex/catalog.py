"""Extension schemas as executable clause templates.

Each schema instance expands to a set of universally quantified clauses,
has a locality class fixed by the catalog (never by the user, except for
``custom`` blocks whose class is an explicit user assertion), and carries
the base-theory side conditions under which that class holds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import ClassVar, Iterable, Mapping

from .errors import SpecError, UnsupportedCombination
from .terms import (
    ARITH,
    LE,
    App,
    Clause,
    Num,
    Term,
    Var,
    app,
    clause,
    const,
    eq,
    function_symbols,
    implies,
    is_ground,
    pos,
    subterms,
    term_vars,
)

BASES = ("EQ", "LRA", "PO", "TO")
ORDERED_BASES = frozenset({"LRA", "PO", "TO"})


class LocalityClass(Enum):
    COMP_W = "Comp_w"
    COMP_FD_W = "Comp_fd_w"
    EMB_W = "Emb_w"

    @property
    def completable(self) -> bool:
        return self is not LocalityClass.EMB_W

    @property
    def rank(self) -> int:
        return {"Comp_w": 2, "Comp_fd_w": 1, "Emb_w": 0}[self.value]

    def implies(self, other: LocalityClass) -> bool:
        """Comp_w => Comp_fd_w; any class => Emb_w-grade locality for finite goals."""
        return self.rank >= other.rank

    def __str__(self) -> str:
        return self.value


def weakest(*classes: LocalityClass) -> LocalityClass:
    return min(classes, key=lambda c: c.rank)


CLASS_TOKENS = {"comp": LocalityClass.COMP_W, "comp-fd": LocalityClass.COMP_FD_W,
                "emb": LocalityClass.EMB_W}


@dataclass(frozen=True)
class BaseContext:
    """Base-theory declarations a schema's side conditions may depend on."""

    base: str = "EQ"
    functions: Mapping[str, int] = field(default_factory=dict)
    injective: frozenset[str] = frozenset()


# -- schemas -----------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionSpec:
    block_id: str
    kind: ClassVar[str] = ""

    @property
    def symbols(self) -> dict[str, int | None]:
        raise NotImplementedError


@dataclass(frozen=True)
class FreeSpec(ExtensionSpec):
    names: tuple[str, ...] = ()
    # explicit arities; None means "fixed by first use"
    arities: tuple[int | None, ...] = ()
    kind: ClassVar[str] = "free"

    @property
    def symbols(self) -> dict[str, int | None]:
        ar = self.arities or (None,) * len(self.names)
        return dict(zip(self.names, ar))


@dataclass(frozen=True)
class SelectorSpec(ExtensionSpec):
    constructor: str = "c"
    selectors: tuple[str, ...] = ()
    kind: ClassVar[str] = "selector"

    @property
    def arity(self) -> int:
        return len(self.selectors)

    @property
    def symbols(self) -> dict[str, int | None]:
        return {s: 1 for s in self.selectors}


@dataclass(frozen=True)
class MonotoneSpec(ExtensionSpec):
    f: str = "f"
    signs: tuple[str, ...] = ("+",)
    kind: ClassVar[str] = "mono"

    @property
    def arity(self) -> int:
        return len(self.signs)

    @property
    def symbols(self) -> dict[str, int | None]:
        return {self.f: self.arity}


@dataclass(frozen=True)
class BoundedMonotoneSpec(ExtensionSpec):
    f: str = "f"
    signs: tuple[str, ...] = ("+",)
    bound: Term = Var("x1")
    kind: ClassVar[str] = "bound-mono"

    @property
    def arity(self) -> int:
        return len(self.signs)

    @property
    def symbols(self) -> dict[str, int | None]:
        return {self.f: self.arity}


@dataclass(frozen=True)
class LipschitzSpec(ExtensionSpec):
    f: str = "f"
    lam: Fraction = Fraction(1)
    point: Term = Num(Fraction(0))
    kind: ClassVar[str] = "lipschitz"

    @property
    def symbols(self) -> dict[str, int | None]:
        return {self.f: 1}

    @property
    def point_value_name(self) -> str:
        return f"_lip_{self.block_id}_{self.f}"


@dataclass(frozen=True)
class CustomSpec(ExtensionSpec):
    """A user-written clause set with a user-asserted locality class."""

    asserted: LocalityClass = LocalityClass.EMB_W
    declared: tuple[tuple[str, int], ...] = ()
    variables: tuple[str, ...] = ()
    clauses: tuple[Clause, ...] = ()
    kind: ClassVar[str] = "custom"

    @property
    def symbols(self) -> dict[str, int | None]:
        return dict(self.declared)


SIGNS = ("+", "-", "0")


def validate(spec: ExtensionSpec) -> None:
    match spec:
        case FreeSpec():
            if not spec.names:
                raise SpecError("free block needs at least one symbol")
            if len(set(spec.names)) != len(spec.names):
                raise SpecError("duplicate symbol in free block")
        case SelectorSpec():
            if not spec.selectors:
                raise SpecError("constructor arity must be positive")
            if len(set(spec.selectors)) != len(spec.selectors):
                raise SpecError("selector names must be distinct")
            if spec.constructor in spec.selectors:
                raise SpecError("constructor cannot be one of its selectors")
        case MonotoneSpec() | BoundedMonotoneSpec():
            if not spec.signs or any(s not in SIGNS for s in spec.signs):
                raise SpecError(f"bad signature vector {spec.signs!r} (use + - 0)")
            if isinstance(spec, BoundedMonotoneSpec):
                allowed = {f"x{i}" for i in range(1, spec.arity + 1)}
                extra = set(term_vars(spec.bound)) - allowed
                if extra:
                    raise SpecError(f"bound term uses variables outside x1..x{spec.arity}: "
                                    + ", ".join(sorted(extra)))
                if spec.f in set(function_symbols(spec.bound)):
                    raise SpecError("bound term mentions the extension symbol")
        case LipschitzSpec():
            if spec.lam <= 0:
                raise SpecError(f"Lipschitz constant must be positive, got {spec.lam}")
            if not is_ground(spec.point) or (isinstance(spec.point, App) and spec.point.args):
                raise SpecError("Lipschitz point must be a base constant")


# -- expansion -------------------------------------------------------------

def _xs(prefix: str, n: int) -> list[Var]:
    return [Var(f"{prefix}{i}") for i in range(1, n + 1)]


def mono_clause(f: str, signs: tuple[str, ...]) -> Clause:
    xs, ys = _xs("x", len(signs)), _xs("y", len(signs))
    premises = []
    for s, x, y in zip(signs, xs, ys):
        if s == "+":
            premises.append(pos(LE, x, y))
        elif s == "-":
            premises.append(pos(LE, y, x))
        else:
            premises.append(eq(x, y))
    return implies(premises, pos(LE, app(f, *xs), app(f, *ys)))


def lipschitz_definition(spec: LipschitzSpec) -> Clause:
    return clause(eq(app(spec.f, spec.point), const(spec.point_value_name)))


def expand(spec: ExtensionSpec) -> tuple[Clause, ...]:
    """The clause set K of a schema instance, deterministic in its parameters."""
    validate(spec)
    match spec:
        case FreeSpec():
            return ()
        case SelectorSpec():
            xs = _xs("x", spec.arity)
            cterm = app(spec.constructor, *xs)
            out = [clause(eq(app(s, cterm), x)) for s, x in zip(spec.selectors, xs)]
            x = Var("x")
            back = app(spec.constructor, *(app(s, x) for s in spec.selectors))
            out.append(implies([eq(x, cterm)], eq(back, x)))
            return tuple(out)
        case BoundedMonotoneSpec():
            xs = _xs("x", spec.arity)
            return (mono_clause(spec.f, spec.signs), clause(pos(LE, app(spec.f, *xs), spec.bound)))
        case MonotoneSpec():
            return (mono_clause(spec.f, spec.signs),)
        case LipschitzSpec():
            x, x0 = Var("x"), spec.point
            fx, fx0 = app(spec.f, x), const(spec.point_value_name)
            lam = Num(spec.lam)
            right = app("*", lam, app("-", x, x0))
            left = app("*", lam, app("-", x0, x))
            out = []
            for guard, dist in ((pos(LE, x0, x), right), (pos(LE, x, x0), left)):
                out.append(implies([guard], pos(LE, app("-", fx, fx0), dist)))
                out.append(implies([guard], pos(LE, app("-", fx0, fx), dist)))
            out.append(lipschitz_definition(spec))
            return tuple(out)
        case CustomSpec():
            return spec.clauses
    raise SpecError(f"unknown schema {spec!r}")


def schema_ground_subterms(spec: ExtensionSpec) -> tuple[Term, ...]:
    if isinstance(spec, LipschitzSpec):
        return (spec.point, app(spec.f, spec.point))
    return ()


def schema_definitions(spec: ExtensionSpec) -> dict[Term, str]:
    """Ground extension terms the schema names with its own constants."""
    if isinstance(spec, LipschitzSpec):
        return {app(spec.f, spec.point): spec.point_value_name}
    return {}


# -- locality classes and side conditions ----------------------------------

def locality_class(spec: ExtensionSpec, base: str) -> LocalityClass:
    if base not in BASES:
        raise UnsupportedCombination(f"unknown base theory {base!r}")
    match spec:
        case FreeSpec():
            return LocalityClass.COMP_W
        case SelectorSpec():
            return LocalityClass.COMP_W
        case BoundedMonotoneSpec():
            if base in ORDERED_BASES:
                return LocalityClass.EMB_W
        case MonotoneSpec():
            if base == "PO":
                return LocalityClass.EMB_W
            if base in ("TO", "LRA"):
                return LocalityClass.COMP_FD_W
        case LipschitzSpec():
            if base == "LRA":
                return LocalityClass.COMP_W
        case CustomSpec():
            return spec.asserted
    raise UnsupportedCombination(
        f"UNSUPPORTED_COMBINATION: no certified locality class for {spec.kind} over {base}")


@dataclass(frozen=True)
class Condition:
    name: str
    ok: bool
    detail: str = ""

    def __str__(self) -> str:
        mark = "ok" if self.ok else "FAILED"
        return f"{self.name}: {mark}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class SideConditionReport:
    spec: ExtensionSpec
    conditions: tuple[Condition, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    @property
    def first_failure(self) -> Condition | None:
        return next((c for c in self.conditions if not c.ok), None)


def inj_statement(c: str, n: int) -> str:
    xs = " ".join(f"x{i}" for i in range(1, n + 1))
    ys = " ".join(f"y{i}" for i in range(1, n + 1))
    concl = " & ".join(f"x{i} = y{i}" for i in range(1, n + 1))
    return f"({c} {xs}) = ({c} {ys}) -> {concl}"


def bound_polarity(t: Term, var: str) -> set[int]:
    """Signs with which ``var`` can influence ``t`` (+1 increasing, -1 decreasing)."""
    if isinstance(t, Var):
        return {1} if t.name == var else set()
    if isinstance(t, Num) or not t.args:
        return set()
    if t.sym == "+":
        return bound_polarity(t.args[0], var) | bound_polarity(t.args[1], var)
    if t.sym == "-":
        return bound_polarity(t.args[0], var) | {-s for s in bound_polarity(t.args[1], var)}
    if t.sym == "*" and isinstance(t.args[0], Num):
        r = t.args[0].value
        inner = bound_polarity(t.args[1], var)
        return inner if r > 0 else ({-s for s in inner} if r < 0 else set())
    return {1, -1} if var in set(term_vars(t)) else set()


def check_side_conditions(spec: ExtensionSpec, base: str,
                          context: BaseContext | None = None) -> SideConditionReport:
    ctx = context or BaseContext(base=base)
    conds: list[Condition] = []
    match spec:
        case SelectorSpec():
            c, n = spec.constructor, spec.arity
            declared = ctx.functions.get(c)
            conds.append(Condition(
                "constructor is a base symbol", declared == n,
                "" if declared == n else f"{c}/{n} must be declared as a base function"))
            conds.append(Condition(
                "Inj_c", c in ctx.injective,
                "" if c in ctx.injective else
                f"base theory must satisfy Inj_c: {inj_statement(c, n)}"))
        case BoundedMonotoneSpec():
            refl = base in ORDERED_BASES
            conds.append(Condition(
                "reflexive <= in base", refl,
                "" if refl else f"base {base} has no reflexive order <="))
            allowed = set(ctx.functions) | (set(ARITH) if base == "LRA" else set())
            syms = {s.sym for s in subterms(spec.bound) if isinstance(s, App) and s.args}
            bad = sorted(syms - allowed)
            conds.append(Condition(
                "bound term over base signature", not bad,
                "" if not bad else "non-base symbols in bound term: " + ", ".join(bad)))
            incompatible = []
            for i, s in enumerate(spec.signs, start=1):
                pol = bound_polarity(spec.bound, f"x{i}")
                if s == "+" and not pol <= {1} or s == "-" and not pol <= {-1}:
                    incompatible.append(f"x{i}")
            if base != "LRA" and syms:
                incompatible.append("(base has no monotone operations)")
            conds.append(Condition(
                "bound term monotone-compatible with sigma", not incompatible,
                "" if not incompatible else "Bound requires t to have the monotonicity of f; "
                "offending: " + ", ".join(incompatible)))
        case MonotoneSpec():
            ordered = base in ORDERED_BASES
            conds.append(Condition(
                "base interprets <=", ordered,
                "" if ordered else f"monotonicity needs an order; base {base} has none"))
        case LipschitzSpec():
            conds.append(Condition(
                "base is LRA", base == "LRA",
                "" if base == "LRA" else "Lipschitz conditions are stated over the reals"))
            conds.append(Condition("lambda > 0", spec.lam > 0, str(spec.lam)))
        case CustomSpec():
            conds.append(Condition("user-asserted locality class", True, str(spec.asserted)))
    return SideConditionReport(spec, tuple(conds))


def inj_clauses(c: str, n: int) -> tuple[Clause, ...]:
    """Clausal form of Inj_c (one clause per argument position)."""
    xs, ys = _xs("x", n), _xs("y", n)
    prem = eq(app(c, *xs), app(c, *ys))
    return tuple(implies([prem], eq(x, y)) for x, y in zip(xs, ys))


def spec_symbols(specs: Iterable[ExtensionSpec]) -> frozenset[str]:
    return frozenset(s for spec in specs for s in spec.symbols)

