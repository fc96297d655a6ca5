"""Problem files: signature, base theory, extension blocks and a ground goal.

The reader is a two-pass affair: declarations first (so symbol kinds and
arities are known regardless of order), then terms.  ``print_problem``
emits the canonical layout, which ``parse_problem`` reads back unchanged.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .catalog import (
    BASES,
    CLASS_TOKENS,
    BaseContext,
    BoundedMonotoneSpec,
    CustomSpec,
    ExtensionSpec,
    FreeSpec,
    LipschitzSpec,
    MonotoneSpec,
    SelectorSpec,
    validate,
)
from .errors import (
    ArityError,
    DuplicateDeclarationError,
    ParseError,
    SpecError,
    UndeclaredSymbolError,
)
from .sexpr import SExpr, SList, Token, head, read_all
from .terms import (
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
    format_rational,
)

RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
IDENT = re.compile(r"^[A-Za-z][A-Za-z0-9_.'!?$-]*$")
ORDERED = frozenset({"LRA", "PO", "TO"})


@dataclass(frozen=True)
class Signature:
    base_functions: dict[str, int]
    injective: frozenset[str]
    extension_blocks: tuple[tuple[str, dict[str, int | None]], ...]
    predicates: dict[str, int]

    @property
    def extension_symbols(self) -> frozenset[str]:
        return frozenset(s for _, syms in self.extension_blocks for s in syms)

    def block_of(self, sym: str) -> tuple[str, ...]:
        return tuple(b for b, syms in self.extension_blocks if sym in syms)


@dataclass(frozen=True)
class Problem:
    base: str = "EQ"
    functions: tuple[tuple[str, int], ...] = ()
    injective: tuple[tuple[str, int], ...] = ()
    predicates: tuple[tuple[str, int], ...] = ()
    specs: tuple[ExtensionSpec, ...] = ()
    shared: tuple[ExtensionSpec, ...] = ()
    shared_asserted: bool = False
    goal: tuple[Clause, ...] = ()
    name: str = field(default="", compare=False)

    @property
    def base_functions(self) -> dict[str, int]:
        return dict(self.functions) | dict(self.injective)

    @property
    def context(self) -> BaseContext:
        return BaseContext(self.base, self.base_functions,
                           frozenset(c for c, _ in self.injective))

    @property
    def ext_symbols(self) -> frozenset[str]:
        return frozenset(s for spec in self.specs for s in spec.symbols)

    @property
    def shared_symbols(self) -> frozenset[str]:
        return frozenset(s for spec in self.shared for s in spec.symbols)

    @property
    def signature(self) -> Signature:
        used = _used_arities(self.goal)
        blocks = []
        for spec in self.specs:
            syms = {s: (a if a is not None else used.get(s)) for s, a in spec.symbols.items()}
            blocks.append((spec.block_id, syms))
        preds = {EQ: 2} | ({LE: 2, LT: 2} if self.base in ORDERED else {})
        return Signature(self.base_functions, frozenset(c for c, _ in self.injective),
                         tuple(blocks), preds | dict(self.predicates))

    def with_goal(self, goal: Iterable[Clause]) -> Problem:
        return Problem(self.base, self.functions, self.injective, self.predicates,
                       self.specs, self.shared, self.shared_asserted, tuple(goal), self.name)

    def with_specs(self, specs: Iterable[ExtensionSpec]) -> Problem:
        return Problem(self.base, self.functions, self.injective, self.predicates,
                       tuple(specs), self.shared, self.shared_asserted, self.goal, self.name)


def _used_arities(clauses: Iterable[Clause]) -> dict[str, int]:
    out: dict[str, int] = {}
    for c in clauses:
        for lit in c.lits:
            stack = list(lit.atom.args)
            while stack:
                t = stack.pop()
                if isinstance(t, App):
                    out.setdefault(t.sym, len(t.args))
                    stack.extend(t.args)
    return out


# -- reader ----------------------------------------------------------------

def _err(cls, msg: str, x: SExpr):
    return cls(msg, x.line, x.col)


def _tok(x: SExpr, what: str) -> str:
    if not isinstance(x, Token):
        raise _err(ParseError, f"expected {what}", x)
    return x.text


def _int(x: SExpr, what: str) -> int:
    text = _tok(x, what)
    if not text.isdigit():
        raise _err(ParseError, f"expected {what}, got {text!r}", x)
    return int(text)


def _rational(x: SExpr) -> Fraction:
    text = _tok(x, "rational")
    if not RATIONAL.match(text):
        raise _err(ParseError, f"expected rational, got {text!r}", x)
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise _err(ParseError, f"zero denominator in {text!r}", x) from None


def _ident(x: SExpr, what: str = "identifier") -> str:
    text = _tok(x, what)
    if text.startswith("_"):
        raise _err(ParseError, f"names starting with '_' are reserved: {text}", x)
    if not IDENT.match(text):
        raise _err(ParseError, f"bad {what} {text!r}", x)
    return text


class _Reader:
    def __init__(self, name: str):
        self.name = name
        self.base = "EQ"
        self.base_seen: Token | SList | None = None
        self.functions: dict[str, int] = {}
        self.injective: dict[str, int] = {}
        self.predicates: dict[str, int] = {}
        self.specs: list[ExtensionSpec] = []
        self.shared: list[ExtensionSpec] = []
        self.asserted = False
        # ext symbol -> (arity or None, owning block ids)
        self.ext: dict[str, list] = {}
        self.goal_node: SList | None = None
        self.pending: list[tuple[SList, str]] = []

    # declarations ---------------------------------------------------------
    def declare_base_symbol(self, name: str, n: int, table: dict, node: SExpr) -> None:
        if name in self.functions or name in self.injective or name in self.predicates:
            raise _err(DuplicateDeclarationError, f"duplicate declaration of {name}", node)
        if name in (EQ, LE, LT) or name in ARITH:
            raise _err(DuplicateDeclarationError, f"{name} is built in", node)
        table[name] = n

    def read_decl(self, node: SExpr) -> None:
        h = head(node)
        if h is None:
            raise _err(ParseError, "expected a declaration", node)
        items = node.items
        if h == "base":
            if self.base_seen is not None:
                raise _err(DuplicateDeclarationError, "duplicate base declaration", node)
            if len(items) != 2 or _tok(items[1], "base theory") not in BASES:
                raise _err(ParseError, "base must be one of " + ", ".join(BASES), node)
            self.base, self.base_seen = items[1].text, node
        elif h in ("fun", "inj", "pred"):
            if len(items) != 3:
                raise _err(ParseError, f"expected ({h} name arity)", node)
            name, n = _ident(items[1]), _int(items[2], "arity")
            if h == "inj" and n < 1:
                raise _err(ParseError, "injective symbols need positive arity", node)
            table = {"fun": self.functions, "inj": self.injective, "pred": self.predicates}[h]
            self.declare_base_symbol(name, n, table, node)
        elif h == "ext":
            self.pending.append((node, "ext"))
        elif h == "shared":
            self.pending.append((node, "shared"))
        elif h == "assert":
            if len(items) != 2 or _tok(items[1], "assertion") != "shared-entailment":
                raise _err(ParseError, "only (assert shared-entailment) is supported", node)
            if self.asserted:
                raise _err(DuplicateDeclarationError, "duplicate assertion", node)
            self.asserted = True
        elif h == "goal":
            if self.goal_node is not None:
                raise _err(DuplicateDeclarationError, "duplicate goal", node)
            self.goal_node = node
        else:
            raise _err(ParseError, f"unknown declaration {h!r}", node)

    def check_base_compat(self, node: SExpr) -> None:
        if self.base == "LRA" and (self.functions or self.injective or self.predicates):
            raise _err(ParseError, "LRA problems cannot declare base functions or predicates",
                       self.base_seen or node)

    def read_schema(self, node: SList, block_id: str) -> ExtensionSpec:
        items = node.items
        if len(items) < 2:
            raise _err(ParseError, "missing schema kind", node)
        kind = _tok(items[1], "schema kind")
        args = items[2:]
        try:
            if kind == "free":
                names, arities = [], []
                for a in args:
                    if isinstance(a, SList):
                        if len(a.items) != 2:
                            raise _err(ParseError, "expected (symbol arity)", a)
                        names.append(_ident(a.items[0]))
                        arities.append(_int(a.items[1], "arity"))
                    else:
                        names.append(_ident(a))
                        arities.append(None)
                explicit = tuple(arities) if any(x is not None for x in arities) else ()
                spec: ExtensionSpec = FreeSpec(block_id, tuple(names), explicit)
            elif kind == "selector":
                if len(args) < 3:
                    raise _err(ParseError, "expected (ext selector c n s1 .. sn)", node)
                c, n = _ident(args[0]), _int(args[1], "arity")
                sels = tuple(_ident(a) for a in args[2:])
                if len(sels) != n:
                    raise _err(ArityError, f"constructor {c}/{n} needs {n} selectors, got {len(sels)}", node)
                spec = SelectorSpec(block_id, c, sels)
            elif kind in ("mono", "bound-mono"):
                want = 3 if kind == "mono" else 4
                if len(args) != want:
                    raise _err(ParseError, f"wrong number of arguments for {kind}", node)
                f, n = _ident(args[0]), _int(args[1], "arity")
                if not isinstance(args[2], SList):
                    raise _err(ParseError, "expected signature vector like (+ -)", args[2])
                signs = tuple(_tok(s, "sign") for s in args[2].items)
                if len(signs) != n:
                    raise _err(ArityError, f"signature vector length {len(signs)} != arity {n}", args[2])
                if kind == "mono":
                    spec = MonotoneSpec(block_id, f, signs)
                else:
                    t = args[3]
                    if head(t) == "term" and len(t.items) == 2:
                        t = t.items[1]
                    scope = {f"x{i}" for i in range(1, n + 1)}
                    bound = self.term(t, scope, allow_ext=False)
                    spec = BoundedMonotoneSpec(block_id, f, signs, bound)
            elif kind == "lipschitz":
                if len(args) != 3:
                    raise _err(ParseError, "expected (ext lipschitz f lambda x0)", node)
                f, lam = _ident(args[0]), _rational(args[1])
                p = args[2]
                if self.base == "LRA" and isinstance(p, Token) and RATIONAL.match(p.text):
                    point: Term = Num(_rational(p))
                else:
                    point = App(_ident(p, "point"), ())
                    if point.sym in self.functions or point.sym in self.injective:
                        raise _err(ParseError, "Lipschitz point must be a constant", p)
                spec = LipschitzSpec(block_id, f, lam, point)
            elif kind == "custom":
                spec = self.read_custom(node, args, block_id)
            else:
                raise _err(ParseError, f"unknown schema {kind!r}", items[1])
            validate(spec)
        except SpecError as e:
            raise _err(ParseError, str(e), node) from None
        return spec

    def read_custom(self, node: SList, args, block_id: str) -> CustomSpec:
        if len(args) < 3 or head(args[1]) != "syms" or head(args[2]) != "vars":
            raise _err(ParseError, "expected (ext custom <class> (syms ...) (vars ...) (cl ...)...)", node)
        cls_tok = _tok(args[0], "locality class")
        if cls_tok not in CLASS_TOKENS:
            raise _err(ParseError, "class must be one of " + ", ".join(CLASS_TOKENS), args[0])
        declared = []
        for s in args[1].items[1:]:
            if not isinstance(s, SList) or len(s.items) != 2:
                raise _err(ParseError, "expected (symbol arity)", s)
            declared.append((_ident(s.items[0]), _int(s.items[1], "arity")))
        variables = tuple(_ident(v, "variable") for v in args[2].items[1:])
        own = dict(declared)
        for v in variables:
            if v in own or v in self.functions or v in self.injective:
                raise _err(DuplicateDeclarationError, f"variable {v} clashes with a symbol", args[2])
        clauses = tuple(self.clause(c, set(variables), extra=own) for c in args[3:])
        return CustomSpec(block_id, CLASS_TOKENS[cls_tok], tuple(declared), variables, clauses)

    def register(self, spec: ExtensionSpec, node: SList, shared: bool) -> None:
        for s, n in spec.symbols.items():
            if s in self.functions or s in self.injective or s in self.predicates:
                raise _err(DuplicateDeclarationError, f"{s} is already a base symbol", node)
            if shared:
                continue
            entry = self.ext.get(s)
            if entry is None:
                self.ext[s] = [n, [spec.block_id]]
                continue
            if entry[0] is not None and n is not None and entry[0] != n:
                raise _err(ArityError, f"{s} declared with arities {entry[0]} and {n}", node)
            if entry[0] is None:
                entry[0] = n
            entry[1].append(spec.block_id)

    # terms ---------------------------------------------------------------
    def fn_arity(self, sym: str, x: SExpr, extra: dict[str, int]) -> int | None:
        for table in (extra, self.functions, self.injective):
            if sym in table:
                return table[sym]
        if sym in self.ext:
            return self.ext[sym][0]
        if sym in self.shared_syms:
            return self.shared_syms[sym]
        raise _err(UndeclaredSymbolError, f"undeclared function symbol {sym}", x)

    def term(self, x: SExpr, scope: set[str], allow_ext: bool = True,
             extra: dict[str, int] | None = None) -> Term:
        extra = extra or {}
        if isinstance(x, Token):
            text = x.text
            if RATIONAL.match(text):
                if self.base != "LRA":
                    raise _err(ParseError, "numerals are only allowed over LRA", x)
                return Num(_rational(x))
            name = _ident(x, "term")
            if name in scope:
                return Var(name)
            ar = None
            for table in (extra, self.functions, self.injective):
                if name in table:
                    ar = table[name]
            if name in self.ext and self.ext[name][0] not in (None, 0):
                ar = self.ext[name][0]
            if name in self.predicates:
                raise _err(ParseError, f"predicate {name} used as a term", x)
            if ar not in (None, 0):
                raise _err(ArityError, f"{name} has arity {ar}, used as a constant", x)
            if name in self.ext and self.ext[name][0] is None:
                if not allow_ext:
                    raise _err(ParseError, f"extension symbol {name} not allowed here", x)
                self.ext[name][0] = 0
            if not allow_ext and name in self.ext:
                raise _err(ParseError, f"extension symbol {name} not allowed here", x)
            return App(name, ())
        items = x.items
        if not items:
            raise _err(ParseError, "empty term", x)
        sym = _tok(items[0], "function symbol")
        args = items[1:]
        if sym in ARITH:
            if self.base != "LRA":
                raise _err(ParseError, f"arithmetic '{sym}' is only allowed over LRA", x)
            if len(args) != 2:
                raise _err(ArityError, f"'{sym}' takes 2 arguments", x)
            if sym == "*":
                return App("*", (Num(_rational(args[0])), self.term(args[1], scope, allow_ext, extra)))
            return App(sym, tuple(self.term(a, scope, allow_ext, extra) for a in args))
        if sym in (EQ, LE, LT, "not", "cl") or sym in self.predicates:
            raise _err(ParseError, f"{sym} used as a function symbol", x)
        name = _ident(items[0], "function symbol")
        ar = self.fn_arity(name, items[0], extra)
        if not allow_ext and name in self.ext and name not in extra:
            raise _err(ParseError, f"extension symbol {name} not allowed here", x)
        if ar is None:
            self.ext[name][0] = ar = len(args)
        if ar != len(args):
            raise _err(ArityError, f"{name} expects {ar} arguments, got {len(args)}", x)
        if not args:
            raise _err(ParseError, "use a bare identifier for constants", x)
        return App(name, tuple(self.term(a, scope, allow_ext, extra) for a in args))

    def atom(self, x: SExpr, scope: set[str], extra: dict[str, int]) -> Atom:
        if not isinstance(x, SList) or not x.items:
            raise _err(ParseError, "expected an atom", x)
        pred = _tok(x.items[0], "predicate")
        args = x.items[1:]
        if pred in (LE, LT):
            if self.base not in ORDERED:
                raise _err(ParseError, f"'{pred}' needs an ordered base theory", x)
            n = 2
        elif pred == EQ:
            n = 2
        elif pred in self.predicates:
            n = self.predicates[pred]
        elif pred in self.functions or pred in self.injective or pred in self.ext:
            raise _err(ParseError, f"function symbol {pred} used as a predicate", x)
        else:
            raise _err(UndeclaredSymbolError, f"undeclared predicate {pred}", x)
        if len(args) != n or n == 0:
            raise _err(ArityError, f"{pred} expects {n} arguments, got {len(args)}", x)
        return Atom(pred, tuple(self.term(a, scope, True, extra) for a in args))

    def clause(self, x: SExpr, scope: set[str], extra: dict[str, int] | None = None) -> Clause:
        extra = extra or {}
        if head(x) != "cl":
            raise _err(ParseError, "expected (cl ...)", x)
        lits = []
        for item in x.items[1:]:
            if head(item) == "not":
                if len(item.items) != 2:
                    raise _err(ParseError, "(not atom) takes one atom", item)
                lits.append(Literal(False, self.atom(item.items[1], scope, extra)))
            else:
                lits.append(Literal(True, self.atom(item, scope, extra)))
        if not lits:
            raise _err(ParseError, "a clause needs at least one literal", x)
        return Clause.of(*lits)

    # driver --------------------------------------------------------------
    def run(self, text: str) -> Problem:
        nodes = read_all(text)
        for node in nodes:
            self.read_decl(node)
        if self.goal_node is None:
            raise ParseError("missing (goal ...)", 1, 1)
        if nodes[-1] is not self.goal_node:
            raise _err(ParseError, "the goal must come last", nodes[-1])
        self.check_base_compat(self.goal_node)
        self.shared_syms: dict[str, int] = {}
        ext_nodes = [n for n, k in self.pending if k == "ext"]
        shared_nodes = [n for n, k in self.pending if k == "shared"]
        # selector constructors and declared symbols of every block are known
        # before any bound term or custom clause is parsed
        for i, node in enumerate(shared_nodes, start=1):
            spec = self.read_schema(node, f"S{i}")
            self.shared.append(spec)
            for s, n in spec.symbols.items():
                self.shared_syms[s] = n if n is not None else self.shared_syms.get(s)
            self.register(spec, node, shared=True)
        prelim = []
        for i, node in enumerate(ext_nodes, start=1):
            spec = self.preview(node, f"B{i}")
            self.register(spec, node, shared=False)
            prelim.append(spec)
        for s, (_, owners) in self.ext.items():
            if len(owners) != len(set(owners)):
                raise _err(DuplicateDeclarationError, f"{s} declared twice in one block", ext_nodes[0])
            if len(owners) > 1 and not self.shared:
                raise _err(DuplicateDeclarationError,
                           f"{s} appears in blocks {', '.join(owners)}; sharing symbols "
                           "between blocks needs a (shared ...) core", ext_nodes[0])
        for i, node in enumerate(ext_nodes, start=1):
            self.specs.append(self.read_schema(node, f"B{i}"))
        goal = tuple(self.clause(c, set()) for c in self.goal_node.items[1:])
        return Problem(self.base, tuple(self.functions.items()), tuple(self.injective.items()),
                       tuple(self.predicates.items()), tuple(self.specs), tuple(self.shared),
                       self.asserted, goal, self.name)

    def preview(self, node: SList, block_id: str) -> ExtensionSpec:
        """Symbol table of a schema without parsing its terms."""
        items = node.items
        kind = _tok(items[1], "schema kind") if len(items) > 1 else ""
        if kind == "custom" and len(items) > 3 and head(items[3]) == "syms":
            declared = []
            for s in items[3].items[1:]:
                if not isinstance(s, SList) or len(s.items) != 2:
                    raise _err(ParseError, "expected (symbol arity)", s)
                declared.append((_ident(s.items[0]), _int(s.items[1], "arity")))
            return CustomSpec(block_id, declared=tuple(declared))
        if kind == "bound-mono" and len(items) == 6:
            stub = SList(items[:5] + (Token("x1", node.line, node.col),), node.line, node.col)
            return self.read_schema(stub, block_id)
        return self.read_schema(node, block_id)


def parse_problem(text: str, name: str = "") -> Problem:
    return _Reader(name).run(text)


def load_problem(path: str | Path) -> Problem:
    p = Path(path)
    return parse_problem(p.read_text(encoding="utf-8"), name=str(p))


# -- printer ---------------------------------------------------------------

def spec_text(spec: ExtensionSpec, keyword: str = "ext") -> str:
    match spec:
        case FreeSpec():
            parts = [n if a is None else f"({n} {a})"
                     for n, a in zip(spec.names, spec.arities or (None,) * len(spec.names))]
            body = "free " + " ".join(parts)
        case SelectorSpec():
            body = f"selector {spec.constructor} {spec.arity} " + " ".join(spec.selectors)
        case BoundedMonotoneSpec():
            body = f"bound-mono {spec.f} {spec.arity} ({' '.join(spec.signs)}) {spec.bound}"
        case MonotoneSpec():
            body = f"mono {spec.f} {spec.arity} ({' '.join(spec.signs)})"
        case LipschitzSpec():
            body = f"lipschitz {spec.f} {format_rational(spec.lam)} {spec.point}"
        case CustomSpec():
            token = next(k for k, v in CLASS_TOKENS.items() if v is spec.asserted)
            syms = " ".join(f"({s} {n})" for s, n in spec.declared)
            body = f"custom {token} (syms {syms}) (vars {' '.join(spec.variables)})"
            if spec.clauses:
                body += " " + " ".join(map(str, spec.clauses))
        case _:
            raise TypeError(f"cannot print {spec!r}")
    return f"({keyword} {body})"


def print_problem(p: Problem) -> str:
    lines = [f"(base {p.base})"]
    lines += [f"(fun {f} {n})" for f, n in p.functions]
    lines += [f"(inj {f} {n})" for f, n in p.injective]
    lines += [f"(pred {f} {n})" for f, n in p.predicates]
    lines += [spec_text(s) for s in p.specs]
    lines += [spec_text(s, "shared") for s in p.shared]
    if p.shared_asserted:
        lines.append("(assert shared-entailment)")
    if p.goal:
        lines.append("(goal\n" + "\n".join(f"  {c}" for c in p.goal) + ")")
    else:
        lines.append("(goal)")
    return "\n".join(lines) + "\n"
