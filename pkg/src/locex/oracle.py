"""Brute-force weak-partial-model search.

Decides T0 u K u G by looking for a partial structure in which every
ground subterm of K and G is defined, G holds, and K holds weakly.  The
search never looks at instances of K: clauses are evaluated semantically
over the carrier, so it is independent of the instantiation pipeline.

For EQ/PO/TO the carrier is the set of values of the ground terms, which
loses nothing because weak satisfaction is preserved under weak
substructures.  Base functions are partial on that carrier; injective
ones are checked for partial injectivity.  For LRA the free terms take
values on a finite grid, so "unsat(oracle)" there only means no model on
that grid.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterator, Sequence

from .catalog import expand, schema_ground_subterms
from .errors import ResourceBudgetExceeded, SolverError, SpecError
from .problem import Problem
from .terms import ARITH, EQ, LE, LT, App, Clause, Num, Term, Var, apply_substitution, subterms, term_key

DEFAULT_BUDGET = 2_000_000

_UNDEF = object()


@dataclass(frozen=True)
class OracleVerdict:
    sat: bool
    model: tuple[str, ...] = ()
    nodes: int = 0

    @property
    def label(self) -> str:
        return "sat(oracle)" if self.sat else "unsat(oracle)"


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ResourceBudgetExceeded(f"oracle budget of {self.limit} nodes exceeded")


def parse_grid(text: str) -> tuple[Fraction, ...]:
    try:
        lo, hi, step = (Fraction(p) for p in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"grid must be lo:hi:step, got {text!r}") from exc
    if step <= 0 or hi < lo:
        raise ValueError("grid needs step > 0 and lo <= hi")
    out, v = [], lo
    while v <= hi:
        out.append(v)
        v += step
    return tuple(out)


def problem_clauses(problem: Problem) -> tuple[Clause, ...]:
    seen: dict[Clause, None] = {}
    for spec in problem.specs:
        for c in expand(spec):
            seen.setdefault(c)
    return tuple(seen)


def _ground(t: Term) -> bool:
    return not any(isinstance(s, Var) for s in subterms(t))


def ground_terms(problem: Problem, K: Sequence[Clause]) -> list[Term]:
    found: dict[Term, None] = {}

    def add(t: Term) -> None:
        for s in subterms(t):
            found.setdefault(s)

    def visit(t: Term) -> None:
        if _ground(t):
            add(t)
        elif isinstance(t, App):
            for a in t.args:
                visit(a)

    for c in (*problem.goal, *K):
        for lit in c.lits:
            for a in lit.atom.args:
                visit(a)
    for spec in problem.specs:
        for t in schema_ground_subterms(spec):
            add(t)
    return sorted(found, key=term_key)


# -- semantic evaluation -------------------------------------------------------

class _Structure:
    """Partial interpretation given by tables; numeric symbols evaluate natively."""

    def __init__(self, tables: dict[str, dict[tuple, Hashable]], numeric: bool):
        self.tables = tables
        self.numeric = numeric

    def eval(self, t: Term, beta: dict[str, Hashable]):
        if isinstance(t, Var):
            return beta[t.name]
        if isinstance(t, Num):
            return t.value
        args = []
        for a in t.args:
            v = self.eval(a, beta)
            if v is _UNDEF:
                return _UNDEF
            args.append(v)
        if self.numeric and t.sym in ARITH:
            x, y = args
            return x + y if t.sym == "+" else x - y if t.sym == "-" else x * y
        return self.tables.get(t.sym, {}).get(tuple(args), _UNDEF)


class _Bits:
    """Boolean unknowns for order and predicate facts among carrier elements."""

    def __init__(self) -> None:
        self.ids: dict[tuple, int] = {}

    def var(self, key: tuple) -> int:
        v = self.ids.get(key)
        if v is None:
            v = self.ids[key] = len(self.ids) + 1
        return v


def _literal_value(S: _Structure, bits: _Bits | None, pred: str, vals: list, positive: bool):
    """True, False, or a signed bit id."""
    if pred == EQ:
        return (vals[0] == vals[1]) == positive
    if S.numeric:
        if pred == LE:
            return (vals[0] <= vals[1]) == positive
        if pred == LT:
            return (vals[0] < vals[1]) == positive
        raise SolverError(f"predicate {pred} over LRA")
    if pred in (LE, LT):
        a, b = vals
        if a == b:
            return (pred == LE) == positive
        v = bits.var((LE, a, b))
    else:
        v = bits.var((pred, tuple(vals)))
    return v if positive else -v


def _clause_constraint(S: _Structure, bits: _Bits | None, C: Clause, beta: dict):
    """None when the clause is already true, else the list of open bit literals."""
    out = []
    for lit in C.lits:
        vals = [S.eval(a, beta) for a in lit.atom.args]
        if any(v is _UNDEF for v in vals):
            return None
        r = _literal_value(S, bits, lit.atom.pred, vals, lit.positive)
        if r is True:
            return None
        if r is not False:
            out.append(r)
    return out


class _Template:
    """A K clause with variables ordered for early detection of undefined terms."""

    def __init__(self, C: Clause):
        self.clause = C
        order: list[str] = []
        checks: list[tuple[Term, frozenset[str]]] = []
        for lit in C.lits:
            for a in lit.atom.args:
                for s in subterms(a):
                    if isinstance(s, App) and s.args and s.sym not in ARITH:
                        vs = [x.name for x in subterms(s) if isinstance(x, Var)]
                        for v in vs:
                            if v not in order:
                                order.append(v)
                        if vs:
                            checks.append((s, frozenset(vs)))
        for lit in C.lits:
            for a in lit.atom.args:
                for s in subterms(a):
                    if isinstance(s, Var) and s.name not in order:
                        order.append(s.name)
        self.order = order
        self.at_depth: list[list[Term]] = [[] for _ in order]
        pos = {v: i for i, v in enumerate(order)}
        for s, vs in checks:
            self.at_depth[max(pos[v] for v in vs)].append(s)

    def constraints(self, S: _Structure, bits: _Bits | None, carrier: Sequence,
                    budget: _Budget) -> Iterator[list[int]]:
        beta: dict[str, Hashable] = {}
        n = len(self.order)

        def rec(d: int) -> Iterator[list[int]]:
            if d == n:
                budget.tick()
                r = _clause_constraint(S, bits, self.clause, beta)
                if r is not None:
                    yield r
                return
            v = self.order[d]
            for e in carrier:
                beta[v] = e
                if any(S.eval(t, beta) is _UNDEF for t in self.at_depth[d]):
                    continue
                yield from rec(d + 1)
            beta.pop(v, None)

        yield from rec(0)


# -- a small propositional search over order/predicate bits --------------------

def _sat(clauses: list[list[int]], nvars: int, budget: _Budget) -> dict[int, bool] | None:
    assign: dict[int, bool] = {}
    watch: dict[int, list[int]] = {}
    for i, c in enumerate(clauses):
        for l in c:
            watch.setdefault(abs(l), []).append(i)

    def status(c: list[int]):
        open_lits = []
        for l in c:
            v = assign.get(abs(l))
            if v is None:
                open_lits.append(l)
            elif v == (l > 0):
                return True
        return open_lits

    def propagate(trail: list[int], start: list[int]) -> bool:
        queue = list(start)
        while queue:
            var = queue.pop()
            for ci in watch.get(var, ()):
                st = status(clauses[ci])
                if st is True:
                    continue
                if not st:
                    return False
                if len(st) == 1:
                    l = st[0]
                    assign[abs(l)] = l > 0
                    trail.append(abs(l))
                    queue.append(abs(l))
        return True

    def undo(trail: list[int]) -> None:
        for v in trail:
            del assign[v]

    def rec() -> bool:
        budget.tick()
        best = None
        for c in clauses:
            st = status(c)
            if st is True:
                continue
            if not st:
                return False
            if best is None or len(st) < len(best):
                best = st
                if len(st) == 1:
                    break
        if best is None:
            return True
        var = abs(best[0])
        for val in (best[0] > 0, best[0] < 0):
            trail = [var]
            assign[var] = val
            if propagate(trail, [var]) and rec():
                return True
            undo(trail)
        return False

    for c in clauses:
        if not c:
            return None
    units = [c[0] for c in clauses if len(c) == 1]
    trail: list[int] = []
    for l in units:
        cur = assign.get(abs(l))
        if cur is None:
            assign[abs(l)] = l > 0
            trail.append(abs(l))
        elif cur != (l > 0):
            return None
    if not propagate(trail, list(trail)):
        return None
    return dict(assign) if rec() else None


def _closure(edges: dict) -> dict:
    """Transitive closure of a successor map."""
    reach = {a: set(bs) for a, bs in edges.items()}
    changed = True
    while changed:
        changed = False
        for a, bs in reach.items():
            extra = set().union(*(reach.get(b, ()) for b in bs)) - bs
            if extra:
                bs |= extra
                changed = True
    return reach


def _order_axioms(bits: _Bits, k: int, total: bool) -> list[list[int]]:
    le = lambda a, b: bits.var((LE, a, b))
    out = []
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            out.append([-le(a, b), -le(b, a)])
            if total and a < b:
                out.append([le(a, b), le(b, a)])
            for c in range(k):
                if c in (a, b):
                    continue
                out.append([-le(a, b), -le(b, c), le(a, c)])
    return out


# -- the search --------------------------------------------------------------------

class _Search:
    def __init__(self, problem: Problem, budget: int, grid: Sequence[Fraction] | None):
        self.problem = problem
        self.base = problem.base
        self.numeric = problem.base == "LRA"
        if self.numeric and not grid:
            raise ValueError("the LRA oracle needs a value grid")
        self.grid = tuple(grid or ())
        self.budget = _Budget(budget)
        self.K = problem_clauses(problem)
        if not self.numeric:
            for c in (*problem.goal, *self.K):
                for lit in c.lits:
                    for a in lit.atom.args:
                        if any(isinstance(s, Num) or (isinstance(s, App) and s.sym in ARITH)
                               for s in subterms(a)):
                            raise SpecError(f"arithmetic in {c} outside LRA")
        self.injective = frozenset(c for c, _ in problem.injective)
        self.all_terms = ground_terms(problem, self.K)
        self.terms = [t for t in self.all_terms if not isinstance(t, Num)
                      and not (isinstance(t, App) and t.sym in ARITH)]
        self.index = {t: i for i, t in enumerate(self.terms)}
        self.templates = [_Template(c) for c in self.K]
        G = [*problem.goal, *(c for c in self.K if not any(True for _ in _vars(c)))]
        self.G = G
        # ground clauses checkable during the term search, keyed by their last term;
        # pure equalities are decided outright, the rest go through a partial bit check
        self.early: list[list[Clause]] = [[] for _ in self.terms]
        self.early_bits: list[list[Clause]] = [[] for _ in self.terms]
        if not self.numeric:
            self.order_terms(G)
            for c in G + self.covered_instances():
                last = max((self.index[s] for l in c.lits for a in l.atom.args
                            for s in subterms(a)), default=None)
                if last is None:
                    continue
                if all(l.atom.pred == EQ for l in c.lits):
                    self.early[last].append(c)
                else:
                    self.early_bits[last].append(c)

    def order_terms(self, checks: list[Clause]) -> None:
        """Search the terms of small ground clauses first, so they fail near the root."""
        order: dict[Term, None] = {}

        def add(t: Term) -> None:
            if t in order or t not in self.index:
                return
            if isinstance(t, App):
                for a in t.args:
                    add(a)
            order[t] = None

        def terms_of(c: Clause) -> list[Term]:
            return [s for l in c.lits for a in l.atom.args for s in subterms(a) if s in self.index]

        for c in sorted(checks, key=lambda c: len(set(terms_of(c)))):
            for t in terms_of(c):
                add(t)
        for t in self.terms:
            add(t)
        self.terms = list(order)
        self.index = {t: i for i, t in enumerate(self.terms)}

    def covered_instances(self) -> list[Clause]:
        """Instances of K at searched terms whose function terms are all searched.

        Every such instance is one of the assignments the leaf check tries,
        so refuting it early loses nothing.
        """
        out: list[Clause] = []
        for c in self.K:
            names = list(dict.fromkeys(_vars(c)))
            if not names:
                continue
            for combo in itertools.product(self.terms, repeat=len(names)):
                inst = apply_substitution(c, dict(zip(names, combo)))
                if all(s in self.index for l in inst.lits for a in l.atom.args for s in subterms(a)):
                    out.append(inst)
        return out

    def run(self) -> OracleVerdict:
        val: dict[Term, Hashable] = {}
        tables: dict[str, dict[tuple, Hashable]] = {}
        inj_seen: dict[tuple, tuple] = {}
        n = len(self.terms)

        def rec(i: int, used: int) -> OracleVerdict | None:
            self.budget.tick()
            if i == n:
                return self.leaf(val, tables, used)
            t = self.terms[i]
            args = tuple(self.numeric_value(a, val) for a in t.args)
            table = tables.setdefault(t.sym, {})
            forced = table.get(args, _UNDEF)
            options = [forced] if forced is not _UNDEF else (self.grid if self.numeric else range(used + 1))
            for v in options:
                if t.sym in self.injective and t.args:
                    prev = inj_seen.get((t.sym, v))
                    if prev is not None and prev != args:
                        continue
                fresh = forced is _UNDEF
                val[t] = v
                if fresh:
                    table[args] = v
                    if t.sym in self.injective and t.args:
                        inj_seen[(t.sym, v)] = args
                new_used = used + 1 if (not self.numeric and v == used) else used
                if self.early_ok(i, val) and self.early_order_ok(i, tables, new_used):
                    r = rec(i + 1, new_used)
                    if r is not None:
                        return r
                if fresh:
                    del table[args]
                    if t.sym in self.injective and t.args:
                        del inj_seen[(t.sym, v)]
                del val[t]
            return None

        result = rec(0, 0)
        if result is None:
            return OracleVerdict(False, (), self.budget.used)
        return result

    def numeric_value(self, t: Term, val: dict) -> Hashable:
        if isinstance(t, Num):
            return t.value
        if isinstance(t, App) and t.sym in ARITH:
            x = self.numeric_value(t.args[0], val) if t.sym != "*" else t.args[0].value
            y = self.numeric_value(t.args[1], val)
            return x + y if t.sym == "+" else x - y if t.sym == "-" else x * y
        return val[t]

    def early_ok(self, i: int, val: dict) -> bool:
        for c in self.early[i]:
            if not any((val[l.atom.args[0]] == val[l.atom.args[1]]) == l.positive for l in c.lits):
                return False
        return True

    def early_order_ok(self, i: int, tables: dict, used: int) -> bool:
        """Refute the completed ground clauses with order and predicate literals.

        Only unit facts are propagated, through the reflexive-transitive closure
        of the order facts; the full check happens at the leaf.
        """
        if not self.early_bits[i]:
            return True
        S = _Structure(tables, False)
        bits = _Bits()
        pending: list[list[int]] = []
        for j in range(i + 1):
            for c in self.early_bits[j]:
                r = _clause_constraint(S, bits, c, {})
                if r is None:
                    continue
                if not r:
                    return False
                pending.append(r)
        key = {v: k for k, v in bits.ids.items()}
        ordered = self.base in ("PO", "TO")
        total = self.base == "TO"
        facts: dict[int, bool] = {}
        while True:
            above: dict[Hashable, set] = {}
            for v, pos in facts.items():
                k = key[v]
                if k[0] != LE:
                    continue
                a, b = k[1], k[2]
                if pos:
                    above.setdefault(a, set()).add(b)
                elif total:
                    above.setdefault(b, set()).add(a)
            reach = _closure(above)
            if ordered and any(a != b and a in reach.get(b, ()) for a, bs in reach.items() for b in bs):
                return False
            if any(not pos and key[v][0] == LE and key[v][2] in reach.get(key[v][1], ())
                   for v, pos in facts.items()):
                return False

            def value(lit: int):
                v = abs(lit)
                got = facts.get(v)
                if got is None and key[v][0] == LE:
                    a, b = key[v][1], key[v][2]
                    if b in reach.get(a, ()):
                        got = True
                    elif ordered and a in reach.get(b, ()):
                        got = False
                if got is None:
                    return None
                return got == (lit > 0)

            changed, rest = False, []
            for c in pending:
                open_lits, sat = [], False
                for lit in c:
                    r = value(lit)
                    if r is True:
                        sat = True
                        break
                    if r is None:
                        open_lits.append(lit)
                if sat:
                    continue
                if not open_lits:
                    return False
                if len(open_lits) == 1:
                    facts[abs(open_lits[0])] = open_lits[0] > 0
                    changed = True
                else:
                    rest.append(open_lits)
            pending = rest
            if not changed:
                return True

    def leaf(self, val: dict, tables: dict, used: int) -> OracleVerdict | None:
        S = _Structure(tables, self.numeric)
        if self.numeric:
            carrier = sorted({self.numeric_value(t, val) for t in self.all_terms})
            bits = None
        else:
            carrier = list(range(used))
            bits = _Bits()
        constraints: list[list[int]] = []
        for c in self.G:
            r = _clause_constraint(S, bits, c, {})
            if r is None:
                continue
            if not r:
                return None
            constraints.append(r)
        for tpl in self.templates:
            if not tpl.order:
                continue
            for r in tpl.constraints(S, bits, carrier, self.budget):
                if not r:
                    return None
                constraints.append(r)
        facts: dict[int, bool] = {}
        if bits is not None and (constraints or self.base in ("PO", "TO")):
            if self.base in ("PO", "TO"):
                constraints += _order_axioms(bits, used, self.base == "TO")
            model = _sat(constraints, len(bits.ids), self.budget)
            if model is None:
                return None
            facts = model
        return OracleVerdict(True, self.describe(val, bits, facts), self.budget.used)

    def describe(self, val: dict, bits: _Bits | None, facts: dict[int, bool]) -> tuple[str, ...]:
        lines = []
        groups: dict[Hashable, list[str]] = {}
        for t in self.terms:
            groups.setdefault(val[t], []).append(str(t))
        for v, ts in groups.items():
            lines.append(f"{v}: {' '.join(ts)}")
        if bits is not None:
            for key, b in sorted(bits.ids.items(), key=lambda kv: kv[1]):
                if facts.get(b):
                    lines.append(f"fact {key}")
        return tuple(lines)


def _vars(c: Clause) -> Iterator[str]:
    for lit in c.lits:
        for a in lit.atom.args:
            for s in subterms(a):
                if isinstance(s, Var):
                    yield s.name


def oracle(problem: Problem, budget: int = DEFAULT_BUDGET,
           grid: Sequence[Fraction] | None = None) -> OracleVerdict:
    """Search for a weak partial model of T0 u K u G with all ground subterms defined."""
    return _Search(problem, budget, grid).run()


__all__ = ["OracleVerdict", "oracle", "parse_grid", "problem_clauses", "ground_terms",
           "DEFAULT_BUDGET"]
