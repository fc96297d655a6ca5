"""Exact linear rational arithmetic: Fourier-Motzkin with strict bounds.

A constraint is ``sum(c_i * x_i) + k  <  0`` or ``<= 0``.  Equalities are
eliminated by substitution first, then variables are projected out one at
a time.  Each elimination step keeps the bounds it consumed so a satisfying
point can be rebuilt by back-substitution; the rebuild prefers 0, then
small integers, then midpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ResourceBudgetExceeded, SolverError
from ..terms import Num, Term, Var

ZERO = Fraction(0)


@dataclass(frozen=True)
class Lin:
    coeffs: tuple[tuple[str, Fraction], ...]
    const: Fraction = ZERO

    @staticmethod
    def make(coeffs: dict[str, Fraction], const: Fraction = ZERO) -> Lin:
        return Lin(tuple(sorted((v, c) for v, c in coeffs.items() if c != 0)), Fraction(const))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def add(self, other: Lin, scale: Fraction = Fraction(1)) -> Lin:
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, ZERO) + scale * c
        return Lin.make(d, self.const + scale * other.const)

    def scale(self, k: Fraction) -> Lin:
        return Lin.make({v: c * k for v, c in self.coeffs}, self.const * k)

    def coeff(self, v: str) -> Fraction:
        for name, c in self.coeffs:
            if name == v:
                return c
        return ZERO

    def value(self, env: dict[str, Fraction]) -> Fraction:
        return self.const + sum((c * env[v] for v, c in self.coeffs), ZERO)

    def substitute(self, v: str, expr: Lin) -> Lin:
        c = self.coeff(v)
        if c == 0:
            return self
        d = self.as_dict()
        del d[v]
        return Lin.make(d, self.const).add(expr, c)


def linearize(t: Term, atom_name=None) -> Lin:
    """Linear form of an arithmetic term; constants become variables.

    ``atom_name`` maps non-arithmetic applications to variable names; without
    it such terms are rejected.
    """
    if isinstance(t, Num):
        return Lin((), t.value)
    if isinstance(t, Var):
        raise SolverError(f"non-ground term {t}")
    if not t.args:
        return Lin(((t.sym, Fraction(1)),))
    if t.sym == "+":
        return linearize(t.args[0], atom_name).add(linearize(t.args[1], atom_name))
    if t.sym == "-":
        return linearize(t.args[0], atom_name).add(linearize(t.args[1], atom_name), Fraction(-1))
    if t.sym == "*":
        if not isinstance(t.args[0], Num):
            raise SolverError(f"non-linear product {t}")
        return linearize(t.args[1], atom_name).scale(t.args[0].value)
    if atom_name is None:
        raise SolverError(f"symbol {t.sym} outside linear arithmetic")
    return Lin(((atom_name(t), Fraction(1)),))


@dataclass(frozen=True)
class Constraint:
    lin: Lin
    strict: bool

    def holds(self, env: dict[str, Fraction]) -> bool:
        v = self.lin.value(env)
        return v < 0 if self.strict else v <= 0


def _normalize(c: Constraint) -> tuple[tuple, Fraction, bool] | None:
    if not c.lin.coeffs:
        return None
    k = abs(c.lin.coeffs[0][1])
    lin = c.lin.scale(1 / k)
    return lin.coeffs, lin.const, c.strict


def _prune(cons: list[Constraint]) -> list[Constraint] | None:
    """Drop trivial and dominated constraints; None if a constant one is false."""
    best: dict[tuple, tuple[Fraction, bool]] = {}
    order: list[tuple] = []
    for c in cons:
        n = _normalize(c)
        if n is None:
            k = c.lin.const
            if k > 0 or (c.strict and k == 0):
                return None
            continue
        coeffs, const, strict = n
        cur = best.get(coeffs)
        if cur is None:
            best[coeffs] = (const, strict)
            order.append(coeffs)
        elif const > cur[0] or (const == cur[0] and strict and not cur[1]):
            best[coeffs] = (const, strict)
    return [Constraint(Lin(k, best[k][0]), best[k][1]) for k in order]


class Infeasible(Exception):
    pass


def feasible(equalities: list[Lin], constraints: list[Constraint],
             budget: int = 200_000) -> dict[str, Fraction] | None:
    """A satisfying assignment for the conjunction, or None."""
    variables = sorted({v for e in equalities for v, _ in e.coeffs}
                       | {v for c in constraints for v, _ in c.lin.coeffs})
    subst: list[tuple[str, Lin]] = []
    eqs = list(equalities)
    cons = list(constraints)
    while eqs:
        e = eqs.pop(0)
        for v, e2 in subst:
            e = e.substitute(v, e2)
        if not e.coeffs:
            if e.const != 0:
                return None
            continue
        v, c = e.coeffs[0]
        # v = -(rest)/c
        expr = Lin.make({w: -d / c for w, d in e.coeffs if w != v}, -e.const / c)
        subst.append((v, expr))
        eqs = [x.substitute(v, expr) for x in eqs]
        cons = [Constraint(x.lin.substitute(v, expr), x.strict) for x in cons]
    steps: list[tuple[str, list[Constraint], list[Constraint]]] = []
    work = 0
    pruned = _prune(cons)
    if pruned is None:
        return None
    cons = pruned
    while True:
        live = sorted({v for c in cons for v, _ in c.lin.coeffs})
        if not live:
            break

        def cost(v: str) -> tuple[int, str]:
            p = sum(1 for c in cons if c.lin.coeff(v) > 0)
            n = sum(1 for c in cons if c.lin.coeff(v) < 0)
            return (p * n - p - n, v)

        v = min(live, key=cost)
        uppers = [c for c in cons if c.lin.coeff(v) > 0]
        lowers = [c for c in cons if c.lin.coeff(v) < 0]
        rest = [c for c in cons if c.lin.coeff(v) == 0]
        for u in uppers:
            for lo in lowers:
                a, b = u.lin.coeff(v), -lo.lin.coeff(v)
                rest.append(Constraint(u.lin.scale(b).add(lo.lin.scale(a)), u.strict or lo.strict))
                work += 1
                if work > budget:
                    raise ResourceBudgetExceeded("Fourier-Motzkin budget exceeded")
        steps.append((v, uppers, lowers))
        pruned = _prune(rest)
        if pruned is None:
            return None
        cons = pruned
    env: dict[str, Fraction] = {}
    for v, uppers, lowers in reversed(steps):
        env[v] = _pick(v, uppers, lowers, env)
    for v in variables:
        if v not in env and all(v != s for s, _ in subst):
            env[v] = ZERO
    for v, expr in reversed(subst):
        env[v] = expr.value(env)
    return {v: env[v] for v in variables}


def _pick(v: str, uppers, lowers, env) -> Fraction:
    hi, hi_strict, lo, lo_strict = None, False, None, False
    for c in uppers:
        a = c.lin.coeff(v)
        rest = c.lin.substitute(v, Lin((), ZERO))
        bound = -rest.value(_with_zero(rest, env)) / a
        if hi is None or bound < hi or (bound == hi and c.strict):
            hi, hi_strict = bound, c.strict
    for c in lowers:
        a = c.lin.coeff(v)
        rest = c.lin.substitute(v, Lin((), ZERO))
        bound = -rest.value(_with_zero(rest, env)) / a
        if lo is None or bound > lo or (bound == lo and c.strict):
            lo, lo_strict = bound, c.strict

    def ok(x: Fraction) -> bool:
        if hi is not None and (x > hi or (hi_strict and x == hi)):
            return False
        if lo is not None and (x < lo or (lo_strict and x == lo)):
            return False
        return True

    if ok(ZERO):
        return ZERO
    if lo is not None and hi is not None:
        k = Fraction(math.floor(lo) + 1) if lo_strict or lo.denominator != 1 else lo
        if ok(k):
            return k
        k = Fraction(math.ceil(lo))
        if ok(k):
            return k
        return (lo + hi) / 2
    if lo is not None:
        k = Fraction(math.floor(lo) + 1)
        return lo if not lo_strict and ok(lo) else k
    k = Fraction(math.ceil(hi) - 1)
    return hi if not hi_strict and ok(hi) else k


def _with_zero(lin: Lin, env: dict[str, Fraction]) -> dict[str, Fraction]:
    missing = [v for v, _ in lin.coeffs if v not in env]
    if not missing:
        return env
    out = dict(env)
    for v in missing:
        out[v] = ZERO
    return out
