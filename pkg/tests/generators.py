"""Random problem generators shared by the property and acceptance tests."""
from __future__ import annotations

import itertools
import random
import re
from fractions import Fraction

from locex.combiner import Rejection, certify
from locex.problem import Problem, parse_problem
from locex.terms import EQ, LE, LT, App, Atom, Clause, Literal, Num, Var
from locex.weak import PartialStructure

CONSTANTS = ("a", "b", "c", "d")


def _schema_menu(base: str) -> list[tuple[str, str]]:
    """(declaration, kind) pairs; each kind uses its own symbols."""
    menu = [("(ext free f)", "free-f"), ("(ext free g)", "free-g"), ("(ext free (h 2))", "free-h")]
    menu.append(("(ext selector k 2 s1 s2)", "selector"))
    if base in ("PO", "TO"):
        menu += [("(ext mono m 1 (+))", "mono+"), ("(ext mono m 1 (-))", "mono-"),
                 ("(ext mono n 2 (+ -))", "mono2")]
    return menu


_SYMBOLS = {"free-f": [("f", 1)], "free-g": [("g", 1)], "free-h": [("h", 2)],
            "selector": [("s1", 1), ("s2", 1)], "mono+": [("m", 1)], "mono-": [("m", 1)],
            "mono2": [("n", 2)]}


def random_problem(rng: random.Random, max_literals: int = 6, n_constants: int = 4) -> Problem:
    """A certified problem over EQ/PO/TO with Mon/Free/Selector blocks."""
    while True:
        base = rng.choice(("EQ", "PO", "TO"))
        menu = _schema_menu(base)
        picked = rng.sample(menu, rng.choice((1, 1, 2)))
        kinds = sorted({k for _, k in picked})
        if len({s for k in kinds for s, _ in _SYMBOLS[k]}) != sum(len(_SYMBOLS[k]) for k in kinds):
            continue
        decls = [f"(base {base})"]
        if "selector" in kinds:
            decls.append("(inj k 2)")
        decls += [d for d, _ in picked]
        consts = list(CONSTANTS[:rng.randint(2, n_constants)])
        funcs = [s for k in kinds for s in _SYMBOLS[k]]

        def term(depth: int) -> str:
            r = rng.random()
            if depth == 0 or r < 0.4 or not funcs:
                return rng.choice(consts)
            if "selector" in kinds and r < 0.5:
                return f"(k {term(0)} {term(0)})"
            f, n = rng.choice(funcs)
            sub = depth - 1 if n == 1 else 0
            return f"({f} {' '.join(term(sub) for _ in range(n))})"

        def literal() -> str:
            s, t = term(2), term(2)
            preds = ["=", "="] if base == "EQ" else ["=", "<=", "<="]
            if base == "TO":
                preds.append("<")
            p = rng.choice(preds)
            a = f"({p} {s} {t})"
            return a if rng.random() < 0.7 else f"(not {a})"

        clauses = []
        n_lits = rng.randint(1, max_literals)
        if n_lits >= 3 and len(consts) >= 2 and rng.random() < 0.5:
            # a literal, a link x ~ y, and the negated literal with x renamed to y
            x, y = rng.sample(consts, 2)
            lit = literal()
            while not re.search(rf"\b{x}\b", lit):
                lit = literal()
            twin = re.sub(rf"\b{x}\b", y, lit)
            twin = twin[5:-1] if twin.startswith("(not ") else f"(not {twin})"
            link = "=" if base == "EQ" or rng.random() < 0.5 else "<="
            clauses += [f"(cl {lit})", f"(cl ({link} {x} {y}))", f"(cl {twin})"]
            n_lits -= 3
        left = n_lits
        while left > 0:
            size = min(left, rng.choice((1, 1, 2)))
            clauses.append("(cl " + " ".join(literal() for _ in range(size)) + ")")
            left -= size
        text = "".join(decls) + "(goal " + " ".join(clauses) + ")"
        problem = parse_problem(text)
        if isinstance(certify(problem), Rejection):
            continue
        return problem


# -- random ground clause sets for the base solvers --------------------------------

def _const(i: int) -> App:
    return App(f"c{i}", ())


def random_ground(rng: random.Random, base: str, n_consts: int = 4, n_clauses: int = 5,
                  pred: bool = True, funcs: bool = True) -> list[Clause]:
    consts = [_const(i) for i in range(n_consts)]

    def term():
        if funcs and base == "EQ" and rng.random() < 0.25:
            return App("u", (rng.choice(consts[:2]),))
        return rng.choice(consts)

    def atom() -> Atom:
        if base == "EQ":
            if pred and rng.random() < 0.25:
                return Atom("p", (term(),))
            return Atom(EQ, (term(), term()))
        return Atom(rng.choice((EQ, LE, LE, LT) if base != "PO" else (EQ, LE, LE, LT)),
                    (term(), term()))

    out = []
    for _ in range(n_clauses):
        lits = [Literal(rng.random() < 0.55, atom()) for _ in range(rng.choice((1, 1, 2, 3)))]
        out.append(Clause.of(*lits))
    return out


def random_lra(rng: random.Random, n_vars: int = 3, n_clauses: int = 4) -> list[Clause]:
    xs = [App(f"x{i}", ()) for i in range(n_vars)]

    def lin():
        t = None
        for x in rng.sample(xs, rng.randint(1, min(2, n_vars))):
            coef = Fraction(rng.choice((-2, -1, 1, 1, 2, 3)), rng.choice((1, 1, 2)))
            part = x if coef == 1 else App("*", (Num(coef), x))
            t = part if t is None else App(rng.choice(("+", "-")), (t, part))
        return t

    def atom() -> Atom:
        rhs = Num(Fraction(rng.randint(-3, 3)))
        return Atom(rng.choice((EQ, LE, LE, LT)), (lin(), rhs if rng.random() < 0.7 else lin()))

    return [Clause.of(*(Literal(rng.random() < 0.6, atom()) for _ in range(rng.choice((1, 1, 2)))))
            for _ in range(n_clauses)]


# -- total finite structures for weak-vs-classical checks ----------------------------

def random_total_structure(rng: random.Random, size: int) -> PartialStructure:
    carrier = tuple(f"e{i}" for i in range(size))
    funcs = {"f": {(e,): rng.choice(carrier) for e in carrier},
             "g": {(e, d): rng.choice(carrier) for e in carrier for d in carrier},
             "k": {(): rng.choice(carrier)}}
    preds = {"<=": frozenset(p for p in itertools.product(carrier, repeat=2) if rng.random() < 0.5),
             "p": frozenset((e,) for e in carrier if rng.random() < 0.5)}
    return PartialStructure(carrier, funcs, preds)


def random_clause(rng: random.Random) -> Clause:
    def term(d):
        r = rng.random()
        if d == 0 or r < 0.3:
            return rng.choice([Var("x"), Var("y"), App("k")])
        if r < 0.7:
            return App("f", (term(d - 1),))
        return App("g", (term(d - 1), term(d - 1)))

    lits = []
    for _ in range(rng.randint(1, 3)):
        pred = rng.choice(["=", "<=", "<", "p"])
        args = (term(2),) if pred == "p" else (term(2), term(2))
        lits.append(Literal(rng.random() < 0.5, Atom(pred, args)))
    return Clause.of(*lits)
