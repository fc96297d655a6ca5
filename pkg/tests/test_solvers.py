import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import finite_sat, lra_sat
from generators import random_ground, random_lra
from locex.errors import ResourceBudgetExceeded, SolverError
from locex.solvers.ground import check_witness, solve_ground
from locex.terms import Num, app, clause, const, eq, le, neg, neq, pos

a, b, c = const("a"), const("b"), const("c")
a1, b1 = const("a1"), const("b1")


def test_eq_transitivity():
    F = [clause(eq(a, b)), clause(eq(b, c)), clause(neq(a, c))]
    v = solve_ground("EQ", F)
    assert not v.sat and v.kind == "unsat"
    assert set(v.core) <= set(F)


def test_lra_unit_propagation():
    F = [clause(le(a, b)), clause(le(a1, b1), neg("<=", a, b)), clause(neg("<=", a1, b1))]
    assert not solve_ground("LRA", F).sat


def test_po_cycle_forces_equality():
    F = [clause(le(a, b)), clause(le(b, c)), clause(le(c, a)), clause(neq(a, c))]
    assert not solve_ground("PO", F).sat


def test_po_allows_incomparable():
    F = [clause(neg("<=", a, b)), clause(neg("<=", b, a))]
    assert solve_ground("PO", F).sat
    assert not solve_ground("TO", F).sat


def test_injective_constructor():
    F = [clause(eq(app("k", a, b), app("k", c, b))), clause(neq(a, c))]
    assert solve_ground("EQ", F).sat
    assert not solve_ground("EQ", F, injective={"k"}).sat


def test_lra_witness_and_perturbation():
    one = Num(Fraction(1))
    F = [clause(le(a, b)), clause(pos("<", app("+", a, one), b))]
    v = solve_ground("LRA", F)
    assert v.sat and check_witness("LRA", F, v.witness)
    vals = dict(v.witness.values)
    vals["b"] = vals["a"]
    bad = replace(v.witness, values=tuple(sorted(vals.items())))
    assert not check_witness("LRA", F, bad)


def test_struct_witness_perturbation():
    F = [clause(eq(a, b)), clause(neq(b, c))]
    v = solve_ground("EQ", F)
    assert v.sat and check_witness("EQ", F, v.witness)
    merged = (tuple(t for cls in v.witness.classes for t in cls),)
    assert not check_witness("EQ", F, replace(v.witness, classes=merged))


def test_empty_problem():
    for base in ("EQ", "PO", "TO", "LRA"):
        v = solve_ground(base, [])
        assert v.sat and check_witness(base, [], v.witness)


def test_empty_clause_is_unsat():
    assert not solve_ground("EQ", [clause()]).sat


def test_unknown_base():
    with pytest.raises(SolverError):
        solve_ground("BOOL", [])


def test_budget():
    F = [clause(eq(a, b), eq(a, c)), clause(eq(b, c), neq(a, c))]
    assert solve_ground("EQ", F).nodes > 1
    with pytest.raises(ResourceBudgetExceeded):
        solve_ground("EQ", F, budget=1)


@given(st.sampled_from(["EQ", "PO", "TO"]), st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_agrees_with_model_enumeration(base, seed):
    F = random_ground(random.Random(seed), base, n_consts=3 if base == "EQ" else 4)
    v = solve_ground(base, F)
    assert v.sat == finite_sat(base, F)
    if v.sat:
        assert check_witness(base, F, v.witness)
    else:
        assert not finite_sat(base, list(v.core))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_lra_agrees_with_case_splits(seed):
    rng = random.Random(seed)
    F = random_lra(rng, n_vars=rng.randint(1, 4))
    v = solve_ground("LRA", F)
    assert v.sat == lra_sat(F)
    if v.sat:
        assert check_witness("LRA", F, v.witness)
