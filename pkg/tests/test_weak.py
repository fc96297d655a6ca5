import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_clause, random_total_structure
from locex.catalog import MonotoneSpec, expand
from locex.errors import UndefinedVariableError
from locex.terms import Clause, Var, app, clause, const, eq, implies, neq
from locex.weak import (
    NOT_FOUND,
    UNDEFINED,
    PartialStructure,
    check_weak_embedding,
    eval_term,
    find_total_extension,
    parse_structure,
    sat_clause,
    total_extensions,
    weak_sat_clause,
    weak_sat_set,
)

x, y = Var("x"), Var("y")
nil = const("nil")
car_nil = app("car", nil)

LIST = parse_structure("(struct (carrier n0 n1) (fun nil (-> n0)) (fun car (n1 -> n0)))")


def test_car_nil_undefined():
    assert eval_term(LIST, {}, car_nil) is UNDEFINED


def test_car_nil_both_polarities_weakly_true():
    assert weak_sat_clause(LIST, {}, clause(eq(car_nil, nil)))
    assert weak_sat_clause(LIST, {}, clause(neq(car_nil, nil)))


def test_variable_evaluation():
    assert eval_term(LIST, {"x": "n1"}, x) == "n1"
    with pytest.raises(UndefinedVariableError):
        eval_term(LIST, {}, x)


def test_undefined_propagates():
    A = parse_structure("(struct (carrier a b) (fun a (-> a)) (fun f (a -> b)))")
    assert eval_term(A, {}, app("f", const("a"))) == "b"
    assert eval_term(A, {}, app("f", app("f", const("a")))) is UNDEFINED


def test_empty_clause_false():
    assert not weak_sat_clause(LIST, {}, Clause.of())


# -- the coverage counterexample -------------------------------------------

K2 = (implies([eq(x, app("f", x))], eq(app("g", y), y)),)
P = parse_structure("(struct (carrier a b) (fun f (a -> b) (b -> a)) (fun g (a -> b)))")
A = parse_structure("(struct (carrier a b c) (fun f (a -> b) (b -> a) (c -> c)) (fun g (a -> b)))")


def test_p_weakly_satisfies_k2():
    assert weak_sat_set(P, K2)


def test_inherited_g_is_a_weak_embedding():
    assert check_weak_embedding(P, A, {"a": "a", "b": "b"})


def test_inherited_g_breaks_k2():
    assert not weak_sat_set(A, K2)
    assert not weak_sat_clause(A, {"x": "c", "y": "a"}, K2[0])


def test_trivial_clause_sets():
    assert weak_sat_set(P, ())
    assert not weak_sat_set(P, (Clause.of(),))


def test_embeddings():
    assert check_weak_embedding(P, P, {"a": "a", "b": "b"})
    assert not check_weak_embedding(P, P, {"a": "a", "b": "a"})
    assert not check_weak_embedding(P, A, {"a": "a", "b": "c"})


def test_embedding_reflects_predicates():
    small = parse_structure("(struct (carrier a b) (pred <= (a a) (b b)))")
    big = parse_structure("(struct (carrier a b) (pred <= (a a) (a b) (b b)))")
    assert not check_weak_embedding(small, big, {"a": "a", "b": "b"})
    assert check_weak_embedding(small, small, {"a": "a", "b": "b"})


# -- total extensions --------------------------------------------------------

MON = expand(MonotoneSpec("B1", "f", ("+",)))
CHAIN = parse_structure("(struct (carrier a b) (fun f (a -> a)) (pred <= (a a) (a b) (b b)))")


def test_chain_extension():
    ext = find_total_extension(CHAIN, MON, "PO", max_size=2)
    assert ext is not NOT_FOUND and len(ext.structure.carrier) == 2
    completions = [e.structure.funcs["f"]["b",] for e in
                   total_extensions(CHAIN, MON, "PO", 2, same_carrier=True)]
    assert "b" in completions


def test_total_model_extends_to_itself():
    B = parse_structure("(struct (carrier a b) (fun f (a -> a) (b -> b)) (pred <= (a a) (a b) (b b)))")
    ext = find_total_extension(B, MON, "PO", max_size=3)
    assert ext.structure == B and dict(ext.embedding) == {"a": "a", "b": "b"}


def test_violating_structure_has_no_extension():
    bad = parse_structure("(struct (carrier a b) (fun f (a -> b) (b -> a)) (pred <= (a a) (a b) (b b)))")
    for size in (2, 3):
        assert find_total_extension(bad, MON, "PO", max_size=size) is NOT_FOUND


def test_partial_structure_rejects_values_outside_carrier():
    with pytest.raises(ValueError):
        PartialStructure(("a",), {"f": {("a",): "z"}})


# -- weak = classical on total structures ---------------------------------------

@given(st.integers(0, 10 ** 9), st.integers(1, 4))
@settings(max_examples=150, deadline=None)
def test_weak_equals_classical_on_total_structures(seed, size):
    rng = random.Random(seed)
    S = random_total_structure(rng, size)
    C = random_clause(rng)
    beta = {"x": rng.choice(S.carrier), "y": rng.choice(S.carrier)}
    assert weak_sat_clause(S, beta, C) == sat_clause(S, beta, C)
