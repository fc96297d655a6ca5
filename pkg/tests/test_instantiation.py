import itertools
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from locex.catalog import LipschitzSpec, MonotoneSpec, SelectorSpec, expand
from locex.instantiation import ground_subterms, instantiate, kg, symbol_owners, term_closure
from locex.terms import Num, app, apply_substitution, clause, const, eq, le, neg

a, b = const("a"), const("b")
MON = MonotoneSpec("B1", "f", ("+",))
G_MON = (clause(le(a, b)), clause(neg("<=", app("f", a), app("f", b))))


def test_psi_of_mono_goal():
    psi = ground_subterms(expand(MON), G_MON, [MON])
    assert {a, b, app("f", a), app("f", b)} <= set(psi)
    assert set(psi.ext_rooted()) == {app("f", a), app("f", b)}
    assert psi.tags[app("f", a)] == ("B1",)


def test_psi_empty():
    assert len(ground_subterms(expand(MON), (), [MON])) == 0


def test_psi_lipschitz_contains_point():
    lip = LipschitzSpec("B1", "f", Fraction(2), Num(Fraction(0)))
    one, three, zero = Num(Fraction(1)), Num(Fraction(3)), Num(Fraction(0))
    G = (clause(eq(app("f", one), three)),)
    psi = ground_subterms(expand(lip), G, [lip])
    assert {zero, one, three, app("f", zero), app("f", one)} <= set(psi)


def test_mono_four_instances():
    psi = ground_subterms(expand(MON), G_MON, [MON])
    inst = instantiate(expand(MON), psi, {"f"})
    assert len(inst) == 4
    (K,) = expand(MON)
    expected = {apply_substitution(K, {"x1": s, "y1": t}) for s in (a, b) for t in (a, b)}
    assert set(inst.clauses) == expected


def test_no_extension_terms_no_instances():
    psi = term_closure([a, b], symbol_owners([MON]))
    assert len(instantiate(expand(MON), psi, {"f"})) == 0


def test_selector_matches_nested_term():
    sel = SelectorSpec("B1", "c", ("s1", "s2"))
    cab = app("c", a, b)
    G = (clause(neg("=", app("s1", cab), a)),)
    inst = kg(None, G, [sel])
    assert clause(eq(app("s1", cab), a)) in inst.clauses


def test_kg_empty_goal():
    assert len(kg(None, (), [MON])) == 0


def test_instances_stay_inside_psi():
    psi = ground_subterms(expand(MON), G_MON, [MON])
    for c in instantiate(expand(MON), psi, {"f"}).clauses:
        for lit in c.lits:
            for t in lit.atom.args:
                assert t in psi


# -- properties --------------------------------------------------------------

_names = st.lists(st.sampled_from("abcde"), min_size=1, max_size=5, unique=True)


@given(_names, st.integers(1, 2))
@settings(max_examples=40, deadline=None)
def test_mono_instance_count_is_m_to_the_2n(names, arity):
    """Linearity: each argument position of each f-occurrence ranges independently."""
    spec = MonotoneSpec("B1", "f", ("+",) * arity)
    consts = [const(n) for n in names]
    terms = [app("f", *args) for args in itertools.product(consts, repeat=arity)]
    G = tuple(clause(eq(t, t)) for t in terms)
    inst = kg(None, G, [spec])
    m = len(terms)
    assert len(inst) == m * m


@given(_names, _names)
@settings(max_examples=40, deadline=None)
def test_kg_monotone_in_goal(n1, n2):
    small = tuple(clause(eq(app("f", const(n)), const(n))) for n in n1)
    large = small + tuple(clause(eq(app("f", const(n)), const(n))) for n in n2)
    assert set(kg(None, small, [MON]).clauses) <= set(kg(None, large, [MON]).clauses)
