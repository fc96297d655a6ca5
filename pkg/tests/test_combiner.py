import pytest

from locex.catalog import FreeSpec, LocalityClass
from locex.combiner import (
    CombinationCertificate,
    Rejection,
    certify,
    certify_combination,
    extract_interpolant,
    solve,
    solve_modular,
    verdict_chain,
)
from locex.errors import CertificationRejected, DuplicateDeclarationError, InterpolationError
from locex.problem import parse_problem
from locex.solvers.ground import check_witness, solve_ground
from locex.terms import App, clause_subterms

MON_LRA = "(base LRA)(ext mono f 1 (+))(goal (cl (<= a b)) (cl (not (<= (f a) (f b)))))"


def P(text):
    return parse_problem(text)


# -- certification -----------------------------------------------------------

def test_free_lipschitz_c1():
    cert = certify(P("(base LRA)(ext free g h)(ext lipschitz f 2 0)(goal)"))
    assert isinstance(cert, CombinationCertificate)
    assert str(cert) == "C1-CompComp-Disjoint: Comp_w"


def test_free_mono_po_c3():
    cert = certify(P("(base PO)(ext free g)(ext mono f 1 (+))(goal)"))
    assert str(cert) == "C3-CompEmb: Emb_w" and cert.result is LocalityClass.EMB_W


def test_coverage_counterexample_rejected_a3():
    cert = certify(P("(base PO)(fun f 1)(ext mono h 1 (+))"
                     "(ext custom emb (syms (g 1)) (vars x y) (cl (not (= x (f x))) (= (g y) y)))(goal)"))
    assert isinstance(cert, Rejection) and cert.hypothesis == "(A3)"
    assert str(cert).startswith("rejected (A3) [C4-EmbEmb]")


def test_single_and_empty():
    assert str(certify(P("(base PO)(ext mono f 1 (+))(goal)"))) == "SINGLE: Emb_w"
    assert str(certify(P("(base EQ)(goal)"))) == "SINGLE: Comp_w"


def test_mono_to_is_comp_fd():
    assert str(certify(P("(base TO)(ext mono f 1 (+))(goal)"))) == "SINGLE: Comp_fd_w"


def test_mono_mono_po_c4():
    assert str(certify(P("(base PO)(ext mono f 1 (+))(ext mono g 1 (-))(goal)"))) == "C4-EmbEmb: Emb_w"


def test_selector_without_inj():
    cert = certify(P("(base EQ)(fun c 2)(ext selector c 2 s1 s2)(goal)"))
    assert isinstance(cert, Rejection) and cert.hypothesis == "(Inj_c)"


def test_shared_needs_assertion():
    base = "(base EQ)(ext free f g)(ext free f)(shared free f)"
    assert certify(P(base + "(goal)")).hypothesis == "(entailment)"
    ok = certify(P(base + "(assert shared-entailment)(goal)"))
    assert str(ok) == "C2-CompComp-Shared: Comp_w"


def test_shared_symbols_without_core():
    with pytest.raises(DuplicateDeclarationError):
        P("(base EQ)(ext free f g)(ext free f)(goal)")
    specs = (FreeSpec("B1", ("f", "g")), FreeSpec("B2", ("f",)))
    cert = certify_combination(specs, "EQ")
    assert isinstance(cert, Rejection) and cert.hypothesis == "(shared core)"


def test_report_lists_steps():
    cert = certify(P("(base PO)(ext free g)(ext mono f 1 (+))(goal)"))
    lines = cert.report()
    assert lines[0] == "C3-CompEmb: Emb_w"
    assert any("step B1 with B2" in line for line in lines)


# -- solving ------------------------------------------------------------------

def test_mono_lra_unsat():
    assert solve(P(MON_LRA)).label == "unsat"


def test_lipschitz_unsat():
    assert not solve(P("(base LRA)(ext lipschitz f 2 0)(goal (cl (= (f 0) 0)) (cl (= (f 1) 3)))")).sat


def test_selector_unsat():
    assert not solve(P("(base EQ)(inj c 2)(ext selector c 2 s1 s2)(goal (cl (not (= (s1 (c a b)) a))))")).sat


def test_mono_lra_sat_with_witness():
    p = P("(base LRA)(ext mono f 1 (+))(goal (cl (<= a b)) (cl (<= (f a) (f b))))")
    res = solve(p)
    assert res.label == "sat (certified)"
    v = res.trace.verdict
    assert check_witness("LRA", res.trace.base_problem, v.witness)


def test_rejected_problem_needs_force():
    p = P("(base EQ)(fun c 2)(ext selector c 2 s1 s2)(goal (cl (= a a)))")
    with pytest.raises(CertificationRejected):
        solve(p)
    assert solve(p, force=True).label == "sat (uncertified)"


def test_verdict_chain_agrees():
    assert verdict_chain(P(MON_LRA)) == (False, False, False)
    assert verdict_chain(P("(base PO)(ext mono f 1 (+))(goal (cl (<= (f a) (f b))))")) == (True,) * 3


# -- modular mode and interpolants ----------------------------------------------

TWO = "(base LRA)(ext mono f 1 (+))(ext free g)(goal (cl (<= a b)) (cl (not (<= (f a) (f b)))))"


def test_modular_matches_monolithic():
    for text in (MON_LRA, TWO, "(base EQ)(goal)"):
        assert solve_modular(P(text)).sat == solve(P(text)).sat


def test_modular_empty_goals_sat():
    assert solve_modular(P("(base LRA)(ext mono f 1 (+))(ext free g)(goal)")).sat


def test_interpolant_for_mono_split():
    res = solve_modular(P(TWO), interpolate=True)
    ip = res.trace.interpolant
    assert not res.sat and ip is not None
    first, second = res.trace.components
    assert not solve_ground("LRA", ip.clauses + second.reduction).sat
    assert set(ip.clauses) <= set(first.reduction) | set(res.trace.shared_goal)
    for c in ip.clauses:
        assert all(not (isinstance(s, App) and s.sym in ("f", "g")) for s in clause_subterms(c))
    assert "g" not in ip.symbols


def test_interpolant_when_second_component_refutes():
    text = "(base LRA)(ext mono f 1 (+))(ext free g)(goal (cl (= (g a) 1)) (cl (= (g b) 2)) (cl (= a b)))"
    res = solve_modular(P(text), interpolate=True)
    first, second = res.trace.components
    assert not res.sat
    assert not solve_ground("LRA", res.trace.interpolant.clauses + second.reduction).sat


def test_interpolant_needs_unsat_trace():
    res = solve_modular(P("(base LRA)(ext mono f 1 (+))(ext free g)(goal (cl (<= a b)))"))
    with pytest.raises(InterpolationError):
        extract_interpolant(res.trace, "LRA")


def test_interpolant_needs_two_components():
    res = solve_modular(P(MON_LRA))
    with pytest.raises(InterpolationError):
        extract_interpolant(res.trace, "LRA")
