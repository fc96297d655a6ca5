"""Acceptance criteria 1-8.

Each test records one summary line in REPORT; conftest prints them after
the run, so ``pytest tests/test_acceptance.py`` ends with a pass/fail
line per criterion.  ``python3 tests/test_acceptance.py`` does the same
without pytest.
"""
from __future__ import annotations

import filecmp
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from brute import finite_sat, lra_sat  # noqa: E402
from conftest import corpus_files, headers  # noqa: E402
from generators import (  # noqa: E402
    random_clause,
    random_ground,
    random_lra,
    random_problem,
    random_total_structure,
)
from locex.errors import SolverError  # noqa: E402
from locex.combiner import Rejection, certify, render_trace, solve, solve_modular, verdict_chain  # noqa: E402
from locex.oracle import oracle  # noqa: E402
from locex.problem import load_problem, print_problem  # noqa: E402
from locex.solvers.ground import check_witness, solve_ground  # noqa: E402
from locex.terms import App, Clause, clause, clause_subterms, const, eq, neq  # noqa: E402
from locex.weak import eval_term, parse_structure, sat_clause, weak_sat_clause, UNDEFINED  # noqa: E402

REPORT: dict[int, str] = {}


@contextmanager
def criterion(n: int, title: str):
    info: dict[str, str] = {"detail": ""}
    try:
        yield info
    except BaseException:
        REPORT[n] = f"criterion {n} FAIL  {title}  {info['detail']}".rstrip()
        raise
    REPORT[n] = f"criterion {n} PASS  {title}  {info['detail']}".rstrip()


def _problems():
    return [(p, load_problem(p)) for p in corpus_files()]


def _decidable():
    """Corpus problems that have a verdict when forced, and the names of those without."""
    ok, outside = [], []
    for path, p in _problems():
        try:
            solve(p, force=True)
        except SolverError:
            outside.append(path.name)
        else:
            ok.append((path, p))
    return ok, outside


def _injective(problem):
    return frozenset(c for c, _ in problem.injective)


# 1 ------------------------------------------------------------------------------

def test_criterion_1_oracle_equivalence():
    with criterion(1, "solve = oracle on random certified problems") as info:
        rng = random.Random(20240601)
        start = time.perf_counter()
        n, sats, mismatches = 250, 0, []
        for _ in range(n):
            p = random_problem(rng, max_literals=6, n_constants=4)
            assert not isinstance(certify(p), Rejection)
            a, b = solve(p).sat, oracle(p).sat
            sats += a
            if a != b:
                mismatches.append(print_problem(p))
        elapsed = time.perf_counter() - start
        info["detail"] = f"({n} problems, {sats} sat / {n - sats} unsat, " \
                         f"{len(mismatches)} mismatches, {elapsed:.1f}s)"
        assert not mismatches, mismatches[0]
        assert 0 < sats < n
        assert elapsed < 60


# 2 ------------------------------------------------------------------------------

def test_criterion_2_verdict_chain():
    with criterion(2, "K[G]+G, K0+G0+D, K0+G0+N0 agree on the corpus") as info:
        problems, outside = _decidable()
        assert outside == ["lipschitz-over-po.loc"]
        bad = [path.name for path, p in problems if len(set(verdict_chain(p))) != 1]
        info["detail"] = f"({len(problems)} instances, {len(bad)} disagreements; " \
                         f"{len(outside)} outside the base language)"
        assert len(problems) >= 30
        assert not bad, bad


# 3 ------------------------------------------------------------------------------

def test_criterion_3_modular_equals_monolithic():
    with criterion(3, "solve_modular = solve on the corpus") as info:
        problems, outside = _decidable()
        bad = [path.name for path, p in problems
               if solve_modular(p, force=True).sat != solve(p, force=True).sat]
        info["detail"] = f"({len(problems)} instances, {len(bad)} disagreements; " \
                         f"{len(outside)} outside the base language)"
        assert not bad, bad


# 4 ------------------------------------------------------------------------------

def _negation(c: Clause) -> list[Clause]:
    return [Clause.of(lit.negate()) for lit in c.lits]


def test_criterion_4_interpolants():
    with criterion(4, "interpolant entailment, refutation and symbol checks") as info:
        checked = []
        for path, p in _problems():
            if len(p.specs) != 2 or isinstance(certify(p), Rejection):
                continue
            res = solve_modular(p, interpolate=True)
            if res.sat:
                continue
            ip, trace = res.trace.interpolant, res.trace
            first, second = trace.components
            inj = _injective(p)
            side1 = first.reduction + trace.shared_goal
            ext = p.ext_symbols
            for c in ip.clauses:
                assert not any(isinstance(s, App) and s.sym in ext for s in clause_subterms(c))
                assert not solve_ground(p.base, side1 + tuple(_negation(c)), inj).sat, (path.name, str(c))
            assert not solve_ground(p.base, ip.clauses + second.reduction, inj).sat, path.name
            private2 = set(p.specs[1].symbols) - set(p.specs[0].symbols)
            for c in ip.unfolded:
                assert not any(isinstance(s, App) and s.sym in private2 for s in clause_subterms(c)), \
                    (path.name, str(c))
            checked.append(path.name)
        info["detail"] = f"({len(checked)} two-component unsat instances)"
        assert len(checked) >= 5


# 5 ------------------------------------------------------------------------------

EXPECTED_LABELS = {
    "free-selector.loc": "C1-CompComp-Disjoint: Comp_w",
    "free-lipschitz.loc": "C1-CompComp-Disjoint: Comp_w",
    "lipschitz-lipschitz.loc": "C1-CompComp-Disjoint: Comp_w",
    "free-mono-lra.loc": "C1-CompComp-Disjoint: Comp_fd_w",
    "shared-free-selector.loc": "C2-CompComp-Shared: Comp_w",
    "shared-mono-lipschitz.loc": "C2-CompComp-Shared: Comp_fd_w",
    "shared-lipschitz-core.loc": "C2-CompComp-Shared: Comp_fd_w",
    "free-mono-po.loc": "C3-CompEmb: Emb_w",
    "po-mono-mono.loc": "C4-EmbEmb: Emb_w",
    "single-mon.loc": "SINGLE: Emb_w",
}


def test_criterion_5_certification():
    with criterion(5, "certificate labels and the (A3) rejection") as info:
        got = {path.name: str(certify(p)) for path, p in _problems()}
        for name, label in EXPECTED_LABELS.items():
            assert got[name] == label, (name, got[name])
        for path in corpus_files():
            want = headers(path)["expect-certify"]
            assert got[path.name] == want or got[path.name].startswith(want + " "), path.name
        cov = certify(load_problem(corpus_files()[0].parent / "counterexample-coverage.loc"))
        assert isinstance(cov, Rejection) and cov.hypothesis == "(A3)"
        info["detail"] = f"({len(got)} labels, coverage counterexample rejected with (A3))"


# 6 ------------------------------------------------------------------------------

def test_criterion_6_weak_semantics():
    with criterion(6, "car(nil) weak evaluation and weak = classical on total structures") as info:
        A = parse_structure("(struct (carrier n0 n1) (fun nil (-> n0)) (fun car (n1 -> n0)))")
        car_nil, nil = App("car", (const("nil"),)), const("nil")
        assert eval_term(A, {}, car_nil) is UNDEFINED
        assert weak_sat_clause(A, {}, clause(eq(car_nil, nil)))
        assert weak_sat_clause(A, {}, clause(neq(car_nil, nil)))
        rng = random.Random(6)
        n, bad = 1500, 0
        for _ in range(n):
            S = random_total_structure(rng, rng.randint(1, 4))
            C = random_clause(rng)
            beta = {"x": rng.choice(S.carrier), "y": rng.choice(S.carrier)}
            bad += weak_sat_clause(S, beta, C) != sat_clause(S, beta, C)
        info["detail"] = f"({n} random checks, {bad} disagreements)"
        assert bad == 0


# 7 ------------------------------------------------------------------------------

def test_criterion_7_base_solvers():
    with criterion(7, "solve_ground against brute force, witnesses checked") as info:
        rng = random.Random(7)
        counts = {}
        for base in ("EQ", "PO", "TO", "LRA"):
            n, sat = 500, 0
            for _ in range(n):
                if base == "LRA":
                    F = random_lra(rng, n_vars=rng.randint(1, 4))
                    truth = lra_sat(F)
                else:
                    F = random_ground(rng, base, n_consts=3 if base == "EQ" else 4)
                    truth = finite_sat(base, F, max_size=5)
                v = solve_ground(base, F)
                assert v.sat == truth, (base, [str(c) for c in F])
                if v.sat:
                    sat += 1
                    assert check_witness(base, F, v.witness), (base, [str(c) for c in F])
            counts[base] = f"{sat}/{n} sat"
        info["detail"] = "(" + ", ".join(f"{b} {c}" for b, c in counts.items()) + ")"


# 8 ------------------------------------------------------------------------------

def _trace_run(out: Path, seed: str, *flags: str) -> tuple[int, str, str]:
    env = dict(os.environ, PYTHONHASHSEED=seed)
    files = [str(p) for p in corpus_files()]
    r = subprocess.run([sys.executable, "-m", "locex", "solve", "--force", *flags, "--trace", str(out),
                        *files], env=env, capture_output=True, text=True)
    return r.returncode, r.stdout, r.stderr


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "byte-identical traces across runs and hash seeds") as info:
        compared = 0
        for mode, flags in (("mono", ()), ("modular", ("--interpolant",))):
            dirs, runs = [], []
            for seed in ("0", "4242"):
                d = tmp_path / f"{mode}-{seed}"
                runs.append(_trace_run(d, seed, *flags))
                dirs.append(d)
            assert runs[0] == runs[1]
            names = sorted(p.name for p in dirs[0].iterdir())
            assert names == sorted(p.name for p in dirs[1].iterdir())
            match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
            assert not mismatch and not errors, mismatch + errors
            compared += len(match)
        for path, p in _decidable()[0]:
            r1, r2 = solve(p, force=True), solve(p, force=True)
            assert render_trace(r1.trace, path.name) == render_trace(r2.trace, path.name)
        info["detail"] = f"({compared} trace files, two hash seeds, monolithic and modular)"


if __name__ == "__main__":
    import tempfile

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            if "tmp_path" in t.__code__.co_varnames[:t.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    t(Path(d))
            else:
                t()
        except Exception:
            failed += 1
    for n in sorted(REPORT):
        print(REPORT[n])
    sys.exit(1 if failed else 0)
