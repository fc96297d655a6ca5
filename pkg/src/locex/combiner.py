"""Certification of combined extensions, hierarchical solving, interpolants.

Certification folds the extension blocks pairwise in declaration order.
Each step picks the combination rule matching the two locality classes:

  C1-CompComp-Disjoint   both completable, no common extension symbols
  C2-CompComp-Shared     both completable, common symbols declared in a
                         shared core whose entailment the user asserts
  C3-CompEmb             one completable block, flat with every variable
                         below one of its symbols; the other embeddable
  C4-EmbEmb              both embeddable; base admits direct limits (A1),
                         both flat and linear (A2), every variable below
                         an extension symbol (A3)

The reported rule is the most demanding one used along the fold.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import (
    Condition,
    CustomSpec,
    ExtensionSpec,
    LocalityClass,
    SelectorSpec,
    check_side_conditions,
    expand,
    locality_class,
    schema_ground_subterms,
    weakest,
)
from .errors import (
    CertificationRejected,
    FlatnessError,
    InterpolationError,
    UnsupportedCombination,
)
from .instantiation import (
    GroundTermSet,
    InstanceSet,
    clause_ground_terms,
    ground_subterms,
    instantiate,
    symbol_owners,
    term_closure,
)
from .problem import Problem
from .reduction import Definition, Purifier, ReductionArtifacts, congruence_axioms, reduce, unfold
from .solvers import BaseVerdict, solve_ground
from .solvers.ground import DEFAULT_BUDGET
from .terms import (
    App,
    Clause,
    clause_subterms,
    is_flat,
    is_ground_clause,
    is_linear,
    map_clause,
    map_term,
    vars_covered,
)

RULES = ("SINGLE", "C1-CompComp-Disjoint", "C2-CompComp-Shared", "C3-CompEmb", "C4-EmbEmb")
# every supported base theory is axiomatized by universal-existential sentences
FORALL_EXISTS = frozenset({"EQ", "LRA", "PO", "TO"})


# -- certification ------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    rule: str
    left: tuple[str, ...]
    right: str
    result: LocalityClass


@dataclass(frozen=True)
class CombinationCertificate:
    rule: str
    classes: tuple[tuple[str, LocalityClass], ...]
    conditions: tuple[Condition, ...]
    result: LocalityClass
    steps: tuple[Step, ...] = ()

    @property
    def folded(self) -> bool:
        return len(self.steps) > 1

    def __str__(self) -> str:
        return f"{self.rule}: {self.result}"

    def report(self) -> list[str]:
        lines = [str(self)]
        lines += [f"  block {b}: {c}" for b, c in self.classes]
        for s in self.steps:
            lines.append(f"  step {'+'.join(s.left)} with {s.right}: {s.rule} -> {s.result}")
        if self.folded:
            lines.append("  note: more than two blocks, certified by pairwise folding")
        lines += [f"  {c}" for c in self.conditions]
        return lines


@dataclass(frozen=True)
class Rejection:
    hypothesis: str
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"rejected {self.hypothesis} [{self.rule}]: {self.detail}"

    def report(self) -> list[str]:
        return [str(self)]


Entry = tuple[Clause, frozenset[str], ExtensionSpec]


def _flat_linear_failure(entries: Iterable[Entry]) -> Clause | None:
    """First clause that is not flat and linear for its block.

    A selector's arguments are terms of the injective base constructor;
    instantiation matches that skeleton syntactically, so selector clauses
    are exempt here (they still fail variable coverage).
    """
    for c, ext, spec in entries:
        if isinstance(spec, SelectorSpec):
            continue
        try:
            if not (is_flat(c, ext) and is_linear(c, ext)):
                return c
        except FlatnessError:
            return c
    return None


def _flat_failure(entries: Iterable[Entry]) -> Clause | None:
    return next((c for c, ext, spec in entries
                 if not isinstance(spec, SelectorSpec) and not is_flat(c, ext)), None)


def _uncovered(entries: Iterable[Entry]) -> Clause | None:
    return next((c for c, ext, _ in entries if not vars_covered(c, ext)), None)


def certify_combination(specs: Sequence[ExtensionSpec], base: str, context=None,
                        shared: Sequence[ExtensionSpec] = (),
                        shared_asserted: bool = False) -> CombinationCertificate | Rejection:
    conditions: list[Condition] = []
    classes: list[tuple[str, LocalityClass]] = []
    blocks: list[tuple[ExtensionSpec, LocalityClass, list[Entry]]] = []
    for spec in specs:
        report = check_side_conditions(spec, base, context)
        conditions += [Condition(f"{spec.block_id} {c.name}", c.ok, c.detail) for c in report.conditions]
        bad = report.first_failure
        if bad is not None:
            return Rejection(f"({bad.name})", f"{spec.block_id} {spec.kind}", bad.detail)
        try:
            cls = locality_class(spec, base)
        except UnsupportedCombination as exc:
            return Rejection("(catalog)", f"{spec.block_id} {spec.kind}", str(exc))
        ext = frozenset(spec.symbols)
        entries = [(c, ext, spec) for c in expand(spec) if not is_ground_clause(c)]
        if isinstance(spec, CustomSpec):
            c = _flat_linear_failure(entries)
            if c is not None:
                return Rejection("(flat-linear)", f"{spec.block_id} custom",
                                 f"clause {c} is not flat and linear in {', '.join(sorted(ext))}")
        classes.append((spec.block_id, cls))
        blocks.append((spec, cls, entries))

    if not blocks:
        return CombinationCertificate("SINGLE", (), tuple(conditions), LocalityClass.COMP_W)

    first, acc_cls, first_entries = blocks[0]
    acc_blocks = [first.block_id]
    acc_entries = list(first_entries)
    acc_symbols = set(first.symbols)
    shared_syms = frozenset(s for sp in shared for s in sp.symbols)
    steps: list[Step] = []
    for spec, cls, entries in blocks[1:]:
        tag = spec.block_id
        left = "+".join(acc_blocks)
        common = acc_symbols & set(spec.symbols)
        both = [*acc_entries, *entries]
        if common:
            rule = "C2-CompComp-Shared"
            if not (acc_cls.completable and cls.completable):
                return Rejection("(completability)", rule,
                                 f"{left} and {tag} share {', '.join(sorted(common))} but are not "
                                 "both completable")
            missing = sorted(common - shared_syms)
            if missing:
                return Rejection("(shared core)", rule,
                                 f"shared symbols {', '.join(missing)} are not declared in a shared core")
            if not shared_asserted:
                return Rejection("(entailment)", rule,
                                 "the entailment of the shared core by every block must be asserted")
            conditions.append(Condition(f"{tag} shared core entailment", True, "asserted"))
            result = weakest(acc_cls, cls)
        elif acc_cls.completable and cls.completable:
            rule = "C1-CompComp-Disjoint"
            result = weakest(acc_cls, cls)
        elif acc_cls.completable or cls.completable:
            rule = "C3-CompEmb"
            comp_side, comp_name = (entries, tag) if cls.completable else (acc_entries, left)
            c = _flat_failure(comp_side)
            if c is not None:
                return Rejection("(flat)", rule, f"clause {c} of completable side {comp_name} is not flat")
            c = _uncovered(comp_side)
            if c is not None:
                return Rejection("(coverage)", rule,
                                 f"in clause {c} of completable side {comp_name} some variable is "
                                 "not below an extension symbol")
            conditions.append(Condition(f"{tag} completable side {comp_name} flat and covered", True))
            result = LocalityClass.EMB_W
        else:
            rule = "C4-EmbEmb"
            if base not in FORALL_EXISTS:
                return Rejection("(A1)", rule, f"base {base} is not closed under direct limits")
            conditions.append(Condition(f"{tag} (A1) base {base} is universal-existential", True))
            c = _flat_linear_failure(both)
            if c is not None:
                return Rejection("(A2)", rule, f"clause {c} is not flat and linear")
            conditions.append(Condition(f"{tag} (A2) flat and linear", True))
            c = _uncovered(both)
            if c is not None:
                return Rejection("(A3)", rule,
                                 f"in clause {c} some variable does not occur below an extension symbol")
            conditions.append(Condition(f"{tag} (A3) variables covered", True))
            result = LocalityClass.EMB_W
        if rule != "C4-EmbEmb":
            c = _flat_linear_failure(both)
            if c is not None:
                return Rejection("(flat-linear)", rule, f"clause {c} is not flat and linear")
        steps.append(Step(rule, tuple(acc_blocks), tag, result))
        acc_blocks.append(tag)
        acc_cls = result
        acc_entries += entries
        acc_symbols |= set(spec.symbols)
    rule = max((s.rule for s in steps), key=RULES.index, default="SINGLE")
    return CombinationCertificate(rule, tuple(classes), tuple(conditions), acc_cls, tuple(steps))


def certify(problem: Problem) -> CombinationCertificate | Rejection:
    return certify_combination(problem.specs, problem.base, problem.context,
                               problem.shared, problem.shared_asserted)


# -- traces -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    label: str
    artifacts: ReductionArtifacts
    # base goal clauses private to this component
    goal: tuple[Clause, ...] = ()

    @property
    def reduction(self) -> tuple[Clause, ...]:
        return self.artifacts.K0 + self.goal + self.artifacts.N0


@dataclass(frozen=True)
class Interpolant:
    clauses: tuple[Clause, ...]
    unfolded: tuple[Clause, ...]
    symbols: tuple[str, ...]
    filtered: bool
    warning: str = ""


@dataclass(frozen=True)
class ReductionTrace:
    mode: str
    psi: tuple[GroundTermSet, ...]
    instances: tuple[InstanceSet, ...]
    components: tuple[Component, ...]
    shared_goal: tuple[Clause, ...]
    base_problem: tuple[Clause, ...]
    verdict: BaseVerdict
    certificate: CombinationCertificate | Rejection
    interpolant: Interpolant | None = None


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    certified: bool
    trace: ReductionTrace

    @property
    def label(self) -> str:
        if not self.sat:
            return "unsat"
        return "sat (certified)" if self.certified else "sat (uncertified)"


def _extensions(problem: Problem) -> tuple[list[Clause], frozenset[str]]:
    K: dict[Clause, None] = {}
    for spec in problem.specs:
        for c in expand(spec):
            K.setdefault(c)
    return list(K), problem.ext_symbols


def _certificate(problem: Problem, force: bool) -> tuple[CombinationCertificate | Rejection, bool]:
    cert = certify(problem)
    if isinstance(cert, Rejection) and not force:
        raise CertificationRejected(cert)
    return cert, isinstance(cert, CombinationCertificate)


def _injective(problem: Problem) -> frozenset[str]:
    return frozenset(c for c, _ in problem.injective)


def reduction(problem: Problem) -> tuple[GroundTermSet, InstanceSet, ReductionArtifacts]:
    """Psi, K[G] and the reduced base problem of the whole goal, without solving."""
    K, ext = _extensions(problem)
    G = problem.goal
    psi = ground_subterms(K, G, problem.specs)
    KG = instantiate(K, psi, ext)
    return psi, KG, reduce(KG.clauses, G, ext)


def solve(problem: Problem, force: bool = False, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Monolithic pipeline: K[G] over all blocks, one purification, one base call."""
    cert, ok = _certificate(problem, force)
    psi, KG, art = reduction(problem)
    base_problem = art.base_problem
    verdict = solve_ground(problem.base, base_problem, _injective(problem), budget)
    trace = ReductionTrace("monolithic", (psi,), (KG,), (Component("ALL", art),), (),
                           base_problem, verdict, cert)
    return SolveResult(verdict.sat, ok, trace)


def verdict_chain(problem: Problem, budget: int = DEFAULT_BUDGET) -> tuple[bool, bool, bool]:
    """Satisfiability of K[G] u G, K0 u G0 u D and K0 u G0 u N0.

    The first two are solved with the extension symbols uninterpreted.
    """
    _, KG, art = reduction(problem)
    inj = _injective(problem)
    levels = (KG.clauses + problem.goal, art.with_definitions, art.base_problem)
    return tuple(solve_ground(problem.base, F, inj, budget).sat for F in levels)


def _component_psi(spec: ExtensionSpec, K: Sequence[Clause], goal: Sequence[Clause],
                   D: Sequence[Definition]) -> GroundTermSet:
    terms = list(clause_ground_terms(goal))
    terms += [d.lhs for d in D]
    terms += list(schema_ground_subterms(spec))
    terms += list(clause_ground_terms(K))
    return term_closure(terms, symbol_owners([spec]))


def _constants(clauses: Iterable[Clause]) -> set[str]:
    return {s.sym for c in clauses for s in clause_subterms(c) if isinstance(s, App) and not s.args}


def solve_modular(problem: Problem, force: bool = False, budget: int = DEFAULT_BUDGET,
                  interpolate: bool = False) -> SolveResult:
    """Per-block reduction of a purified goal; components meet only in the base call."""
    cert, ok = _certificate(problem, force)
    ext = problem.ext_symbols
    purifier = Purifier(ext)
    goal0 = purifier.clauses(problem.goal)
    goal0 = goal0 + purifier.take_base_eqs()
    goal_defs = purifier.definitions
    owners: dict[str, list[int]] = {}
    for i, spec in enumerate(problem.specs):
        for s in spec.symbols:
            owners.setdefault(s, []).append(i)

    # goal clauses whose purification constants all stem from one block are private to it
    const_owner: dict[str, set[int]] = {}
    for d in goal_defs:
        const_owner.setdefault(d.const, set()).update(owners.get(d.sym, ()))
    private: dict[int, list[Clause]] = {}
    shared_goal: list[Clause] = []
    for c in goal0:
        blocks = set()
        for k in _constants([c]):
            if k in const_owner:
                blocks |= const_owner[k]
        if len(blocks) == 1:
            private.setdefault(next(iter(blocks)), []).append(c)
        else:
            shared_goal.append(c)

    psis, insts, comps = [], [], []
    for i, spec in enumerate(problem.specs):
        K = list(dict.fromkeys(expand(spec)))
        D_i = [d for d in goal_defs if i in owners.get(d.sym, ())]
        psi = _component_psi(spec, K, goal0, D_i)
        KG = instantiate(K, psi, frozenset(spec.symbols))
        before = set(purifier.defs)
        K0 = purifier.clauses(KG.clauses)
        extra_base = purifier.take_base_eqs()
        new_defs = [d for k, d in purifier.defs.items() if k not in before]
        defs = tuple(D_i) + tuple(new_defs)
        N = congruence_axioms(defs)
        art = ReductionArtifacts(K0 + extra_base, (), defs, N, dict(purifier.names))
        psis.append(psi)
        insts.append(KG)
        comps.append(Component(spec.block_id, art, tuple(private.get(i, ()))))
    # names may have grown while reducing later components
    comps = [Component(c.label, ReductionArtifacts(c.artifacts.K0, c.artifacts.G0, c.artifacts.D,
                                                   c.artifacts.N0, dict(purifier.names)), c.goal)
             for c in comps]
    base_problem: list[Clause] = list(shared_goal)
    for comp in comps:
        base_problem += comp.reduction
    base_problem = list(dict.fromkeys(base_problem))
    verdict = solve_ground(problem.base, base_problem, _injective(problem), budget)
    trace = ReductionTrace("modular", tuple(psis), tuple(insts), tuple(comps), tuple(shared_goal),
                           tuple(base_problem), verdict, cert)
    if interpolate and not verdict.sat:
        trace = ReductionTrace(trace.mode, trace.psi, trace.instances, trace.components,
                               trace.shared_goal, trace.base_problem, verdict, cert,
                               extract_interpolant(trace, problem.base, _injective(problem), budget))
    return SolveResult(verdict.sat, ok, trace)


def extract_interpolant(trace: ReductionTrace, base: str, injective: Iterable[str] = (),
                        budget: int = DEFAULT_BUDGET) -> Interpolant:
    if trace.verdict.sat:
        raise InterpolationError("interpolants exist only for unsatisfiable runs")
    if trace.mode != "modular" or len(trace.components) != 2:
        raise InterpolationError("interpolation needs a modular run with exactly two components")
    first, second = trace.components
    injective = frozenset(injective)
    I = tuple(dict.fromkeys(first.artifacts.K0 + first.goal + trace.shared_goal + first.artifacts.N0))
    side1 = set(first.reduction) | set(trace.shared_goal)
    assert all(c in side1 for c in I), "interpolant clause outside the first component"
    rest = second.reduction
    if solve_ground(base, I + rest, injective, budget).sat:
        raise InterpolationError("interpolant does not refute the second component")
    # try to keep only clauses over constants the second side also knows
    known = _constants(rest)
    narrowed = tuple(c for c in I if _constants([c]) <= known)
    filtered, warning = False, ""
    if narrowed != I:
        if not solve_ground(base, narrowed + rest, injective, budget).sat:
            I, filtered = narrowed, True
        else:
            warning = "shared-constant filter lost the refutation; kept the full interpolant"
    # unfold everything, then fold terms rooted in second-only symbols back to their constants
    names = first.artifacts.names
    second_only = {d.sym for d in second.artifacts.D} - {d.sym for d in first.artifacts.D}
    refold = {names[d.const]: App(d.const, ()) for d in second.artifacts.D if d.sym in second_only}
    unfolded = tuple(map_clause(c, lambda t: map_term(t, refold.get)) for c in unfold(names, I))
    for c in unfolded:
        for s in clause_subterms(c):
            if isinstance(s, App) and s.sym in second_only:
                raise InterpolationError(f"interpolant mentions {s.sym}, private to the second component")
    symbols = sorted({s.sym for c in unfolded for s in clause_subterms(c) if isinstance(s, App)})
    return Interpolant(I, unfolded, tuple(symbols), filtered, warning)


# -- trace text -----------------------------------------------------------------------

def _clauses(lines: list[str], key: str, cs: Iterable[Clause]) -> None:
    cs = list(cs)
    lines.append(f"{key} {len(cs)}")
    lines += [f"  {c}" for c in cs]


def render_artifacts(label: str, a: ReductionArtifacts, goal: Sequence[Clause] = ()) -> list[str]:
    lines = [f"[ARTIFACTS {label}]"]
    _clauses(lines, "K0", a.K0)
    _clauses(lines, "G0", a.G0 + tuple(goal))
    lines.append(f"D {len(a.D)}")
    lines += [f"  {d}" for d in a.D]
    _clauses(lines, "N0", a.N0)
    used = {d.const for d in a.D} | {s.sym for c in a.K0 + a.G0 + tuple(goal)
                                     for s in clause_subterms(c) if isinstance(s, App) and not s.args}
    names = [(k, v) for k, v in a.names.items() if k in used]
    lines.append(f"NAMES {len(names)}")
    lines += [f"  {k} := {v}" for k, v in names]
    return lines


def render_trace(trace: ReductionTrace, problem_name: str = "") -> str:
    lines = [f"; locex trace mode={trace.mode}" + (f" problem={problem_name}" if problem_name else "")]
    for i, psi in enumerate(trace.psi):
        label = trace.components[i].label if trace.mode == "modular" else "ALL"
        lines.append(f"[PSI {label}]")
        for t in psi:
            tag = psi.tags.get(t)
            lines.append(f"  {t}" + (f" ; {' '.join(tag)}" if tag else ""))
    for i, inst in enumerate(trace.instances):
        label = trace.components[i].label if trace.mode == "modular" else "ALL"
        lines.append(f"[INSTANCES {label}]")
        lines += [f"  {x}" for x in inst]
    if trace.shared_goal:
        lines.append("[SHARED_GOAL]")
        lines += [f"  {c}" for c in trace.shared_goal]
    for comp in trace.components:
        lines += render_artifacts(comp.label, comp.artifacts, comp.goal)
    lines.append("[BASE_PROBLEM]")
    _clauses(lines, "clauses", trace.base_problem)
    lines.append("[VERDICT]")
    v = trace.verdict
    lines.append(f"result={v.kind}")
    lines.append(f"certificate={trace.certificate}")
    if v.sat and v.witness is not None:
        lines.append("witness")
        lines += [f"  {w}" for w in v.witness.describe()]
    elif v.core is not None:
        _clauses(lines, "core", v.core)
    if trace.interpolant is not None:
        ip = trace.interpolant
        lines.append("[INTERPOLANT]")
        lines.append(f"filtered={'yes' if ip.filtered else 'no'}")
        if ip.warning:
            lines.append(f"warning={ip.warning}")
        _clauses(lines, "purified", ip.clauses)
        _clauses(lines, "unfolded", ip.unfolded)
        lines.append("symbols " + " ".join(ip.symbols))
    return "\n".join(lines) + "\n"


__all__ = ["RULES", "CombinationCertificate", "Rejection", "Step", "certify_combination", "certify",
           "Component", "Interpolant", "ReductionTrace", "SolveResult", "solve", "solve_modular",
           "verdict_chain", "extract_interpolant", "render_trace", "render_artifacts",
           "reduction"]
