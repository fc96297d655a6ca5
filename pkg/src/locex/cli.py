"""locex command line.

    locex solve|certify|oracle|reduce [flags] FILE...

Exit status: 0 decided, 2 parse or validation error, 3 certification
rejection, 4 resource budget exhausted.  With several files each result
line is prefixed by the file name and the worst status is returned.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable

from .combiner import (
    Rejection,
    certify,
    reduction,
    render_artifacts,
    render_trace,
    solve,
    solve_modular,
)
from .errors import (
    CertificationRejected,
    InterpolationError,
    LocexError,
    NonFlatTemplate,
    ParseError,
    ResourceBudgetExceeded,
    SolverError,
    SpecError,
    UncoveredVariables,
    UnsupportedCombination,
)
from .oracle import DEFAULT_BUDGET as ORACLE_BUDGET
from .oracle import oracle, parse_grid
from .problem import Problem, load_problem
from .solvers.ground import DEFAULT_BUDGET

EXIT_OK, EXIT_PARSE, EXIT_REJECTED, EXIT_BUDGET = 0, 2, 3, 4


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="locex", description="Reasoning in local theory extensions.")
    p.add_argument("command", choices=("solve", "certify", "oracle", "reduce"))
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--trace", metavar="PATH",
                   help="write the reduction trace (a directory when several files are given)")
    p.add_argument("--modular", action="store_true", help="reduce each extension block separately")
    p.add_argument("--interpolant", action="store_true",
                   help="extract an interpolant from an unsat two-block modular run")
    p.add_argument("--force", action="store_true", help="solve even when certification fails")
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help="base solver node budget")
    p.add_argument("--oracle-budget", type=_positive, default=ORACLE_BUDGET, help="oracle node budget")
    p.add_argument("--grid", metavar="LO:HI:STEP", help="value grid for the LRA oracle")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.add_argument("--explain", action="store_true", help="print the full certification report")
    return p


class _Run:
    def __init__(self, args: argparse.Namespace, out: Callable[[str], None]):
        self.args = args
        self.out = out
        self.batch = len(args.files) > 1

    def emit(self, path: str, key: str, value: str) -> None:
        if self.args.format == "machine":
            prefix = f"file={path} " if self.batch else ""
            self.out(f"{prefix}{key}={value.replace(' ', '_')}")
        else:
            self.out(f"{path}: {value}" if self.batch else value)

    def trace_path(self, path: str) -> Path | None:
        if not self.args.trace:
            return None
        if self.batch:
            d = Path(self.args.trace)
            d.mkdir(parents=True, exist_ok=True)
            return d / (Path(path).stem + ".trace")
        return Path(self.args.trace)

    # commands ------------------------------------------------------------
    def solve(self, path: str, problem: Problem) -> int:
        a = self.args
        if a.interpolant or a.modular:
            res = solve_modular(problem, force=a.force, budget=a.budget, interpolate=a.interpolant)
        else:
            res = solve(problem, force=a.force, budget=a.budget)
        tp = self.trace_path(path)
        if tp is not None:
            tp.write_text(render_trace(res.trace, Path(path).name), encoding="utf-8")
        self.emit(path, "verdict", res.label)
        ip = res.trace.interpolant
        if ip is not None and a.format == "human" and not self.batch:
            for c in ip.unfolded:
                print(f"; interpolant {c}", file=sys.stderr)
        return EXIT_OK

    def certify(self, path: str, problem: Problem) -> int:
        cert = certify(problem)
        if self.args.format == "machine":
            if isinstance(cert, Rejection):
                self.emit(path, "rejected", f"{cert.hypothesis} {cert.rule}")
            else:
                self.emit(path, "certificate", f"{cert.rule} {cert.result}")
        elif self.args.explain and not self.batch:
            for line in cert.report():
                self.out(line)
        else:
            self.emit(path, "certificate", str(cert))
        return EXIT_REJECTED if isinstance(cert, Rejection) else EXIT_OK

    def oracle(self, path: str, problem: Problem) -> int:
        grid = None
        if problem.base == "LRA":
            if not self.args.grid:
                raise SpecError("the LRA oracle needs --grid LO:HI:STEP")
            grid = parse_grid(self.args.grid)
        verdict = oracle(problem, budget=self.args.oracle_budget, grid=grid)
        self.emit(path, "verdict", verdict.label)
        return EXIT_OK

    def reduce(self, path: str, problem: Problem) -> int:
        psi, KG, art = reduction(problem)
        lines = ["[PSI]", *(f"  {t}" for t in psi), "[INSTANCES]", *(f"  {x}" for x in KG)]
        lines += render_artifacts("ALL", art)
        if self.batch:
            self.out(f"; {path}")
        for line in lines:
            self.out(line)
        return EXIT_OK

    def run_file(self, path: str) -> int:
        try:
            problem = load_problem(path)
            return getattr(self, self.args.command)(path, problem)
        except (ParseError, SpecError, OSError, ValueError) as exc:
            self._error(path, "error", exc)
            return EXIT_PARSE
        except CertificationRejected as exc:
            self._error(path, "rejected", exc.rejection)
            return EXIT_REJECTED
        except (UnsupportedCombination, NonFlatTemplate, UncoveredVariables) as exc:
            self._error(path, "rejected", exc)
            return EXIT_REJECTED
        except ResourceBudgetExceeded as exc:
            self._error(path, "budget", exc)
            return EXIT_BUDGET
        except (SolverError, InterpolationError, LocexError) as exc:
            self._error(path, "error", exc)
            return EXIT_PARSE

    def _error(self, path: str, kind: str, exc: object) -> None:
        print(f"{path}: {kind}: {exc}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.interpolant and args.command == "solve":
        args.modular = True
    run = _Run(args, print)
    status = EXIT_OK
    for path in args.files:
        status = max(status, run.run_file(path))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
