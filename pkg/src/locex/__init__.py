"""Hierarchical reasoning in local theory extensions."""
from .catalog import LocalityClass, expand, locality_class
from .combiner import certify, certify_combination, extract_interpolant, solve, solve_modular
from .instantiation import ground_subterms, instantiate, kg
from .oracle import oracle
from .problem import load_problem, parse_problem, print_problem
from .reduction import congruence_axioms, flatten_purify, reduce, unfold
from .solvers import check_witness, solve_ground

__all__ = ["LocalityClass", "expand", "locality_class", "certify", "certify_combination",
           "extract_interpolant", "solve", "solve_modular", "ground_subterms", "instantiate", "kg",
           "oracle", "load_problem", "parse_problem", "print_problem", "congruence_axioms",
           "flatten_purify", "reduce", "unfold", "check_witness", "solve_ground"]
