from .cc import StructWitness
from .ground import BaseVerdict, RationalWitness, check_witness, solve_ground

__all__ = ["BaseVerdict", "RationalWitness", "StructWitness", "check_witness", "solve_ground"]
