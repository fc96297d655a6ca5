from __future__ import annotations


class LocexError(Exception):
    """Base class for all errors raised by the engine."""


class ParseError(LocexError, ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ArityError(ParseError):
    pass


class UndeclaredSymbolError(ParseError):
    pass


class DuplicateDeclarationError(ParseError):
    pass


class FlatnessError(LocexError):
    """A clause was expected to be flat for a set of extension symbols."""


class SubstitutionError(LocexError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class UndefinedVariableError(SubstitutionError):
    pass


class SpecError(LocexError, ValueError):
    """Invalid extension-schema parameters."""


class UnsupportedCombination(LocexError):
    """The catalog has no locality entry for a (schema, base theory) pair."""


class NonFlatTemplate(LocexError):
    pass


class UncoveredVariables(LocexError):
    pass


class ReductionError(LocexError):
    pass


class SolverError(LocexError):
    """Input outside the base theory's atom language."""


class ResourceBudgetExceeded(LocexError):
    pass


class WitnessError(LocexError, ValueError):
    pass


class CertificationRejected(LocexError):
    def __init__(self, rejection):
        self.rejection = rejection
        super().__init__(str(rejection))


class InterpolationError(LocexError):
    pass
