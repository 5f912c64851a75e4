"""Exception hierarchy.

Every failure raised by the library derives from :class:`CrnError`, so callers
can catch one type. Parse-time errors carry an optional source location.
"""

from __future__ import annotations


class CrnError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self._format())

    def _format(self) -> str:
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


# network construction
class DuplicateSpecies(CrnError):
    pass


class SelfLoopReaction(CrnError):
    pass


class NonpositiveRate(CrnError):
    pass


class NegativeCoefficient(CrnError):
    pass


class DimensionMismatch(CrnError):
    pass


# parsing
class CrnSyntaxError(CrnError):
    pass


class NonpositiveEntry(CrnError):
    pass


# dynamics
class NegativeConcentration(CrnError):
    pass


class NonPositiveInitial(CrnError):
    pass


class StepSizeUnderflow(CrnError):
    pass


# equilibria
class NotAnEquilibriumReference(CrnError):
    pass


class NewtonDivergence(CrnError):
    pass


# producing-matrix construction
class NegativeProductCoefficient(CrnError):
    pass


class NonIntegerProduct(CrnError):
    pass


class SelfLoopProduced(CrnError):
    pass


# certification
class InvalidRegion(CrnError):
    pass


class PathNotInClass(CrnError):
    pass


class DegenerateBasis(CrnError):
    pass


class SourceNotComplexBalanced(CrnError):
    pass


class StructuralMismatch(CrnError):
    pass
