"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Shape, valence, symmetry or dimension mismatch."""


class BudgetError(RuntimeError):
    """A derivative was requested from a jet that has none left."""


class NumericError(ArithmeticError):
    """Numerically invalid operation (degenerate metric, domain violation, ...)."""
