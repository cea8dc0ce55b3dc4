"""Exception hierarchy shared by all jetcat modules."""


class JetcatError(Exception):
    """Base class for every error raised by jetcat."""


class DimensionMismatchError(JetcatError):
    """Multi-index or coordinate data of the wrong length for the ambient base."""


class OrderBudgetError(JetcatError):
    """An operation would need more jet/Weil order than the declared budget."""


class FiberMismatchError(JetcatError):
    """Operator composition or system pairing with incompatible fiber alphabets."""


class CyclicSolvedFormError(JetcatError):
    """Solved-form substitution does not terminate (cyclic dependency)."""


class UnsupportedModeError(JetcatError):
    """Exact solving requested for a system class it does not cover."""


class IntegrabilityError(JetcatError):
    """Coalgebra construction attempted on a system that fails integrability."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class ParseError(JetcatError):
    """DSL input rejected; carries the diagnostics with source spans."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
