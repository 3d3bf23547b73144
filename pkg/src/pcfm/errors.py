"""Exception hierarchy shared by every pcfm module."""


class PcfmError(Exception):
    """Base class for all errors raised by pcfm."""

    def context(self):
        return {}


class DomainError(PcfmError, ValueError):
    """An input lies outside the domain of the requested operation."""


class EvaluationError(PcfmError, ArithmeticError):
    """A series or iteration failed to reach the requested accuracy."""

    def __init__(self, message, partial_sum=None, terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms

    def context(self):
        return {"partial_sum": self.partial_sum, "terms": self.terms}


class UnsupportedDegreeError(DomainError):
    """Closed-form SCI kernel requested for a degree it does not cover."""


class DivergenceError(DomainError):
    """The stretched-island XCI kernel diverges (zero effective dispersion)."""


class FitConditioningError(PcfmError, ValueError):
    """Sample abscissae cannot support a least-squares fit of the requested degree."""


class SolverError(PcfmError, RuntimeError):
    """The Raman boundary-value iteration did not converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

    def context(self):
        return {"residual": self.residual, "iterations": self.iterations}


class StepSizeError(SolverError):
    """A non-positive or non-finite power appeared while stepping."""


class QuadratureError(EvaluationError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message, partial_sum=estimate)
        self.estimate = estimate
        self.error_bound = error_bound

    def context(self):
        return {"estimate": self.estimate, "error_bound": self.error_bound}


class OracleBudgetError(PcfmError, RuntimeError):
    """The reference integration exhausted its work budget."""

    def __init__(self, message, completed=(), partial=None):
        super().__init__(message)
        self.completed = list(completed)
        self.partial = partial

    def context(self):
        return {"completed_islands": [list(x) for x in self.completed]}


class IslandError(PcfmError):
    """A kernel failure, annotated with the island that triggered it."""

    def __init__(self, message, island=None, span=None):
        super().__init__(message)
        self.island = island
        self.span = span

    def context(self):
        ctx = {}
        if self.island is not None:
            ctx["island"] = list(self.island)
        if self.span is not None:
            ctx["span"] = self.span
        return ctx


class ConfigError(PcfmError, ValueError):
    """A scenario file violates the schema; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path

    def context(self):
        return {"path": self.path}
