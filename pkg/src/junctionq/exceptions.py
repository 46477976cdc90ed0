"""Custom exceptions for junctionq."""

from typing import Any, Optional


class JunctionqError(Exception):
    """Base exception for all junctionq errors."""

    def __init__(self, message: str, code: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.code = code

    def __str__(self) -> str:
        if self.code:
            return f"[{self.code}] {self.message}"
        return self.message


class ConfigurationError(JunctionqError):
    """Raised when a scenario document fails validation."""

    def __init__(self, message: str = "Invalid scenario configuration") -> None:
        super().__init__(message, code="invalid_config")


class InvalidParameterError(JunctionqError):
    """Raised when a numeric parameter is outside its admissible range."""

    def __init__(self, message: str = "Parameter out of range") -> None:
        super().__init__(message, code="invalid_parameter")


class UndefinedPairError(JunctionqError):
    """Raised when a route pair has no train sequences to average over."""

    def __init__(self, route: str, other: str) -> None:
        message = f"Route pair ({route}, {other}) has zero sequence weight"
        super().__init__(message, code="undefined_pair")
        self.route = route
        self.other = other


class NoDemandError(JunctionqError):
    """Raised when a route and all its conflicting routes carry no trains."""

    def __init__(self, route: str) -> None:
        message = f"Route {route} has no demand in its conflict set"
        super().__init__(message, code="no_demand")
        self.route = route


class UnsupportedDistributionError(JunctionqError):
    """Raised for coefficients of variation a hypoexponential cannot reach."""

    def __init__(self, cv: float) -> None:
        message = f"Coefficient of variation {cv} exceeds 1; hypoexponential fit unsupported"
        super().__init__(message, code="unsupported_distribution")
        self.cv = cv


class FittingError(JunctionqError):
    """Raised when the two-segment Erlang fit has no valid solution."""

    def __init__(self, mean: float, cv: float, diagnostic: str) -> None:
        message = f"Cannot fit mean={mean}, cv={cv}: {diagnostic}"
        super().__init__(message, code="fitting_failed")
        self.mean = mean
        self.cv = cv
        self.diagnostic = diagnostic


class StateSpaceTooLargeError(JunctionqError):
    """Raised when a model would exceed the configured state-count guard."""

    def __init__(self, count: int, cap: int) -> None:
        message = f"Model needs {count} states, above the cap of {cap}"
        super().__init__(message, code="state_space_too_large")
        self.count = count
        self.cap = cap


class ConvergenceError(JunctionqError):
    """Raised when an iterative method stops before meeting its tolerance."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        iterations: Optional[int] = None,
        bracket: Optional[tuple[float, float]] = None,
    ) -> None:
        super().__init__(message, code="not_converged")
        self.residual = residual
        self.iterations = iterations
        self.bracket = bracket


class ReducibleChainError(JunctionqError):
    """Raised when a chain has more than one strongly connected component."""

    def __init__(self, components: int) -> None:
        message = f"Chain is reducible ({components} strongly connected components)"
        super().__init__(message, code="reducible_chain")
        self.components = components


class DomainError(JunctionqError):
    """Raised when an approximation formula is evaluated outside its domain."""

    def __init__(self, message: str = "Argument outside the formula's domain") -> None:
        super().__init__(message, code="domain_error")


class BracketError(JunctionqError):
    """Raised when a root search interval has no sign change."""

    def __init__(self, a: float, b: float, fa: float, fb: float) -> None:
        message = f"f(a) and f(b) must have opposite signs, got f({a})={fa}, f({b})={fb}"
        super().__init__(message, code="no_sign_change")
        self.a = a
        self.b = b
        self.fa = fa
        self.fb = fb


class EvaluationError(JunctionqError):
    """Raised when the capacity function fails at a specific train count."""

    def __init__(self, n_total: float, cause: Any) -> None:
        message = f"Evaluation at n_total={n_total} failed: {cause}"
        super().__init__(message, code="evaluation_failed")
        self.n_total = n_total
        self.cause = cause
