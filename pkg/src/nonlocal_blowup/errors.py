"""Exception types raised across the package."""


class NonlocalBlowupError(Exception):
    """Base class for all package errors."""


class ConfigError(NonlocalBlowupError):
    """Malformed configuration document (syntax, unknown key, bad type)."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(NonlocalBlowupError):
    """A value violates a model or solver invariant."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        self.line = None
        super().__init__(f"{field}: {message}")

    def __str__(self):
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.field}: {self.message}{where}"


class IntegrityError(NonlocalBlowupError):
    """Numerical state is inconsistent (e.g. positivity breach)."""


class KernelEvaluationError(NonlocalBlowupError):
    """Kernel cannot be evaluated at the requested point or time."""


class PreconditionError(NonlocalBlowupError):
    """A theoretical construction was requested outside its hypotheses."""


class QuadratureError(NonlocalBlowupError):
    """Adaptive quadrature failed to converge."""
