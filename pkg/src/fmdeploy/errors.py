"""Exception types shared across the package."""

from __future__ import annotations


class FMDeployError(Exception):
    pass


class UnknownReferenceError(FMDeployError, LookupError):
    """A configuration, spec or query names a feature or node that does not exist."""


class InconsistentSpecError(FMDeployError):
    """The deployment spec contradicts itself (detected without search)."""

    def __init__(self, report):
        self.report = list(report)
        lines = "; ".join(v.message for v in self.report)
        super().__init__(f"inconsistent deployment spec: {lines}")


class BoundExceededError(FMDeployError):
    """The brute-force oracle refused a space larger than its bound."""

    def __init__(self, size: int, bound: int):
        self.size = size
        self.bound = bound
        super().__init__(f"search space of {size} combinations exceeds bound {bound}")


class ParseError(FMDeployError):
    """Raised when parsing yields at least one error-severity diagnostic."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
