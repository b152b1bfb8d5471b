"""Exception types shared across the package."""


class TraceMineError(Exception):
    """Base class for all domain errors raised by tracemine."""


class CycleError(TraceMineError):
    """The input graph contains a directed cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        path = " -> ".join(str(v) for v in self.cycle + self.cycle[:1])
        super().__init__(f"graph is not acyclic; witness cycle: {path}")


class RangeError(TraceMineError, IndexError):
    """An edge endpoint refers to a vertex that does not exist."""


class ParseError(TraceMineError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class BudgetExceeded(TraceMineError):
    """Materializing the requested output would exceed the configured cap."""


class DomainError(TraceMineError, ValueError):
    """A numeric parameter is outside its admissible range."""
