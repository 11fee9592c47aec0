"""Exception types shared across the toolkit."""


class RegverifyError(Exception):
    """Base class for all toolkit errors."""


class ProtocolSyntaxError(RegverifyError):
    """Raised by the protocol parser on malformed input."""

    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class ProtocolSemanticError(RegverifyError):
    """Raised when a protocol source references undeclared entities."""


class ConstraintSyntaxError(RegverifyError):
    """Raised by the constraint parser on malformed input."""


class NotEnabled(RegverifyError):
    """A move is not enabled at the current configuration."""

    def __init__(self, reason: str, step_index: int | None = None):
        self.reason = reason
        self.step_index = step_index
        where = f" at step {step_index}" if step_index is not None else ""
        super().__init__(f"move not enabled{where}: {reason}")


class ReplayFailure(RegverifyError):
    """An execution failed to replay."""


class EmptySupport(RegverifyError):
    """Initial configuration requested with an empty support."""


class NotInitialState(RegverifyError):
    """Initial configuration requested with a non-initial state."""


class MissingWindow(RegverifyError):
    """Round-based successor enumeration needs an explicit round window."""


class TargetNotPopulated(RegverifyError):
    """Copycat extension target is absent from the final configuration."""


class NotDNF(RegverifyError):
    """Constraint is not in disjunctive normal form."""


class NotUninitialized(RegverifyError):
    """Operation requires a protocol that never reads the initial symbol."""


class WrongRegisterCount(RegverifyError):
    """Operation requires a specific register count."""


class CapExceeded(RegverifyError):
    """Exhaustive exploration would exceed the configured cap."""


class WindowNotContained(RegverifyError):
    """Footprint projection target window is not inside the source window."""


class InconsistentProjections(RegverifyError):
    """Footprints cannot be glued: overlapping projections disagree."""


class CyclicCircuit(RegverifyError):
    """Circuit description is cyclic or uses undefined wires."""
