"""Exception hierarchy shared across the package."""


class GbnError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(GbnError):
    """A set of arcs contains a directed cycle."""


class OrientationConflictError(GbnError):
    """Edge-orientation rules compelled both directions of the same edge."""


class NoConsistentExtensionError(GbnError):
    """A partially directed graph admits no consistent DAG extension."""


class EncodingOverflowError(GbnError):
    """Product encoding of a variable group exceeds the state cap."""

    def __init__(self, message, group=None, states_needed=None, cap=None):
        super().__init__(message)
        self.group = group
        self.states_needed = states_needed
        self.cap = cap


class BudgetExceededError(GbnError):
    """An operation would exceed the configured memory budget."""

    def __init__(self, message, bytes_needed=None, budget_bytes=None):
        super().__init__(message)
        self.bytes_needed = bytes_needed
        self.budget_bytes = budget_bytes


class InputFormatError(GbnError):
    """A file or configuration does not follow the documented format."""
