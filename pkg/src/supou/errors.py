"""Exception hierarchy shared by the library, the service and the CLI.

ConfigurationError maps to HTTP 422 / exit code 2, ComputationError to
HTTP 500 / exit code 1.
"""


class SupouError(Exception):
    pass


class ConfigurationError(SupouError):
    """Invalid measure, law, grid or config input."""


class DomainError(ConfigurationError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedOperationError(ConfigurationError):
    """Operation not available for this variant (e.g. Mittag-Leffler sampling)."""


class ComputationError(SupouError):
    """Numerical failure during an otherwise valid computation."""


class QuadratureError(ComputationError):
    def __init__(self, message, worst_interval=None):
        super().__init__(message)
        self.worst_interval = worst_interval
