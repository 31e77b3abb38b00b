"""Exception hierarchy shared by every depthbench module."""


class DepthBenchError(Exception):
    """Base class for all errors raised by depthbench."""

    exit_code = 3


class ConfigurationError(DepthBenchError, ValueError):
    """Invalid scheme, crop, policy or manifest configuration."""


class DomainError(DepthBenchError, ValueError):
    """Argument outside the domain of an operation (e.g. class index >= K)."""


class DataError(DepthBenchError, ValueError):
    """Input data violates an operation's contract."""


class FormatError(DepthBenchError, OSError):
    """A file is missing or not in the expected raster format."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class EvaluationError(DepthBenchError, RuntimeError):
    """Evaluation could not produce a report (empty set, all entries failed)."""

    exit_code = 4

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
