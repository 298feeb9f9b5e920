"""Exception types shared across the package."""


class IkepError(Exception):
    """Base class for all package errors."""


class ConfigurationError(IkepError):
    """Invalid user-supplied configuration (frequencies, caps, flags)."""


class InstanceFormatError(IkepError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class UnsupportedPolicyError(IkepError):
    """Policy/model combination this code path cannot handle."""


class ModelError(IkepError):
    """Inconsistent IP model (unknown nodes, bad variable references)."""


class DecodeError(IkepError):
    """Solution cannot be decomposed into disjoint exchanges."""
