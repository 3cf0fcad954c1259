"""Exception hierarchy shared by all modules.

Each class maps to a distinct CLI exit status (see ``xiangsheng.cli``).
"""


class XiangshengError(Exception):
    """Base class for every error raised deliberately by this package."""


class ConfigError(XiangshengError, ValueError):
    """A parameter or configuration value is out of its allowed range."""


class FormatError(XiangshengError, ValueError):
    """An input file violates its documented format."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class StructureError(XiangshengError, ValueError):
    """Input parsed fine but breaks a structural invariant (e.g. role order)."""


class DataError(XiangshengError, ValueError):
    """Training data is empty, degenerate, or too small for the request."""
