"""Shared exception base for the package.

Module-specific errors live next to the code that raises them and all
derive from LogicodeError so callers can catch the whole family.
"""


class LogicodeError(Exception):
    """Base class for every error raised by this package."""
