"""Exception types shared across the package.

The command line maps these onto exit codes: bad inputs exit with 2,
solver failures with 3, and regime diagnoses (a scenario that is simply
in the disease-free regime) are printed and exit 0.
"""

from __future__ import annotations


class SirsLabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SirsLabError):
    """A scenario, file, or argument is malformed or out of range."""


class InapplicableError(SirsLabError):
    """A requested quantity does not exist for this scenario.

    Examples: the waning-rate threshold when the net growth rate is not
    positive everywhere, or a spreading speed in the disease-free regime.
    """


class SolverError(SirsLabError):
    """An iterative solver failed to converge or produced an invalid state.

    Instances may carry diagnostic payloads (scan tables, increment
    histories, state minima) as attributes set by the raising site.
    """

    def __init__(self, message: str, **details: object) -> None:
        super().__init__(message)
        self.details = details
        for key, value in details.items():
            setattr(self, key, value)
