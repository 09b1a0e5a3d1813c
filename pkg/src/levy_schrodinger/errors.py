"""Exception hierarchy shared by all modules.

CLI exit codes are attached to the classes so the front end can map an
exception to its documented status without a lookup table.
"""


class LevySchrodingerError(Exception):
    exit_code = 1


class ValidationError(LevySchrodingerError, ValueError):
    exit_code = 2


class PositivityError(ValidationError):
    """Ground state falls below the positivity floor."""


class QuadratureError(LevySchrodingerError, RuntimeError):
    exit_code = 3


class BlowUpError(LevySchrodingerError, FloatingPointError):
    exit_code = 4


class ThinningBoundError(LevySchrodingerError, RuntimeError):
    exit_code = 5
