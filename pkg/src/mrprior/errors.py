"""Exception hierarchy shared by every mrprior module.

Three failure families, mapped one-to-one onto CLI exit codes:
input problems (bad files, bad parameters), applicability problems
(a metric or transform that cannot run on the given data), and
internal invariant violations.
"""


class MrPriorError(Exception):
    """Base class for all toolkit errors."""


class InputError(MrPriorError):
    """Malformed or inconsistent external input (files, flags, parameters)."""


class ApplicabilityError(MrPriorError):
    """The requested operation is not applicable to the supplied data."""


class InvariantError(MrPriorError):
    """An internal consistency check failed; indicates a bug, not bad input."""
