"""Exception hierarchy shared by all toflab modules."""


class ToflabError(Exception):
    """Base class for every error raised by toflab."""


class ClockMismatchError(ToflabError, ValueError):
    """An interval was requested between readings of two different clocks."""


class ClockOverflowError(ToflabError, OverflowError):
    """A clock reading does not fit in a signed 64-bit picosecond counter."""


class RoleError(ToflabError, ValueError):
    """The node roles do not satisfy the requirements of a ranging method."""


class ScheduleError(ToflabError, ValueError):
    """A schedule violates an ordering or positivity constraint."""


class MalformedIntervalError(ToflabError, ValueError):
    """Measured intervals cannot be fed to an estimator (e.g. zero denominator)."""


class DegenerateGeometry(ToflabError, ValueError):
    """Anchor layout cannot determine a 2D position (collinear or too few anchors)."""


class ScenarioError(ToflabError, ValueError):
    """A scenario document failed parsing or validation.

    ``field`` is a dotted path to the offending field when known, ``line`` the
    1-based line number for parse errors.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line
