"""Clock-drift analysis and simulation of synchronisation-free ToA/TDoA ranging."""

from .analysis import (
    ErrorBound,
    FormulaTerms,
    analytic_error,
    exact_error_oracle,
    terms_for,
    worst_case_bound,
)
from .errors import (
    ClockMismatchError,
    ClockOverflowError,
    DegenerateGeometry,
    MalformedIntervalError,
    RoleError,
    ScenarioError,
    ScheduleError,
    ToflabError,
)
from .geometry import Node, Point2D, PropagationConstants, Role, distance, tof, true_tdoa
from .locate import (
    Fix,
    RangeObservation,
    TdoaObservation,
    end_to_end,
    hyperbolic_locate,
    trilaterate,
)
from .protocols import Estimate, IntervalSet, Method, Schedule, estimate, simulate, true_value
from .timebase import ClockModel, IdealInstant, MeasuredTimestamp, PpmDrift, interval, read_clock

__version__ = "0.1.0"
