"""Message schemes for the eight ranging methods and their estimators.

``simulate`` plays a method's message exchange on the ideal timeline, reads
every event through the owning node's clock and returns the measured
quantities the method's estimator consumes. Estimators evaluate their
formula in exact rational arithmetic on the integer-picosecond readings and
convert to float seconds once at the end.

Symbol conventions (per method):

* ToA family: ``A`` initiates (the Tag), ``B`` responds (an Anchor).
* TDoA family: ``S``/``T`` is the Tag, ``A`` an Anchor and ``B`` the second
  Anchor, which is the Mirror for Whistle, DJKM and DP-Whistle.
* Every TDoA estimate follows ``T_AB = (d(tag, B) - d(tag, A)) / c``.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import NamedTuple

import numpy as np

from .errors import MalformedIntervalError, RoleError, ScheduleError
from .geometry import (
    DEFAULT_CONSTANTS,
    Node,
    PropagationConstants,
    Role,
    distance,
    tof,
    true_tdoa,
)
from .timebase import (
    PS_PER_S,
    IdealInstant,
    MeasuredTimestamp,
    interval,
    read_clock,
    seconds_to_ps,
)


class Method(str, enum.Enum):
    SIMPLE_TOA = "simple_toa"
    TWR = "twr"
    SDS_TWR = "sds_twr"
    ASYM_DS_TWR = "asym_ds_twr"
    SIMPLE_TDOA = "simple_tdoa"
    WHISTLE = "whistle"
    DJKM = "djkm"
    DP_WHISTLE = "dp_whistle"

    @property
    def is_tdoa(self) -> bool:
        return self in _TDOA_METHODS

    @property
    def clock_symbols(self) -> tuple[str, ...]:
        """Symbols of the clocks whose drift enters the estimate."""
        return ("T", "B") if self is Method.DJKM else ("A", "B")

    @property
    def needs_mirror(self) -> bool:
        return self in (Method.WHISTLE, Method.DJKM, Method.DP_WHISTLE)


_TDOA_METHODS = frozenset(
    {Method.SIMPLE_TDOA, Method.WHISTLE, Method.DJKM, Method.DP_WHISTLE}
)


class EstimateKind(str, enum.Enum):
    DISTANCE = "distance"
    TDOA = "tdoa"


@dataclass(frozen=True)
class Schedule:
    """Timing plan. Delays are in seconds and realised exactly on the ideal timeline."""

    t_start: IdealInstant = IdealInstant(0)
    reply_delay_b: float = 1e-3
    reply_delay_a: float = 1e-3
    pulse_gap: float = 5e-3

    def __post_init__(self):
        if not isinstance(self.t_start, IdealInstant):
            object.__setattr__(self, "t_start", IdealInstant(self.t_start))
        if self.t_start.ps < 0:
            raise ScheduleError("t_start must be non-negative")
        for name in ("reply_delay_b", "reply_delay_a", "pulse_gap"):
            if not getattr(self, name) > 0:
                raise ScheduleError(f"{name} must be positive")


class MeasuredValue(NamedTuple):
    clock_id: str
    ps: int


@dataclass(frozen=True)
class TraceEvent:
    node_id: str
    kind: str  # "TX" | "RX"
    msg: int
    ideal_ps: int
    measured_ps: int


@dataclass(frozen=True)
class MessageTrace:
    events: tuple[TraceEvent, ...]

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class IntervalSet:
    """Measured quantities of one run plus the constants an estimator needs.

    ``measured`` maps names (``t1``, ``t2``, ``R_A``, ``D_A``, ``R_B``, ``D_B``,
    ``R_T``) to the measuring clock and value in picoseconds. ``ideal`` holds
    the same names on the error-free timeline. ``d_ab_ps`` is the known
    Anchor-to-Anchor (or Anchor-to-Mirror) propagation time for TDoA methods;
    for DJKM it, together with ``D_B``, stands in for the payload the Tag
    would receive.
    """

    method: Method
    measured: Mapping[str, MeasuredValue]
    ideal: Mapping[str, int]
    c: float = DEFAULT_CONSTANTS.c
    d_ab_ps: int | None = None
    roles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "measured", MappingProxyType(dict(self.measured)))
        object.__setattr__(self, "ideal", MappingProxyType(dict(self.ideal)))
        object.__setattr__(self, "roles", MappingProxyType(dict(self.roles)))

    def ps(self, name: str) -> int:
        return self.measured[name].ps

    def seconds(self, name: str) -> float:
        return self.measured[name].ps / PS_PER_S

    @property
    def d_ab_s(self) -> float | None:
        return None if self.d_ab_ps is None else self.d_ab_ps / PS_PER_S


@dataclass(frozen=True)
class Estimate:
    method: Method
    value_s: float
    value_m: float
    kind: EstimateKind


def bind_roles(method: Method, nodes: Sequence[Node]) -> dict[str, Node]:
    """Assign the method's symbols (A, B, S/T) to nodes.

    Exactly one Tag is required. Extra anchors are ignored; the first suitable
    ones in list order are bound.
    """
    method = Method(method)
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise RoleError(f"duplicate node ids in {ids}")
    tags = [n for n in nodes if n.role is Role.TAG]
    if len(tags) != 1:
        raise RoleError(f"{method.value} needs exactly one tag, got {len(tags)}")
    tag = tags[0]
    anchors = [n for n in nodes if n.role.is_anchor]
    mirrors = [n for n in nodes if n.role is Role.MIRROR]

    if not method.is_tdoa:
        if not anchors:
            raise RoleError(f"{method.value} needs an anchor")
        return {"A": tag, "B": anchors[0]}
    tag_symbol = "T" if method is Method.DJKM else "S"
    if method is Method.SIMPLE_TDOA:
        if len(anchors) < 2:
            raise RoleError("simple_tdoa needs two anchors")
        return {tag_symbol: tag, "A": anchors[0], "B": anchors[1]}
    if len(mirrors) != 1:
        raise RoleError(f"{method.value} needs exactly one mirror, got {len(mirrors)}")
    plain = [n for n in nodes if n.role is Role.ANCHOR]
    if not plain:
        raise RoleError(f"{method.value} needs an anchor besides the mirror")
    return {tag_symbol: tag, "A": plain[0], "B": mirrors[0]}


def true_value(
    method: Method, nodes: Sequence[Node], k: PropagationConstants = DEFAULT_CONSTANTS
) -> float:
    """Error-free distance (as time) or TDoA, in seconds."""
    roles = bind_roles(method, nodes)
    if not Method(method).is_tdoa:
        return distance(roles["A"].position, roles["B"].position) / k.c
    tag = roles["T"] if method is Method.DJKM else roles["S"]
    return true_tdoa(tag.position, roles["A"].position, roles["B"].position, k)


class _Timeline:
    """Collects TX/RX events and clock readings while a scheme is played out."""

    def __init__(self, k: PropagationConstants, rng: np.random.Generator | None):
        self.k = k
        self.rng = rng
        self.events: list[TraceEvent] = []
        self._msg = 0

    def _read(self, node: Node, ideal_ps: int) -> MeasuredTimestamp:
        return read_clock(IdealInstant(ideal_ps), node.clock, self.rng)

    def tx(self, node: Node, ideal_ps: int) -> tuple[int, int, MeasuredTimestamp]:
        self._msg += 1
        reading = self._read(node, ideal_ps)
        self.events.append(TraceEvent(node.id, "TX", self._msg, ideal_ps, reading.ps))
        return self._msg, ideal_ps, reading

    def rx(
        self, sent: tuple[int, int, MeasuredTimestamp], src: Node, node: Node
    ) -> tuple[int, MeasuredTimestamp]:
        msg, t_tx, _ = sent
        t_rx = t_tx + tof(src.position, node.position, self.k)
        reading = self._read(node, t_rx)
        self.events.append(TraceEvent(node.id, "RX", msg, t_rx, reading.ps))
        return t_rx, reading

    def trace(self) -> MessageTrace:
        return MessageTrace(tuple(sorted(self.events, key=lambda e: e.ideal_ps)))


def _mv(a: MeasuredTimestamp, b: MeasuredTimestamp) -> MeasuredValue:
    return MeasuredValue(a.clock_id, interval(a, b))


def simulate(
    method: Method,
    nodes: Sequence[Node],
    schedule: Schedule = Schedule(),
    k: PropagationConstants = DEFAULT_CONSTANTS,
    rng: np.random.Generator | None = None,
) -> tuple[MessageTrace, IntervalSet]:
    """Run one measurement of ``method`` and collect its measured intervals."""
    method = Method(method)
    roles = bind_roles(method, nodes)
    tl = _Timeline(k, rng)
    t0 = schedule.t_start.ps
    d_b = seconds_to_ps(schedule.reply_delay_b)
    d_a = seconds_to_ps(schedule.reply_delay_a)
    a, b = roles["A"], roles["B"]
    measured: dict[str, MeasuredValue] = {}
    ideal: dict[str, int] = {}
    d_ab_ps = None

    if method is Method.SIMPLE_TOA:
        m1 = tl.tx(a, t0)
        t2, r2 = tl.rx(m1, a, b)
        measured = {"t1": MeasuredValue(a.id, m1[2].ps), "t2": MeasuredValue(b.id, r2.ps)}
        ideal = {"t1": t0, "t2": t2}

    elif method is Method.TWR:
        m1 = tl.tx(a, t0)
        t2, r2 = tl.rx(m1, a, b)
        m2 = tl.tx(b, t2 + d_b)
        t4, r4 = tl.rx(m2, b, a)
        measured = {"R_A": _mv(m1[2], r4), "D_B": _mv(r2, m2[2])}
        ideal = {"R_A": t4 - t0, "D_B": d_b}

    elif method in (Method.SDS_TWR, Method.ASYM_DS_TWR):
        m1 = tl.tx(a, t0)
        t2, r2 = tl.rx(m1, a, b)
        m2 = tl.tx(b, t2 + d_b)
        t4, r4 = tl.rx(m2, b, a)
        m3 = tl.tx(a, t4 + d_a)
        t6, r6 = tl.rx(m3, a, b)
        measured = {
            "R_A": _mv(m1[2], r4),
            "D_A": _mv(r4, m3[2]),
            "R_B": _mv(m2[2], r6),
            "D_B": _mv(r2, m2[2]),
        }
        ideal = {"R_A": t4 - t0, "D_A": d_a, "R_B": t6 - m2[1], "D_B": d_b}

    elif method is Method.SIMPLE_TDOA:
        s = roles["S"]
        m1 = tl.tx(s, t0)
        t1, r1 = tl.rx(m1, s, a)
        t2, r2 = tl.rx(m1, s, b)
        measured = {"t1": MeasuredValue(a.id, r1.ps), "t2": MeasuredValue(b.id, r2.ps)}
        ideal = {"t1": t1, "t2": t2}

    elif method is Method.WHISTLE:
        s = roles["S"]
        d_ab_ps = tof(a.position, b.position, k)
        m1 = tl.tx(s, t0)
        t1, r1 = tl.rx(m1, s, a)
        t2, r2 = tl.rx(m1, s, b)
        m2 = tl.tx(b, t2 + d_b)
        t4, r4 = tl.rx(m2, b, a)
        measured = {"R_A": _mv(r1, r4), "D_B": _mv(r2, m2[2])}
        ideal = {"R_A": t4 - t1, "D_B": d_b}

    elif method is Method.DJKM:
        t = roles["T"]
        d_ab_ps = tof(a.position, b.position, k)
        m1 = tl.tx(a, t0)
        t1, r1 = tl.rx(m1, a, t)
        t2, r2 = tl.rx(m1, a, b)
        m2 = tl.tx(b, t2 + d_b)
        t4, r4 = tl.rx(m2, b, t)
        measured = {"R_T": _mv(r1, r4), "D_B": _mv(r2, m2[2])}
        ideal = {"R_T": t4 - t1, "D_B": d_b}

    elif method is Method.DP_WHISTLE:
        s = roles["S"]
        d_ab_ps = tof(a.position, b.position, k)
        gap = seconds_to_ps(schedule.pulse_gap)
        spread = abs(tof(s.position, b.position, k) - tof(s.position, a.position, k))
        if not gap > d_b + d_ab_ps + spread:
            raise ScheduleError(
                "pulse_gap must exceed reply_delay_b + tof(A,B) + |TDoA| so the second "
                "pulse reaches A after the mirror signal"
            )
        p1 = tl.tx(s, t0)
        a1, ra1 = tl.rx(p1, s, a)
        b1, rb1 = tl.rx(p1, s, b)
        mirror = tl.tx(b, b1 + d_b)
        a2, ra2 = tl.rx(mirror, b, a)
        p2 = tl.tx(s, t0 + gap)
        a3, ra3 = tl.rx(p2, s, a)
        b3, rb3 = tl.rx(p2, s, b)
        measured = {
            "R_A": _mv(ra1, ra2),
            "D_A": _mv(ra2, ra3),
            "R_B": _mv(mirror[2], rb3),
            "D_B": _mv(rb1, mirror[2]),
        }
        ideal = {"R_A": a2 - a1, "D_A": a3 - a2, "R_B": b3 - mirror[1], "D_B": d_b}

    iv = IntervalSet(
        method,
        measured,
        ideal,
        c=k.c,
        d_ab_ps=d_ab_ps,
        roles={sym: n.id for sym, n in roles.items()},
    )
    return tl.trace(), iv


# -- estimators --------------------------------------------------------------


def _check(iv: IntervalSet, *methods: Method) -> None:
    if iv.method not in methods:
        raise ValueError(f"interval set from {iv.method.value}, expected {[m.value for m in methods]}")


def _estimate(method: Method, value_ps: Fraction | int, c: float) -> Estimate:
    value_s = float(Fraction(value_ps) / PS_PER_S)
    kind = EstimateKind.TDOA if method.is_tdoa else EstimateKind.DISTANCE
    return Estimate(method, value_s, value_s * c, kind)


def _known_d_ab(iv: IntervalSet) -> int:
    if iv.d_ab_ps is None:
        raise MalformedIntervalError(f"{iv.method.value} needs the known anchor distance d_AB")
    return iv.d_ab_ps


def _double_pulse_ratio(ra: int, da: int, rb: int, db: int) -> Fraction:
    denom = ra + rb + da + db
    if denom <= 0:
        raise MalformedIntervalError(f"interval sum {denom} ps is not positive")
    return Fraction(ra * rb - da * db, denom)


def estimate_simple_toa(iv: IntervalSet) -> Estimate:
    _check(iv, Method.SIMPLE_TOA)
    return _estimate(iv.method, iv.ps("t2") - iv.ps("t1"), iv.c)


def estimate_twr(iv: IntervalSet) -> Estimate:
    _check(iv, Method.TWR)
    return _estimate(iv.method, Fraction(iv.ps("R_A") - iv.ps("D_B"), 2), iv.c)


def estimate_sds_twr(iv: IntervalSet) -> Estimate:
    """Symmetric double-sided estimate, ``(R_A - D_B + R_B - D_A) / 4``."""
    _check(iv, Method.SDS_TWR, Method.ASYM_DS_TWR)
    total = iv.ps("R_A") - iv.ps("D_B") + iv.ps("R_B") - iv.ps("D_A")
    return _estimate(Method.SDS_TWR, Fraction(total, 4), iv.c)


def estimate_asym_ds_twr(iv: IntervalSet) -> Estimate:
    """Asymmetric double-sided estimate ``(R_A R_B - D_A D_B) / (R_A + R_B + D_A + D_B)``."""
    _check(iv, Method.SDS_TWR, Method.ASYM_DS_TWR)
    ra, da, rb, db = (iv.ps(n) for n in ("R_A", "D_A", "R_B", "D_B"))
    return _estimate(Method.ASYM_DS_TWR, _double_pulse_ratio(ra, da, rb, db), iv.c)


def estimate_simple_tdoa(iv: IntervalSet) -> Estimate:
    _check(iv, Method.SIMPLE_TDOA)
    return _estimate(iv.method, iv.ps("t2") - iv.ps("t1"), iv.c)


def estimate_whistle(iv: IntervalSet) -> Estimate:
    """``R_A - D_B - d_AB``; sign chosen so the result is ``d_SB - d_SA``."""
    _check(iv, Method.WHISTLE)
    return _estimate(iv.method, iv.ps("R_A") - iv.ps("D_B") - _known_d_ab(iv), iv.c)


def estimate_djkm(iv: IntervalSet) -> Estimate:
    _check(iv, Method.DJKM)
    return _estimate(iv.method, iv.ps("R_T") - iv.ps("D_B") - _known_d_ab(iv), iv.c)


def estimate_dp_whistle(iv: IntervalSet) -> Estimate:
    _check(iv, Method.DP_WHISTLE)
    ra, da, rb, db = (iv.ps(n) for n in ("R_A", "D_A", "R_B", "D_B"))
    value = 2 * _double_pulse_ratio(ra, da, rb, db) - _known_d_ab(iv)
    return _estimate(iv.method, value, iv.c)


ESTIMATORS = {
    Method.SIMPLE_TOA: estimate_simple_toa,
    Method.TWR: estimate_twr,
    Method.SDS_TWR: estimate_sds_twr,
    Method.ASYM_DS_TWR: estimate_asym_ds_twr,
    Method.SIMPLE_TDOA: estimate_simple_tdoa,
    Method.WHISTLE: estimate_whistle,
    Method.DJKM: estimate_djkm,
    Method.DP_WHISTLE: estimate_dp_whistle,
}


def estimate(iv: IntervalSet) -> Estimate:
    """Apply the estimator belonging to ``iv.method``."""
    return ESTIMATORS[iv.method](iv)


# -- single-denominator forms, float arithmetic --------------------------------


def asym_ds_twr_forms(ra: float, da: float, rb: float, db: float) -> tuple[float, float, float]:
    """Time of flight from the A-side denominator, the B-side one and the combined sum.

    All three agree whenever ``R_A + D_A == R_B + D_B``.
    """
    num = ra * rb - da * db
    if ra + da <= 0 or rb + db <= 0:
        raise MalformedIntervalError("non-positive denominator")
    return num / (2 * (ra + da)), num / (2 * (rb + db)), num / (ra + rb + da + db)


def dp_whistle_forms(
    ra: float, da: float, rb: float, db: float, d_ab: float
) -> tuple[float, float, float]:
    """DP-Whistle TDoA from the A-side denominator, the B-side one and the combined sum."""
    num = ra * rb - da * db
    if ra + da <= 0 or rb + db <= 0:
        raise MalformedIntervalError("non-positive denominator")
    return (
        num / (ra + da) - d_ab,
        num / (rb + db) - d_ab,
        2 * num / (ra + rb + da + db) - d_ab,
    )
