"""Clock-drift error formulas, worst-case corner search and an exact oracle.

``analytic_error`` gives the first-order (signed) error of each method,
``worst_case_bound`` maximises it over the sign corners of the drifts, and
``exact_error_oracle`` evaluates the estimator on exactly scaled continuous
intervals with rational arithmetic. The oracle builds its intervals from the
algebraic relations of each message scheme, not from ``protocols.simulate``,
so the two can check each other.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, fields
from fractions import Fraction
from numbers import Real

import numpy as np

from . import kernels

from .geometry import DEFAULT_CONSTANTS, Node, PropagationConstants, tof
from .protocols import Method, Schedule, bind_roles
from .timebase import PS_PER_S, PpmDrift, seconds_to_ps

DriftAssignment = Mapping[str, PpmDrift]


@dataclass(frozen=True)
class FormulaTerms:
    """Inputs of the error expressions, all in seconds.

    ``d_ab`` is the range (as time of flight) for ToA methods and the known
    Anchor/Mirror baseline for TDoA methods. ``t1`` is the time elapsed since
    the last synchronisation (emission for simple ToA, first arrival for
    simple TDoA). ``tdoa`` is the true TDoA ``T_AB``.
    """

    t1: Real | None = None
    d_a: Real | None = None
    d_b: Real | None = None
    d_ab: Real | None = None
    tdoa: Real | None = None
    pulse_gap: Real | None = None

    def need(self, *names: str) -> tuple[Fraction, ...]:
        out = []
        for name in names:
            value = getattr(self, name)
            if value is None:
                raise ValueError(f"error formula needs term '{name}'")
            out.append(Fraction(value))
        return tuple(out)

    def as_dict(self) -> dict[str, float | None]:
        return {
            f.name: None if getattr(self, f.name) is None else float(getattr(self, f.name))
            for f in fields(self)
        }


@dataclass(frozen=True)
class ErrorBound:
    method: Method
    worst_error_s: float
    worst_error_m: float
    formula_terms: FormulaTerms
    eps_max: PpmDrift
    corner: Mapping[str, PpmDrift]
    slack_s: float
    c: float = DEFAULT_CONSTANTS.c

    @property
    def slack_m(self) -> float:
        return self.slack_s * self.c


# first-order error rows, signed seconds; drifts as floats
def _err_simple_toa(t, e):
    (t1,) = t.need("t1")
    return float(t1) * (e["B"] - e["A"])


def _err_twr(t, e):
    (d_b,) = t.need("d_b")
    return 0.5 * (e["A"] - e["B"]) * float(d_b)


def _err_sds_twr(t, e):
    d_a, d_b = t.need("d_a", "d_b")
    return 0.25 * (e["A"] - e["B"]) * float(d_b - d_a)


def _err_asym(t, e):
    (d_ab,) = t.need("d_ab")
    return 0.5 * (e["A"] + e["B"]) * float(d_ab)


def _err_whistle(t, e):
    # the estimator returns d_SB - d_SA, which flips the sign of the
    # (eps_B - eps_A) * D_B row
    (d_b,) = t.need("d_b")
    return (e["A"] - e["B"]) * float(d_b)


def _err_djkm(t, e):
    (d_b,) = t.need("d_b")
    return (e["T"] - e["B"]) * float(d_b)


def _err_dp_whistle(t, e):
    (d_ab,) = t.need("d_ab")
    return (e["A"] + e["B"]) * float(d_ab)


_ANALYTIC = {
    Method.SIMPLE_TOA: _err_simple_toa,
    Method.TWR: _err_twr,
    Method.SDS_TWR: _err_sds_twr,
    Method.ASYM_DS_TWR: _err_asym,
    Method.SIMPLE_TDOA: _err_simple_toa,
    Method.WHISTLE: _err_whistle,
    Method.DJKM: _err_djkm,
    Method.DP_WHISTLE: _err_dp_whistle,
}


def _eps(method: Method, drifts: DriftAssignment) -> dict[str, float]:
    missing = [s for s in method.clock_symbols if s not in drifts]
    if missing:
        raise ValueError(f"{method.value} needs drifts for {missing}")
    return {s: float(drifts[s].epsilon) for s in method.clock_symbols}


def analytic_error(method: Method, terms: FormulaTerms, drifts: DriftAssignment) -> float:
    """First-order clock-drift error of ``method`` in seconds (signed)."""
    method = Method(method)
    return _ANALYTIC[method](terms, _eps(method, drifts))


def corners(symbols: Sequence[str], eps_max: PpmDrift) -> Iterator[dict[str, PpmDrift]]:
    """All ``2**len(symbols)`` assignments of ``+-eps_max``."""
    for signs in itertools.product((1, -1), repeat=len(symbols)):
        yield {s: PpmDrift(sign * eps_max.micro_ppm) for s, sign in zip(symbols, signs)}


# long intervals each method measures; they set the eps**2 term of the slack
_INTERVAL_TERMS = {
    Method.SIMPLE_TOA: ("t1",),
    Method.TWR: ("d_b",),
    Method.SDS_TWR: ("d_a", "d_b"),
    Method.ASYM_DS_TWR: ("d_a", "d_b"),
    Method.SIMPLE_TDOA: ("t1",),
    Method.WHISTLE: ("d_b",),
    Method.DJKM: ("d_b",),
    Method.DP_WHISTLE: ("d_b", "pulse_gap"),
}


def approximation_slack(method: Method, terms: FormulaTerms, eps_max: PpmDrift) -> float:
    """Size of the terms the first-order rows drop, in seconds.

    ``2 eps (d_AB + |T|) + eps**2 * L`` with ``L`` the longest interval the method measures.
    """
    eps = abs(float(eps_max.epsilon))
    d_ab = abs(float(terms.d_ab or 0.0))
    tdoa = abs(float(terms.tdoa or 0.0))
    spans = (getattr(terms, name) for name in _INTERVAL_TERMS[Method(method)])
    longest = max((abs(float(v)) for v in spans if v is not None), default=0.0) + 2 * (d_ab + tdoa)
    return 2 * eps * (d_ab + tdoa) + eps * eps * longest


def worst_case_bound(
    method: Method,
    terms: FormulaTerms,
    eps_max: PpmDrift,
    k: PropagationConstants = DEFAULT_CONSTANTS,
) -> ErrorBound:
    """Largest ``|analytic_error|`` over the drift sign corners."""
    method = Method(method)
    if eps_max.micro_ppm < 0:
        raise ValueError("eps_max must be non-negative")
    best, best_corner = 0.0, {s: eps_max for s in method.clock_symbols}
    for corner in corners(method.clock_symbols, eps_max):
        err = abs(analytic_error(method, terms, corner))
        if err > best:
            best, best_corner = err, corner
    return ErrorBound(
        method=method,
        worst_error_s=best,
        worst_error_m=best * k.c,
        formula_terms=terms,
        eps_max=eps_max,
        corner=best_corner,
        slack_s=approximation_slack(method, terms, eps_max),
        c=k.c,
    )


# -- exact oracle ------------------------------------------------------------


def ideal_intervals(method: Method, terms: FormulaTerms) -> tuple[dict[str, Fraction], Fraction]:
    """Error-free measured quantities of ``method`` and the true value, exact."""
    method = Method(method)
    if method is Method.SIMPLE_TOA:
        t1, d = terms.need("t1", "d_ab")
        return {"t1": t1, "t2": t1 + d}, d
    if method is Method.TWR:
        d_b, d = terms.need("d_b", "d_ab")
        return {"R_A": d_b + 2 * d, "D_B": d_b}, d
    if method in (Method.SDS_TWR, Method.ASYM_DS_TWR):
        d_a, d_b, d = terms.need("d_a", "d_b", "d_ab")
        return {"R_A": d_b + 2 * d, "D_A": d_a, "R_B": d_a + 2 * d, "D_B": d_b}, d
    if method is Method.SIMPLE_TDOA:
        t1, tdoa = terms.need("t1", "tdoa")
        return {"t1": t1, "t2": t1 + tdoa}, tdoa
    if method is Method.WHISTLE:
        d_b, d, tdoa = terms.need("d_b", "d_ab", "tdoa")
        return {"R_A": d_b + d + tdoa, "D_B": d_b}, tdoa
    if method is Method.DJKM:
        d_b, d, tdoa = terms.need("d_b", "d_ab", "tdoa")
        return {"R_T": d_b + d + tdoa, "D_B": d_b}, tdoa
    if method is Method.DP_WHISTLE:
        d_b, d, tdoa, gap = terms.need("d_b", "d_ab", "tdoa", "pulse_gap")
        ra = tdoa + d_b + d
        return {"R_A": ra, "D_A": gap - ra, "R_B": gap - d_b, "D_B": d_b}, tdoa
    raise ValueError(method)


# which clock scales which quantity
_CLOCK_OF = {"t1": "A", "t2": "B", "R_A": "A", "D_A": "A", "R_B": "B", "D_B": "B", "R_T": "T"}


def exact_error_oracle(method: Method, terms: FormulaTerms, drifts: DriftAssignment) -> Fraction:
    """Estimator output on exactly drift-scaled intervals minus the truth, in seconds."""
    method = Method(method)
    _eps(method, drifts)
    ideal, truth = ideal_intervals(method, terms)
    m = {name: v * drifts[_CLOCK_OF[name]].multiplier for name, v in ideal.items()}
    if method in (Method.SIMPLE_TOA, Method.SIMPLE_TDOA):
        est = m["t2"] - m["t1"]
    elif method is Method.TWR:
        est = (m["R_A"] - m["D_B"]) / 2
    elif method is Method.SDS_TWR:
        est = (m["R_A"] - m["D_B"] + m["R_B"] - m["D_A"]) / 4
    elif method is Method.ASYM_DS_TWR:
        est = (m["R_A"] * m["R_B"] - m["D_A"] * m["D_B"]) / (
            m["R_A"] + m["R_B"] + m["D_A"] + m["D_B"]
        )
    elif method is Method.WHISTLE:
        est = m["R_A"] - m["D_B"] - Fraction(terms.d_ab)
    elif method is Method.DJKM:
        est = m["R_T"] - m["D_B"] - Fraction(terms.d_ab)
    else:
        est = 2 * (m["R_A"] * m["R_B"] - m["D_A"] * m["D_B"]) / (
            m["R_A"] + m["R_B"] + m["D_A"] + m["D_B"]
        ) - Fraction(terms.d_ab)
    return est - truth


def terms_for(
    method: Method,
    nodes: Sequence[Node],
    schedule: Schedule = Schedule(),
    k: PropagationConstants = DEFAULT_CONSTANTS,
) -> FormulaTerms:
    """Formula terms of a concrete scenario, on the simulator's picosecond grid."""
    method = Method(method)
    roles = bind_roles(method, nodes)

    def ps(value: int) -> Fraction:
        return Fraction(value, PS_PER_S)

    t0 = schedule.t_start.ps
    a, b = roles["A"].position, roles["B"].position
    common = dict(
        d_a=ps(seconds_to_ps(schedule.reply_delay_a)),
        d_b=ps(seconds_to_ps(schedule.reply_delay_b)),
        pulse_gap=ps(seconds_to_ps(schedule.pulse_gap)),
    )
    if not method.is_tdoa:
        return FormulaTerms(t1=ps(t0), d_ab=ps(tof(a, b, k)), tdoa=Fraction(0), **common)
    tag = (roles["T"] if method is Method.DJKM else roles["S"]).position
    to_a, to_b = tof(tag, a, k), tof(tag, b, k)
    return FormulaTerms(
        t1=ps(t0 + to_a), d_ab=ps(tof(a, b, k)), tdoa=ps(to_b - to_a), **common
    )


# -- float fast path ---------------------------------------------------------

_FAMILY = {
    Method.SIMPLE_TOA: kernels.SIMPLE,
    Method.SIMPLE_TDOA: kernels.SIMPLE,
    Method.TWR: kernels.TWR,
    Method.SDS_TWR: kernels.SDS,
    Method.ASYM_DS_TWR: kernels.ASYM,
    Method.WHISTLE: kernels.ONE_WAY_MIRROR,
    Method.DJKM: kernels.ONE_WAY_MIRROR,
    Method.DP_WHISTLE: kernels.DOUBLE_PULSE,
}


def drift_error_samples(method: Method, terms: FormulaTerms, eps: np.ndarray) -> np.ndarray:
    """Estimator error in seconds for many drift pairs at once (float arithmetic).

    ``eps`` has shape ``(n, 2)``; its columns follow ``method.clock_symbols``
    and hold fractional rate errors (20 ppm == 2e-5).
    """
    method = Method(method)
    ideal, truth = ideal_intervals(method, terms)
    q = np.zeros(4)
    q[: len(ideal)] = [float(v) for v in ideal.values()]
    d_ab = float(terms.d_ab) if terms.d_ab is not None else 0.0
    eps = np.ascontiguousarray(eps, dtype=float).reshape(-1, 2)
    return kernels.drift_errors(_FAMILY[method], q, d_ab, float(truth), eps)
