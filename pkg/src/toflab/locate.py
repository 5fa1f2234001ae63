"""Position fixes from range (multilateration) or TDoA (hyperbolic) estimates."""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGeometry, RoleError
from .geometry import DEFAULT_CONSTANTS, Node, PropagationConstants, Point2D, Role
from .protocols import ESTIMATORS, Method, Schedule, simulate

GRAD_TOL = 1e-9
MAX_ITER = 100
DAMPING0 = 1e-3


class AmbiguousFixWarning(UserWarning):
    """Two positions explain the TDoA observations equally well."""


@dataclass(frozen=True)
class RangeObservation:
    anchor: Point2D
    range_m: float

    def __post_init__(self):
        if self.range_m < 0:
            raise ValueError("range must be non-negative")


@dataclass(frozen=True)
class TdoaObservation:
    """``tdoa_s = (|x - other| - |x - reference|) / c``."""

    reference: Point2D
    other: Point2D
    tdoa_s: float


@dataclass(frozen=True)
class Fix:
    position: Point2D
    residual_rms_m: float
    iterations: int
    converged: bool
    initial_rms_m: float = math.nan
    ambiguous: bool = False


def _check_geometry(points: np.ndarray) -> None:
    if len(points) < 3:
        raise DegenerateGeometry(f"2D fix needs at least 3 anchors, got {len(points)}")
    rel = points - points.mean(axis=0)
    sv = np.linalg.svd(rel, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-9 * sv[0]:
        raise DegenerateGeometry("anchors are collinear")


def _as_array(points: Sequence[Point2D]) -> np.ndarray:
    return np.array([[p.x, p.y] for p in points], dtype=float)


def _solve(b, a, meas, tdoa_mode, x0, grad_tol, max_iter) -> Fix:
    x, y, iters, converged, rms0, rms = kernels.lm_solve(
        b, a, meas, tdoa_mode, np.asarray(x0, dtype=float), grad_tol, max_iter, DAMPING0
    )
    return Fix(Point2D(float(x), float(y)), float(rms), int(iters), bool(converged), float(rms0))


def trilaterate(
    obs: Sequence[RangeObservation],
    initial_guess: Point2D | None = None,
    *,
    grad_tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> Fix:
    """Least-squares position from ranges to three or more anchors.

    Starts from the anchor centroid unless ``initial_guess`` is given.
    Non-convergence is reported through ``Fix.converged``.
    """
    anchors = _as_array([o.anchor for o in obs])
    _check_geometry(anchors)
    meas = np.array([o.range_m for o in obs], dtype=float)
    x0 = anchors.mean(axis=0) if initial_guess is None else np.array(list(initial_guess))
    return _solve(anchors, anchors, meas, False, x0, grad_tol, max_iter)


def hyperbolic_locate(
    obs: Sequence[TdoaObservation],
    initial_guess: Point2D | None = None,
    k: PropagationConstants = DEFAULT_CONSTANTS,
    *,
    grad_tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> Fix:
    """Least-squares position from TDoA values sharing one reference anchor.

    The residual surface has spurious local minima, so the solver also
    starts from rings around the anchor centroid and keeps the smallest
    residual. With exactly two observations the hyperbolas can cross twice;
    if a second exact solution exists the one nearer ``initial_guess`` (or
    the centroid) is returned and :class:`AmbiguousFixWarning` is emitted.
    """
    if len(obs) < 2:
        raise DegenerateGeometry("2D hyperbolic fix needs at least two TDoA values")
    ref = obs[0].reference
    if any(o.reference != ref for o in obs):
        raise ValueError("all TDoA observations must share the reference anchor")
    others = _as_array([o.other for o in obs])
    refs = np.repeat(_as_array([ref]), len(obs), axis=0)
    _check_geometry(np.vstack([refs[:1], others]))
    meas = np.array([o.tdoa_s * k.c for o in obs], dtype=float)
    centroid = np.vstack([refs[:1], others]).mean(axis=0)
    x0 = centroid if initial_guess is None else np.array(list(initial_guess), dtype=float)
    fix = _solve(others, refs, meas, True, x0, grad_tol, max_iter)

    # hyperbolic residuals have spurious local minima; probe further starts
    points = np.vstack([refs[:1], others])
    scale = max(float(np.ptp(points, axis=0).max()), 1.0)
    exact_tol = 1e-6 * scale
    candidates = [fix]
    for radius in (0.5, 3.0, 10.0):
        for angle in np.linspace(0.0, 2 * math.pi, 8, endpoint=False):
            start = centroid + radius * scale * np.array([math.cos(angle), math.sin(angle)])
            candidates.append(_solve(others, refs, meas, True, start, grad_tol, max_iter))
    exact = [c for c in candidates if c.residual_rms_m <= exact_tol]
    distinct: list[Fix] = []
    for c in exact:
        if all(math.dist(c.position, d.position) > 1e-3 * scale for d in distinct):
            distinct.append(c)
    if len(obs) != 2 or len(distinct) < 2:
        if fix.residual_rms_m <= exact_tol:
            return fix
        best = min(candidates, key=lambda c: c.residual_rms_m)
        return Fix(best.position, best.residual_rms_m, best.iterations, best.converged, fix.initial_rms_m)
    best = min(distinct, key=lambda c: math.dist(c.position, x0))
    warnings.warn(
        f"two positions fit the TDoA values; returning {tuple(best.position)}",
        AmbiguousFixWarning,
        stacklevel=2,
    )
    return Fix(
        best.position,
        best.residual_rms_m,
        best.iterations,
        best.converged,
        fix.initial_rms_m,
        ambiguous=True,
    )


def end_to_end(
    nodes: Sequence[Node],
    method: Method,
    schedule: Schedule = Schedule(),
    k: PropagationConstants = DEFAULT_CONSTANTS,
    rng: np.random.Generator | None = None,
    initial_guess: Point2D | None = None,
) -> Fix:
    """Measure with ``method`` against every anchor (or anchor pair) and solve.

    ToA methods range the Tag to each anchor. TDoA methods form a star of
    pairs around a reference anchor: the Mirror for Whistle, DJKM and
    DP-Whistle, otherwise the first anchor.
    """
    method = Method(method)
    tags = [n for n in nodes if n.role is Role.TAG]
    if len(tags) != 1:
        raise RoleError(f"positioning needs exactly one tag, got {len(tags)}")
    tag = tags[0]
    estimator = ESTIMATORS[method]

    if not method.is_tdoa:
        anchors = [n for n in nodes if n.role.is_anchor]
        obs = []
        for anchor in anchors:
            _, iv = simulate(method, [tag, anchor], schedule, k, rng)
            obs.append(RangeObservation(anchor.position, max(estimator(iv).value_m, 0.0)))
        return trilaterate(obs, initial_guess)

    if method.needs_mirror:
        mirrors = [n for n in nodes if n.role is Role.MIRROR]
        if len(mirrors) != 1:
            raise RoleError(f"{method.value} needs exactly one mirror, got {len(mirrors)}")
        ref = mirrors[0]
        obs = []
        for anchor in (n for n in nodes if n.role is Role.ANCHOR):
            _, iv = simulate(method, [tag, anchor, ref], schedule, k, rng)
            # estimate is d(tag, mirror) - d(tag, anchor); flip to reference the mirror
            obs.append(TdoaObservation(ref.position, anchor.position, -estimator(iv).value_s))
    else:
        anchors = [n for n in nodes if n.role.is_anchor]
        if len(anchors) < 3:
            raise DegenerateGeometry("TDoA positioning needs at least three anchors")
        ref = anchors[0]
        obs = []
        for anchor in anchors[1:]:
            _, iv = simulate(method, [tag, ref, anchor], schedule, k, rng)
            obs.append(TdoaObservation(ref.position, anchor.position, estimator(iv).value_s))
    return hyperbolic_locate(obs, initial_guess, k)
