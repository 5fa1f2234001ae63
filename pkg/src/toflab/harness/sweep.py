"""Parameter sweeps of the worst-case bound against evaluated drift errors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from ..analysis import FormulaTerms, drift_error_samples, worst_case_bound
from ..geometry import PropagationConstants
from ..protocols import Method
from ..timebase import PpmDrift

SWEEPABLE = ("t1", "d_a", "d_b", "d_ab", "tdoa", "pulse_gap", "eps_ppm")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    bound_m: float
    corner_max_m: float
    random_max_m: float


def sweep(
    method: Method,
    param: str,
    values: np.ndarray,
    terms: FormulaTerms,
    eps_max: PpmDrift,
    k: PropagationConstants,
    draws: int = 0,
    seed: int = 0,
) -> list[SweepPoint]:
    """Evaluate the bound and the largest drift error at each parameter value.

    ``corner_max_m`` is the largest error over the sign corners; with
    ``draws > 0`` also the largest over that many uniform drift draws.
    """
    if param not in SWEEPABLE:
        raise ValueError(f"cannot sweep {param!r}; choose from {SWEEPABLE}")
    method = Method(method)
    rng = np.random.default_rng(seed)
    unit = rng.uniform(-1.0, 1.0, size=(draws, 2))
    points = []
    for value in values:
        eps = eps_max
        t = terms
        if param == "eps_ppm":
            eps = PpmDrift.from_ppm(float(value))
        else:
            t = replace(terms, **{param: float(value)})
        e = float(eps.epsilon)
        corner_eps = np.array(list(itertools.product((e, -e), repeat=2)))
        corner = np.abs(drift_error_samples(method, t, corner_eps)).max() * k.c
        rand = np.abs(drift_error_samples(method, t, unit * e)).max() * k.c if draws else float("nan")
        bound = worst_case_bound(method, t, eps, k).worst_error_m
        points.append(SweepPoint(float(value), bound, float(corner), float(rand)))
    return points
