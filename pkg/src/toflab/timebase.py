"""Ideal timeline and drift-corrupted device clocks.

Every timestamp a protocol ever sees comes out of :func:`read_clock`. Time is
kept in integer picoseconds; a clock with rate error ``eps`` reads
``t * (1 + eps)`` rounded half-to-even, evaluated with exact integer
arithmetic so results are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ClockMismatchError, ClockOverflowError

PS_PER_S = 10**12
MICRO_PPM_PER_PPM = 10**6
# micro-ppm -> fractional rate error: 1 micro-ppm == 1e-12
_EPS_DENOM = 10**12
MAX_ABS_MICRO_PPM = 1000 * MICRO_PPM_PER_PPM
INT64_MAX = 2**63 - 1
HORIZON_PS = 2**62


@dataclass(frozen=True, order=True)
class PpmDrift:
    """Signed clock rate error, stored as integer micro-ppm (20 ppm == 20_000_000)."""

    micro_ppm: int = 0

    def __post_init__(self):
        if not isinstance(self.micro_ppm, (int, np.integer)) or isinstance(self.micro_ppm, bool):
            raise TypeError("micro_ppm must be an integer")
        object.__setattr__(self, "micro_ppm", int(self.micro_ppm))
        if abs(self.micro_ppm) > MAX_ABS_MICRO_PPM:
            raise ValueError(f"|drift| {self.ppm} ppm exceeds the 1000 ppm sanity bound")

    @classmethod
    def from_ppm(cls, ppm: float | int | str | Fraction) -> "PpmDrift":
        """Build from a value in ppm; rounds to the nearest micro-ppm."""
        value = Fraction(ppm) * MICRO_PPM_PER_PPM
        return cls(round(value))

    @classmethod
    def from_multiplier(cls, multiplier: Fraction) -> "PpmDrift":
        """Inverse of :attr:`multiplier`; raises if it is not a whole micro-ppm."""
        micro = (Fraction(multiplier) - 1) * _EPS_DENOM
        if micro.denominator != 1:
            raise ValueError(f"multiplier {multiplier} is not a whole number of micro-ppm")
        return cls(int(micro))

    @property
    def ppm(self) -> float:
        return self.micro_ppm / MICRO_PPM_PER_PPM

    @property
    def epsilon(self) -> Fraction:
        """Fractional rate error as an exact rational."""
        return Fraction(self.micro_ppm, _EPS_DENOM)

    @property
    def multiplier(self) -> Fraction:
        """Exact ``1 + eps``."""
        return Fraction(_EPS_DENOM + self.micro_ppm, _EPS_DENOM)

    def __neg__(self) -> "PpmDrift":
        return PpmDrift(-self.micro_ppm)

    def __str__(self) -> str:
        return f"{self.ppm:+g} ppm"


ZERO_DRIFT = PpmDrift(0)


@dataclass(frozen=True, order=True)
class IdealInstant:
    """A point on the error-free timeline, integer picoseconds."""

    ps: int

    def __post_init__(self):
        object.__setattr__(self, "ps", int(self.ps))

    @classmethod
    def from_seconds(cls, seconds: float) -> "IdealInstant":
        return cls(round(Fraction(seconds) * PS_PER_S))

    def __add__(self, delta_ps: int) -> "IdealInstant":
        return IdealInstant(self.ps + int(delta_ps))

    @property
    def seconds(self) -> float:
        return self.ps / PS_PER_S


@dataclass(frozen=True)
class MeasuredTimestamp:
    """A device clock reading. Only :func:`read_clock` should create these."""

    ps: int
    clock_id: str


@dataclass(frozen=True)
class ClockModel:
    """A free-running clock with constant drift and no offset.

    ``jitter_sigma_ps`` adds Gaussian read noise and is off by default; it is an
    extension, all drift-analysis results assume it is zero.
    """

    drift: PpmDrift = ZERO_DRIFT
    jitter_sigma_ps: float = 0.0
    clock_id: str = ""

    def __post_init__(self):
        if not self.jitter_sigma_ps >= 0:
            raise ValueError("jitter_sigma_ps must be non-negative")


def read_clock(
    t: IdealInstant, clock: ClockModel, rng: np.random.Generator | None = None
) -> MeasuredTimestamp:
    """Return what ``clock`` shows at ideal time ``t``."""
    if not 0 <= t.ps < HORIZON_PS:
        raise ClockOverflowError(f"ideal time {t.ps} ps outside the scenario horizon")
    exact = Fraction(t.ps * (_EPS_DENOM + clock.drift.micro_ppm), _EPS_DENOM)
    if clock.jitter_sigma_ps > 0:
        if rng is None:
            raise ValueError("a jittered clock needs an RNG")
        exact += Fraction(float(rng.normal(0.0, clock.jitter_sigma_ps)))
    ps = round(exact)  # Fraction.__round__ is half-to-even
    if abs(ps) > INT64_MAX:
        raise ClockOverflowError(f"clock reading {ps} ps overflows 64 bits; horizon too long")
    return MeasuredTimestamp(ps, clock.clock_id)


def interval(a: MeasuredTimestamp, b: MeasuredTimestamp) -> int:
    """Signed picoseconds from reading ``a`` to reading ``b`` on one clock."""
    if a.clock_id != b.clock_id:
        raise ClockMismatchError(
            f"interval across clocks {a.clock_id!r} and {b.clock_id!r} is meaningless"
        )
    return b.ps - a.ps


def seconds_to_ps(seconds: float) -> int:
    return round(Fraction(seconds) * PS_PER_S)
