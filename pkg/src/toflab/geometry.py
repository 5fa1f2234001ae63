"""Node placement and the time <-> distance conversion."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .timebase import PS_PER_S, ClockModel

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


class Role(str, enum.Enum):
    ANCHOR = "anchor"
    TAG = "tag"
    MIRROR = "mirror"

    @property
    def is_anchor(self) -> bool:
        # a Mirror is an Anchor that also retransmits
        return self is not Role.TAG


@dataclass(frozen=True)
class Node:
    id: str
    role: Role
    position: Point2D
    clock: ClockModel = field(default_factory=ClockModel)

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        if self.clock.clock_id != self.id:
            # the clock is identified by its node
            object.__setattr__(
                self,
                "clock",
                ClockModel(self.clock.drift, self.clock.jitter_sigma_ps, self.id),
            )


@dataclass(frozen=True)
class PropagationConstants:
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("propagation speed must be positive")


DEFAULT_CONSTANTS = PropagationConstants()


def distance(a: Point2D, b: Point2D) -> float:
    return math.hypot(b.x - a.x, b.y - a.y)


def tof(a: Point2D, b: Point2D, k: PropagationConstants = DEFAULT_CONSTANTS) -> int:
    """Propagation delay between two points, rounded to whole picoseconds."""
    return round(distance(a, b) / k.c * PS_PER_S)


def true_tdoa(
    tag: Point2D, a: Point2D, b: Point2D, k: PropagationConstants = DEFAULT_CONSTANTS
) -> float:
    """Arrival-time difference ``(|tag-b| - |tag-a|) / c`` in seconds."""
    return (distance(tag, b) - distance(tag, a)) / k.c
