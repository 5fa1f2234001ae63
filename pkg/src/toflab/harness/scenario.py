"""Scenario documents: one JSON object per file, strict schema, SI units."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import jsonschema

from ..errors import RoleError, ScenarioError, ScheduleError
from ..geometry import SPEED_OF_LIGHT, Node, Point2D, PropagationConstants, Role
from ..protocols import Method, Schedule, bind_roles, simulate
from ..timebase import ClockModel, IdealInstant, PpmDrift


class DriftMode(str, enum.Enum):
    FIXED = "fixed"
    UNIFORM = "uniform"
    CORNERS = "corners"


_NUMBER = {"type": "number"}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "toflab scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["method", "nodes"],
    "properties": {
        "method": {"enum": [m.value for m in Method]},
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"c": {"type": "number", "exclusiveMinimum": 0}},
        },
        "nodes": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "role", "position"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "role": {"enum": [r.value for r in Role]},
                    "position": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
                    "drift_ppm": {"type": "number", "minimum": -1000, "maximum": 1000},
                    "jitter_ps": {"type": "number", "minimum": 0},
                },
            },
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_start_s": {"type": "number", "minimum": 0},
                "reply_delay_a_s": {"type": "number", "exclusiveMinimum": 0},
                "reply_delay_b_s": {"type": "number", "exclusiveMinimum": 0},
                "pulse_gap_s": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "eps_max_ppm": {"type": "number", "minimum": 0, "maximum": 1000},
        "drift_mode": {"enum": [d.value for d in DriftMode]},
    },
}


@dataclass(frozen=True)
class Scenario:
    method: Method
    nodes: tuple[Node, ...]
    schedule: Schedule = Schedule()
    constants: PropagationConstants = PropagationConstants()
    trials: int = 1
    seed: int | None = None
    eps_max: PpmDrift = PpmDrift.from_ppm(20)
    drift_mode: DriftMode = DriftMode.FIXED

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]


def _path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path) or "<root>"


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded scenario document and build the :class:`Scenario`."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise ScenarioError(f"schema violation: {first.message}", field=_path(first))

    eps_max = PpmDrift.from_ppm(doc.get("eps_max_ppm", 20))
    mode = DriftMode(doc.get("drift_mode", DriftMode.FIXED.value))
    seen: set[str] = set()
    nodes = []
    for i, raw in enumerate(doc["nodes"]):
        if raw["id"] in seen:
            raise ScenarioError(f"duplicate node id {raw['id']!r}", field=f"nodes.{i}.id")
        seen.add(raw["id"])
        drift = PpmDrift.from_ppm(raw.get("drift_ppm", 0))
        if mode is DriftMode.FIXED and abs(drift.micro_ppm) > eps_max.micro_ppm:
            raise ScenarioError(
                f"|drift| {drift.ppm} ppm exceeds eps_max {eps_max.ppm} ppm",
                field=f"nodes.{i}.drift_ppm",
            )
        try:
            position = Point2D(*raw["position"])
        except ValueError as exc:
            raise ScenarioError(str(exc), field=f"nodes.{i}.position") from None
        clock = ClockModel(drift, float(raw.get("jitter_ps", 0.0)), raw["id"])
        nodes.append(Node(raw["id"], Role(raw["role"]), position, clock))

    method = Method(doc["method"])
    try:
        bind_roles(method, nodes)
    except RoleError as exc:
        raise ScenarioError(f"role requirements not met: {exc}", field="nodes") from None

    sched = doc.get("schedule", {})
    try:
        schedule = Schedule(
            t_start=IdealInstant.from_seconds(sched.get("t_start_s", 0.0)),
            reply_delay_a=sched.get("reply_delay_a_s", 1e-3),
            reply_delay_b=sched.get("reply_delay_b_s", 1e-3),
            pulse_gap=sched.get("pulse_gap_s", 5e-3),
        )
    except ScheduleError as exc:
        raise ScenarioError(str(exc), field="schedule") from None
    constants = PropagationConstants(doc.get("constants", {}).get("c", SPEED_OF_LIGHT))

    seed = doc.get("seed")
    jittered = any(n.clock.jitter_sigma_ps > 0 for n in nodes)
    if seed is None and (mode is DriftMode.UNIFORM or jittered):
        raise ScenarioError("a seed is required for random drifts or jitter", field="seed")

    # ordering constraints depend on geometry; check them with a noise-free dry run
    try:
        simulate(method, [Node(n.id, n.role, n.position) for n in nodes], schedule, constants)
    except ScheduleError as exc:
        raise ScenarioError(str(exc), field="schedule") from None

    return Scenario(
        method=method,
        nodes=tuple(nodes),
        schedule=schedule,
        constants=constants,
        trials=doc.get("trials", 1),
        seed=seed,
        eps_max=eps_max,
        drift_mode=mode,
    )


def load_scenario(source: str | Path | IO[str]) -> Scenario:
    """Read and validate a scenario from a path or an open text stream."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_scenario(doc)
