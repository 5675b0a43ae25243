"""Live steerable simulation session behind the wire protocol.

A session owns one :class:`Simulation` and advances it against wall time:
``advance(elapsed)`` converts elapsed wall seconds to integration steps at
the current speed multiplier and returns a frame. Commands land at step
boundaries in arrival order; scripted scenario events are suppressed by
default so the human at the UI performs them instead (pass
``include_events=True`` in a reset command to watch a demo hands-off).
"""

from __future__ import annotations

from typing import Any

from .engine import Simulation, builtin_scenario
from .errors import DroopVesselError, ScenarioParseError
from .model import InjectVolume, Scenario, SetBaseElevation, SetTankLevel, SetValve
from .scenario_io import scenario_from_dict

SPEED_MIN = 0.1
SPEED_MAX = 100.0
FRAME_HZ = 20.0
EVENT_LOG_TAIL = 20
# 4x the steps a healthy tick needs at top speed; keeps worst-case tick work small
MAX_STEPS_PER_TICK = 2_000


class LiveSession:
    """Protocol-level session state machine; transport-agnostic.

    ``handle(message) -> list of reply messages`` and
    ``frame() -> frame message`` produce plain dicts ready for JSON.
    """

    def __init__(self):
        self.sim: Simulation | None = None
        self.scenario_name = ""
        self.paused = False
        self.speed = 1.0
        self._carry_s = 0.0

    # -- command handling ---------------------------------------------------

    def handle(self, msg: Any) -> list[dict]:
        if not isinstance(msg, dict) or "type" not in msg:
            return [_error("message must be an object with a 'type' field")]
        kind = msg["type"]
        handler = getattr(self, f"_cmd_{kind}", None)
        if handler is None:
            return [_error(f"unknown command type '{kind}'")]
        try:
            return handler(msg)
        except (DroopVesselError, KeyError, ValueError, TypeError) as exc:
            return [_error(str(exc))]

    def _cmd_reset(self, msg: dict) -> list[dict]:
        if "scenario" in msg:
            name = str(msg["scenario"])
            scenario = builtin_scenario(name)
        elif "scenario_inline" in msg:
            scenario = scenario_from_dict(msg["scenario_inline"], name="inline")
            name = scenario.name
        else:
            raise ScenarioParseError("reset needs 'scenario' (builtin name) or 'scenario_inline'")
        self.sim = Simulation(scenario, include_events=bool(msg.get("include_events", False)))
        self.scenario_name = name
        self.paused = False
        self._carry_s = 0.0
        return [self.scenario_message(), self.frame()]

    def _cmd_set_block(self, msg: dict) -> list[dict]:
        sim = self._require_sim()
        sim.apply_event(
            SetBaseElevation(time_s=sim.time_s, node=str(msg["node"]),
                             elevation_cm=float(msg["elevation_cm"]))
        )
        return []

    def _cmd_set_valve(self, msg: dict) -> list[dict]:
        sim = self._require_sim()
        sim.apply_event(SetValve(time_s=sim.time_s, pipe=str(msg["pipe"]), open=bool(msg["open"])))
        return []

    def _cmd_inject(self, msg: dict) -> list[dict]:
        sim = self._require_sim()
        sim.apply_event(
            InjectVolume(time_s=sim.time_s, node=str(msg["node"]), volume_cm3=float(msg["volume_cm3"]))
        )
        return []

    def _cmd_set_tank_level(self, msg: dict) -> list[dict]:
        sim = self._require_sim()
        sim.apply_event(
            SetTankLevel(time_s=sim.time_s, tank=str(msg["tank"]), level_cm=float(msg["level_cm"]))
        )
        return []

    def _cmd_pause(self, msg: dict) -> list[dict]:
        self._require_sim()
        self.paused = True
        return []

    def _cmd_resume(self, msg: dict) -> list[dict]:
        self._require_sim()
        self.paused = False
        return []

    def _cmd_set_speed(self, msg: dict) -> list[dict]:
        self._require_sim()
        speed = float(msg["multiplier"])
        if not SPEED_MIN <= speed <= SPEED_MAX:
            raise ValueError(f"speed must be within [{SPEED_MIN:g}, {SPEED_MAX:g}], got {speed:g}")
        self.speed = speed
        return []

    def _require_sim(self) -> Simulation:
        if self.sim is None:
            raise ScenarioParseError("no scenario loaded; send a reset first")
        return self.sim

    # -- advancement ----------------------------------------------------------

    def advance(self, elapsed_wall_s: float) -> dict | None:
        """Advance by elapsed wall time (scaled by speed) and return a frame.

        Returns None before the first reset. If the simulation overflows, the
        session pauses and reports an error frame instead of dying.
        """
        if self.sim is None:
            return None
        if not self.paused:
            # a stalled event loop must not build up catch-up debt: drop any
            # budget beyond one full tick's worth of steps
            budget = min(
                self._carry_s + elapsed_wall_s * self.speed,
                MAX_STEPS_PER_TICK * self.sim.dt,
            )
            steps = int(budget / self.sim.dt)
            self._carry_s = budget - steps * self.sim.dt
            try:
                self.sim.advance_steps(steps)
            except DroopVesselError as exc:
                self.paused = True
                return _error(str(exc))
        return self.frame()

    # -- messages ---------------------------------------------------------------

    def scenario_message(self) -> dict:
        """Static shape of the loaded scenario, sent once per reset."""
        sim = self._require_sim()
        net = sim.network
        return {
            "type": "scenario",
            "name": self.scenario_name,
            "duration_s": sim.scenario.duration_s,
            "nodes": [
                {
                    "id": v.id,
                    "kind": "vessel",
                    "profile": _profile_summary(v),
                    "max_height_cm": v.max_height_cm,
                }
                for v in net.vessels
            ]
            + [
                {"id": t.id, "kind": "tank", "fixed_level_cm": t.fixed_level_cm}
                for t in net.tanks
            ],
            "pipes": [{"id": p.id, "ends": list(p.ends)} for p in net.pipes],
        }

    def frame(self) -> dict:
        sim = self._require_sim()
        node_levels, volumes, exited, commanded, flows = sim.sample_arrays()
        net = sim.network
        node_ids = sim._comp.node_ids
        vessel_ids = sim._comp.vessel_ids
        pipe_ids = sim._comp.pipe_ids
        levels = {n: float(x) for n, x in zip(node_ids, node_levels)}
        exited_d = {v: float(x) for v, x in zip(vessel_ids, exited)}
        commanded_d = {v: float(x) for v, x in zip(vessel_ids, commanded)}
        return {
            "type": "frame",
            "t": sim.time_s,
            "paused": self.paused,
            "speed": self.speed,
            "levels": levels,
            "volumes": {v: float(x) for v, x in zip(vessel_ids, volumes)},
            "exited": exited_d,
            "commanded": commanded_d,
            "flows": {p: float(x) for p, x in zip(pipe_ids, flows)},
            "base_elevation": {v.id: v.base_elevation_cm for v in net.vessels},
            "valves": {p.id: p.valve_open for p in net.pipes},
            "electrical": {
                # identity unit map: same numbers, electrical labels
                "freq_hz": levels,
                "power_out": exited_d,
                "setpoint_w": commanded_d,
            },
            "events": [
                {"t": t, "desc": desc} for t, desc in sim.applied_events[-EVENT_LOG_TAIL:]
            ],
        }


def _profile_summary(v) -> dict:
    from .scenario_io import _profile_to_dict

    return _profile_to_dict(v.profile)


def _error(detail: str) -> dict:
    return {"type": "error", "detail": detail}
