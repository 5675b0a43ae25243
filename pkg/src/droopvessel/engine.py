"""Scenario runner: event application, integration loop, sampling, CSV export.

Runs are deterministic: a scenario always produces bit-identical output.
Time is indexed by integer step counts (t = n * dt); events snap to the next
step boundary, which is exact for the shipped scenarios (dt = 0.01 s, events
on whole deciseconds).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np

from .droop import IDENTITY_UNITS, UnitMap
from .equilibrium import ComponentEquilibrium, equilibrium_summary
from .errors import LevelRangeError, ScenarioValidationError
from .hydraulics import SimulationState, _build_state, _rk4_volumes, compiled, volume_from_level, _volume_extended
from .model import (
    Event,
    InjectVolume,
    Network,
    Scenario,
    SetBaseElevation,
    SetTankLevel,
    SetValve,
    validate,
)

BUILTIN_NAMES = ("grid", "interconnected", "microgrid")


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------

@dataclass
class TimeSeries:
    """Sampled trajectory of one run, keyed by entity id.

    ``levels_cm`` holds absolute levels for every node (tank levels are their
    fixed values); ``commanded_cm3`` is the displaced volume of each vessel's
    block at that instant (the setpoint in hydraulic units).
    """

    times_s: np.ndarray
    node_ids: tuple[str, ...]
    vessel_ids: tuple[str, ...]
    pipe_ids: tuple[str, ...]
    levels_cm: dict[str, np.ndarray]
    volumes_cm3: dict[str, np.ndarray]
    exited_cm3: dict[str, np.ndarray]
    commanded_cm3: dict[str, np.ndarray]
    flows_cm3_s: dict[str, np.ndarray]
    event_markers: tuple[tuple[float, str], ...]
    final_network: Network
    final_state: SimulationState

    @property
    def sample_count(self) -> int:
        return len(self.times_s)


@dataclass(frozen=True)
class ElectricalView:
    """The same trajectory read through the unit map as grid quantities."""

    times_s: np.ndarray
    frequency_hz: dict[str, np.ndarray]
    power_out: dict[str, np.ndarray]
    setpoint: dict[str, np.ndarray]
    tracking_error: dict[str, np.ndarray]
    flows: dict[str, np.ndarray]


def electrical_view(series: TimeSeries, unit_map: UnitMap = IDENTITY_UNITS) -> ElectricalView:
    """Map a hydraulic trajectory to the electrical domain sample-for-sample."""
    freq = {n: unit_map.hz_per_cm * arr + unit_map.hz_offset for n, arr in series.levels_cm.items()}
    power = {v: unit_map.w_per_cm3 * arr for v, arr in series.exited_cm3.items()}
    setp = {v: unit_map.w_per_cm3 * arr for v, arr in series.commanded_cm3.items()}
    err = {v: setp[v] - power[v] for v in setp}
    flows = {p: unit_map.w_per_cm3 * arr for p, arr in series.flows_cm3_s.items()}
    return ElectricalView(
        times_s=series.times_s,
        frequency_hz=freq,
        power_out=power,
        setpoint=setp,
        tracking_error=err,
        flows=flows,
    )


# ---------------------------------------------------------------------------
# Stepping core (shared by batch runs and live sessions)
# ---------------------------------------------------------------------------

class Simulation:
    """Mutable cursor over one scenario: applies events and integrates.

    Batch runs and live sessions share this; the live path may suppress the
    scripted events (`include_events=False`) so a human can perform them.
    """

    def __init__(self, scenario: Scenario, include_events: bool = True):
        violations = validate(scenario)
        if violations:
            raise ScenarioValidationError(violations)
        self.scenario = scenario
        self.network = scenario.network.normalized()
        self.dt = scenario.timestep_s
        self.n = 0
        self.total_steps = max(1, round(scenario.duration_s / self.dt))
        self._comp = compiled(self.network)
        self._volumes = np.array(
            [volume_from_level(v.profile, v.initial_level_cm) for v in self.network.vessels]
        )
        self._injected = np.zeros_like(self._volumes)
        self._initial = self._volumes.copy()
        self._check_bounds()

        events = scenario.sorted_events() if include_events else ()
        self._due: list[tuple[int, Event]] = [
            (self._event_step(e.time_s), e) for e in events if e.time_s <= scenario.duration_s
        ]
        self._next_event = 0
        self.applied_events: list[tuple[float, str]] = []

    # -- time ----------------------------------------------------------------

    @property
    def time_s(self) -> float:
        return self.n * self.dt

    def _event_step(self, time_s: float) -> int:
        # snap to the next step boundary; exact when time is a step multiple
        return math.ceil(time_s / self.dt - 1e-9)

    # -- event handling -------------------------------------------------------

    def apply_due_events(self) -> None:
        while self._next_event < len(self._due) and self._due[self._next_event][0] <= self.n:
            _, event = self._due[self._next_event]
            self._next_event += 1
            self.apply_event(event)

    def apply_event(self, event: Event) -> None:
        """Apply one event at the current step boundary."""
        if isinstance(event, SetBaseElevation):
            self.network = self.network.with_base_elevation(event.node, event.elevation_cm)
            self._comp = compiled(self.network)
        elif isinstance(event, SetValve):
            self.network = self.network.with_valve(event.pipe, event.open)
            self._comp = compiled(self.network)
        elif isinstance(event, SetTankLevel):
            self.network = self.network.with_tank_level(event.tank, event.level_cm)
            self._comp = compiled(self.network)
        elif isinstance(event, InjectVolume):
            i = self._comp.vessel_ids.index(event.node)
            self._volumes[i] += event.volume_cm3
            self._injected[i] += event.volume_cm3
            self._check_bounds()
        else:  # pragma: no cover
            raise TypeError(f"unknown event type {type(event).__name__}")
        self.applied_events.append((self.time_s, event.describe()))

    # -- integration ----------------------------------------------------------

    def _check_bounds(self) -> None:
        levels = self._comp.levels(self._volumes)
        for i, lvl in enumerate(levels):
            if lvl < 0.0 or lvl > self._comp.max_heights[i]:
                raise LevelRangeError(
                    self._comp.vessel_ids[i], self.time_s, float(lvl), float(self._comp.max_heights[i])
                )

    def step_once(self) -> None:
        self._volumes = _rk4_volumes(self._comp, self._volumes, self.dt)
        self.n += 1
        self._check_bounds()

    def advance_steps(self, count: int) -> None:
        """Apply due scripted events and integrate, one boundary at a time."""
        for _ in range(count):
            self.apply_due_events()
            self.step_once()
        self.apply_due_events()

    # -- snapshots -------------------------------------------------------------

    def state(self) -> SimulationState:
        return _build_state(
            self.network, self.time_s, self._volumes, self._injected, self._initial
        )

    def sample_arrays(self):
        """Raw per-sample arrays (levels per node, volumes, exited, commanded, flows)."""
        comp = self._comp
        levels = comp.levels(self._volumes)
        node_levels = np.concatenate((comp.z + levels, comp.tank_levels))
        exited = self._initial + self._injected - self._volumes
        commanded = np.array(
            [_volume_extended(v.profile, v.base_elevation_cm) for v in self.network.vessels]
        )
        flows = comp.flows(self._volumes)
        return node_levels, self._volumes.copy(), exited, commanded, flows

    def equilibria(self) -> list[ComponentEquilibrium]:
        return equilibrium_summary(self.network, self.state())


# ---------------------------------------------------------------------------
# Batch run
# ---------------------------------------------------------------------------

def run(scenario: Scenario) -> TimeSeries:
    """Run a scenario start to finish and record the sampled trajectory.

    Samples land on integration-step boundaries every ``sample_interval``.
    The sample at an event's boundary reflects the post-event state; the one
    before it is purely pre-event.
    """
    sim = Simulation(scenario)
    stride = max(1, round(scenario.sample_interval_s / scenario.timestep_s))

    times: list[float] = []
    rows_levels: list[np.ndarray] = []
    rows_volumes: list[np.ndarray] = []
    rows_exited: list[np.ndarray] = []
    rows_commanded: list[np.ndarray] = []
    rows_flows: list[np.ndarray] = []

    def record() -> None:
        node_levels, volumes, exited, commanded, flows = sim.sample_arrays()
        times.append(sim.time_s)
        rows_levels.append(node_levels)
        rows_volumes.append(volumes)
        rows_exited.append(exited)
        rows_commanded.append(commanded)
        rows_flows.append(flows)

    while True:
        sim.apply_due_events()
        if sim.n % stride == 0:
            record()
        if sim.n >= sim.total_steps:
            break
        sim.step_once()

    comp = sim._comp
    levels = np.array(rows_levels)
    volumes = np.array(rows_volumes)
    exited = np.array(rows_exited)
    commanded = np.array(rows_commanded)
    flows = np.array(rows_flows)
    return TimeSeries(
        times_s=np.array(times),
        node_ids=comp.node_ids,
        vessel_ids=comp.vessel_ids,
        pipe_ids=comp.pipe_ids,
        levels_cm={n: levels[:, i] for i, n in enumerate(comp.node_ids)},
        volumes_cm3={v: volumes[:, i] for i, v in enumerate(comp.vessel_ids)},
        exited_cm3={v: exited[:, i] for i, v in enumerate(comp.vessel_ids)},
        commanded_cm3={v: commanded[:, i] for i, v in enumerate(comp.vessel_ids)},
        flows_cm3_s={p: flows[:, i] for i, p in enumerate(comp.pipe_ids)},
        event_markers=tuple(sim.applied_events),
        final_network=sim.network,
        final_state=sim.state(),
    )


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

def builtin_scenario(name: str) -> Scenario:
    """One of the shipped demonstrations: ``grid`` (one vessel against an
    infinite tank), ``interconnected`` (four-vessel ring), or ``microgrid``
    (bulk-grid vessel plus a three-vessel island)."""
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown scenario '{name}'; choose from {', '.join(BUILTIN_NAMES)}")
    from .scenario_io import scenario_from_dict  # local import avoids a cycle

    text = resources.files("droopvessel").joinpath(f"scenarios/demo_{name}.json").read_text()
    return scenario_from_dict(json.loads(text), name=name)


def builtin_scenario_text(name: str) -> str:
    """Raw JSON of a shipped scenario (for export or inspection)."""
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown scenario '{name}'; choose from {', '.join(BUILTIN_NAMES)}")
    return resources.files("droopvessel").joinpath(f"scenarios/demo_{name}.json").read_text()


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    s = f"{x:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def export_csv(
    series: TimeSeries,
    domain: str = "hydraulic",
    unit_map: UnitMap = IDENTITY_UNITS,
) -> str:
    """Render a trajectory as CSV with fixed 9-decimal formatting.

    Hydraulic columns: ``t, <node>.level, <vessel>.exited_volume, <pipe>.flow``.
    The electrical domain applies the unit map and renames the value columns
    to ``.freq_hz`` / ``.power_out``.
    """
    if domain not in ("hydraulic", "electrical"):
        raise ValueError(f"unknown domain '{domain}'")
    if domain == "hydraulic":
        header = (
            ["t"]
            + [f"{n}.level" for n in series.node_ids]
            + [f"{v}.exited_volume" for v in series.vessel_ids]
            + [f"{p}.flow" for p in series.pipe_ids]
        )
        cols = (
            [series.times_s]
            + [series.levels_cm[n] for n in series.node_ids]
            + [series.exited_cm3[v] for v in series.vessel_ids]
            + [series.flows_cm3_s[p] for p in series.pipe_ids]
        )
    else:
        view = electrical_view(series, unit_map)
        header = (
            ["t"]
            + [f"{n}.freq_hz" for n in series.node_ids]
            + [f"{v}.power_out" for v in series.vessel_ids]
            + [f"{p}.flow" for p in series.pipe_ids]
        )
        cols = (
            [series.times_s]
            + [view.frequency_hz[n] for n in series.node_ids]
            + [view.power_out[v] for v in series.vessel_ids]
            + [view.flows[p] for p in series.pipe_ids]
        )
    lines = [",".join(header)]
    for i in range(len(series.times_s)):
        lines.append(",".join(_fmt(float(c[i])) for c in cols))
    return "\n".join(lines) + "\n"


def event_markers_json(series: TimeSeries) -> str:
    """Sidecar list of applied events as JSON: [{"time_s": ..., "event": ...}]."""
    return json.dumps(
        [{"time_s": t, "event": desc} for t, desc in series.event_markers], indent=2
    ) + "\n"
