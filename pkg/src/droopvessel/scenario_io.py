"""Scenario file loading and saving (JSON).

Hydraulic files describe the network directly; electrical files
(``"domain": "electrical"``) describe a grid spec that is converted through
the droop analogy on load. See docs/scenario.schema.json for the shape.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .droop import (
    DroopCurve,
    GridLine,
    GridSource,
    GridSpec,
    InfiniteBus,
    UnitMap,
    IDENTITY_UNITS,
    grid_to_vessels,
    setpoint_elevation_cm,
)
from .errors import ScenarioParseError
from .model import (
    AreaProfile,
    Event,
    InfiniteTank,
    InjectVolume,
    Network,
    PiecewiseConstant,
    Pipe,
    ProfileSegment,
    Sampled,
    Scenario,
    SetBaseElevation,
    SetTankLevel,
    SetValve,
    Uniform,
    Vessel,
    DEFAULT_MAX_HEIGHT_CM,
)


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ScenarioParseError(f"{where}: missing key '{key}'")
    return obj[key]


def _profile_from_dict(obj: dict, where: str) -> AreaProfile:
    kind = _require(obj, "kind", where)
    if kind == "uniform":
        return Uniform(area_cm2=float(_require(obj, "area_cm2", where)))
    if kind == "piecewise":
        segs = []
        for i, seg in enumerate(_require(obj, "segments", where)):
            segs.append(
                ProfileSegment(
                    lo_cm=float(_require(seg, "from_cm", f"{where} segment {i}")),
                    hi_cm=float(_require(seg, "to_cm", f"{where} segment {i}")),
                    area_cm2=float(_require(seg, "area_cm2", f"{where} segment {i}")),
                )
            )
        return PiecewiseConstant(segments=tuple(segs))
    if kind == "sampled":
        pts = []
        for i, pt in enumerate(_require(obj, "points", where)):
            pts.append(
                (
                    float(_require(pt, "height_cm", f"{where} point {i}")),
                    float(_require(pt, "area_cm2", f"{where} point {i}")),
                )
            )
        return Sampled(points=tuple(pts))
    raise ScenarioParseError(f"{where}: unknown profile kind '{kind}'")


def _profile_to_dict(profile: AreaProfile) -> dict:
    if isinstance(profile, Uniform):
        return {"kind": "uniform", "area_cm2": profile.area_cm2}
    if isinstance(profile, PiecewiseConstant):
        return {
            "kind": "piecewise",
            "segments": [
                {"from_cm": s.lo_cm, "to_cm": s.hi_cm, "area_cm2": s.area_cm2}
                for s in profile.segments
            ],
        }
    return {
        "kind": "sampled",
        "points": [{"height_cm": h, "area_cm2": a} for h, a in profile.points],
    }


def _network_from_dict(obj: dict) -> Network:
    vessels, tanks = [], []
    for i, node in enumerate(_require(obj, "nodes", "network")):
        where = f"network node {i}"
        node_id = str(_require(node, "id", where))
        kind = _require(node, "kind", where)
        if kind == "vessel":
            vessels.append(
                Vessel(
                    id=node_id,
                    profile=_profile_from_dict(_require(node, "profile", where), f"{where} profile"),
                    base_elevation_cm=float(node.get("base_elevation_cm", 0.0)),
                    initial_level_cm=float(_require(node, "initial_level_cm", where)),
                    max_height_cm=float(node.get("max_height_cm", DEFAULT_MAX_HEIGHT_CM)),
                )
            )
        elif kind == "tank":
            tanks.append(InfiniteTank(id=node_id, fixed_level_cm=float(_require(node, "fixed_level_cm", where))))
        else:
            raise ScenarioParseError(f"{where}: unknown node kind '{kind}'")
    pipes = []
    for i, pipe in enumerate(obj.get("pipes", [])):
        where = f"network pipe {i}"
        ends = _require(pipe, "ends", where)
        if not isinstance(ends, list) or len(ends) != 2:
            raise ScenarioParseError(f"{where}: 'ends' must be a two-element list")
        pipes.append(
            Pipe(
                id=str(_require(pipe, "id", where)),
                ends=(str(ends[0]), str(ends[1])),
                conductance=float(pipe.get("conductance", 1.0)),
                valve_open=bool(pipe.get("valve_open", True)),
            )
        )
    return Network(vessels=tuple(vessels), tanks=tuple(tanks), pipes=tuple(pipes)).normalized()


_HYDRAULIC_ACTIONS = ("set_base_elevation", "set_valve", "inject_volume", "set_tank_level")


def _event_from_dict(obj: dict, i: int) -> Event:
    where = f"event {i}"
    t = float(_require(obj, "time_s", where))
    action = _require(obj, "action", where)
    if action == "set_base_elevation":
        return SetBaseElevation(time_s=t, node=str(_require(obj, "target", where)),
                                elevation_cm=float(_require(obj, "value_cm", where)))
    if action == "set_valve":
        return SetValve(time_s=t, pipe=str(_require(obj, "target", where)),
                        open=bool(_require(obj, "open", where)))
    if action == "inject_volume":
        return InjectVolume(time_s=t, node=str(_require(obj, "target", where)),
                            volume_cm3=float(_require(obj, "value_cm3", where)))
    if action == "set_tank_level":
        return SetTankLevel(time_s=t, tank=str(_require(obj, "target", where)),
                            level_cm=float(_require(obj, "value_cm", where)))
    raise ScenarioParseError(f"{where}: unknown action '{action}'")


def _event_to_dict(e: Event) -> dict:
    if isinstance(e, SetBaseElevation):
        return {"time_s": e.time_s, "action": "set_base_elevation", "target": e.node, "value_cm": e.elevation_cm}
    if isinstance(e, SetValve):
        return {"time_s": e.time_s, "action": "set_valve", "target": e.pipe, "open": e.open}
    if isinstance(e, InjectVolume):
        return {"time_s": e.time_s, "action": "inject_volume", "target": e.node, "value_cm3": e.volume_cm3}
    return {"time_s": e.time_s, "action": "set_tank_level", "target": e.tank, "value_cm": e.level_cm}


# ---------------------------------------------------------------------------
# Electrical domain
# ---------------------------------------------------------------------------

def _unit_map_from_dict(obj: dict | None) -> UnitMap:
    if not obj:
        return IDENTITY_UNITS
    return UnitMap(
        hz_per_cm=float(obj.get("hz_per_cm", 1.0)),
        hz_offset=float(obj.get("hz_offset", 0.0)),
        w_per_cm3=float(obj.get("w_per_cm3", 1.0)),
    )


def _curve_from_dict(obj: dict, where: str) -> DroopCurve:
    pts = tuple(
        (float(p[0]), float(p[1])) for p in _require(obj, "points", where)
    )
    try:
        return DroopCurve(points=pts, tag=str(obj.get("tag", "sampled")))
    except ValueError as exc:
        raise ScenarioParseError(f"{where}: {exc}") from exc


def _grid_from_dict(obj: dict) -> GridSpec:
    sources = []
    for i, src in enumerate(_require(obj, "sources", "grid")):
        where = f"grid source {i}"
        curve = src.get("curve")
        try:
            sources.append(
                GridSource(
                    id=str(_require(src, "id", where)),
                    f_nom_hz=float(src.get("f_nom_hz", 60.0)),
                    m_p_hz_per_w=(
                        float(src["droop_slope_hz_per_w"]) if "droop_slope_hz_per_w" in src else None
                    ),
                    curve=_curve_from_dict(curve, f"{where} curve") if curve else None,
                    p_ref_w=float(src.get("p_ref_w", 0.0)),
                )
            )
        except ValueError as exc:
            raise ScenarioParseError(f"{where}: {exc}") from exc
    buses = tuple(
        InfiniteBus(id=str(_require(b, "id", f"grid bus {i}")), frequency_hz=float(b.get("frequency_hz", 60.0)))
        for i, b in enumerate(obj.get("buses", []))
    )
    lines = []
    for i, line in enumerate(obj.get("lines", [])):
        where = f"grid line {i}"
        ends = _require(line, "ends", where)
        lines.append(
            GridLine(
                id=str(_require(line, "id", where)),
                ends=(str(ends[0]), str(ends[1])),
                coupling=float(line.get("coupling", 1.0)),
                breaker_closed=bool(line.get("breaker_closed", True)),
            )
        )
    return GridSpec(sources=tuple(sources), buses=buses, lines=tuple(lines))


def _electrical_event(obj: dict, i: int, net: Network, units: UnitMap) -> Event:
    where = f"event {i}"
    t = float(_require(obj, "time_s", where))
    action = _require(obj, "action", where)
    if action == "set_setpoint":
        target = str(_require(obj, "target", where))
        p_ref = float(_require(obj, "value_w", where))
        try:
            vessel = net.vessel(target)
        except KeyError as exc:
            raise ScenarioParseError(f"{where}: unknown source '{target}'") from exc
        return SetBaseElevation(
            time_s=t, node=target, elevation_cm=setpoint_elevation_cm(vessel.profile, p_ref, units)
        )
    if action == "set_breaker":
        return SetValve(time_s=t, pipe=str(_require(obj, "target", where)),
                        open=bool(_require(obj, "closed", where)))
    if action == "set_bus_frequency":
        return SetTankLevel(time_s=t, tank=str(_require(obj, "target", where)),
                            level_cm=units.freq_to_level(float(_require(obj, "value_hz", where))))
    if action == "inject_energy":
        return InjectVolume(time_s=t, node=str(_require(obj, "target", where)),
                            volume_cm3=units.power_to_volume(float(_require(obj, "value_ws", where))))
    if action in _HYDRAULIC_ACTIONS:  # hydraulic vocabulary still accepted
        return _event_from_dict(obj, i)
    raise ScenarioParseError(f"{where}: unknown action '{action}'")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def scenario_from_dict(obj: dict, name: str = "") -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    domain = obj.get("domain", "hydraulic")
    try:
        if domain == "hydraulic":
            network = _network_from_dict(_require(obj, "network", "scenario"))
            events = tuple(_event_from_dict(e, i) for i, e in enumerate(obj.get("events", [])))
        elif domain == "electrical":
            units = _unit_map_from_dict(obj.get("unit_map"))
            grid = _grid_from_dict(_require(obj, "grid", "scenario"))
            network = grid_to_vessels(grid, units).normalized()
            events = tuple(
                _electrical_event(e, i, network, units) for i, e in enumerate(obj.get("events", []))
            )
        else:
            raise ScenarioParseError(f"unknown domain '{domain}'")
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"scenario: {exc}") from exc
    return Scenario(
        network=network,
        events=tuple(sorted(events, key=lambda e: e.time_s)),
        duration_s=float(_require(obj, "duration_s", "scenario")),
        timestep_s=float(obj.get("timestep_s", 0.01)),
        sample_interval_s=float(obj.get("sample_interval_s", 0.1)),
        name=name or str(obj.get("name", "")),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    net = scenario.network
    nodes: list[dict] = []
    for v in net.vessels:
        nodes.append(
            {
                "id": v.id,
                "kind": "vessel",
                "profile": _profile_to_dict(v.profile),
                "base_elevation_cm": v.base_elevation_cm,
                "initial_level_cm": v.initial_level_cm,
                "max_height_cm": v.max_height_cm,
            }
        )
    for t in net.tanks:
        nodes.append({"id": t.id, "kind": "tank", "fixed_level_cm": t.fixed_level_cm})
    out: dict = {
        "network": {
            "nodes": nodes,
            "pipes": [
                {"id": p.id, "ends": list(p.ends), "conductance": p.conductance, "valve_open": p.valve_open}
                for p in net.pipes
            ],
        },
        "events": [_event_to_dict(e) for e in scenario.events],
        "duration_s": scenario.duration_s,
        "timestep_s": scenario.timestep_s,
        "sample_interval_s": scenario.sample_interval_s,
    }
    if scenario.name:
        out["name"] = scenario.name
    return out


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(obj, name=path.stem)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
