"""Network model: vessels, tanks, pipes, events, scenarios, and their validation.

All values are frozen dataclasses; nothing mutates after construction. Event
application and "what-if" edits produce new objects via the ``with_*`` helpers.

Units: lengths/levels in cm, areas in cm², volumes in cm³, conductance in
cm³/s per cm of level difference, time in s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence, Union

DEFAULT_MAX_HEIGHT_CM = 120.0
NOMINAL_LEVEL_CM = 60.0


# ---------------------------------------------------------------------------
# Area profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    """Constant cross-section; the shape behind a linear droop slope."""

    area_cm2: float

    def area_at(self, level_cm: float) -> float:
        return self.area_cm2

    @property
    def top_cm(self) -> float | None:
        return None  # unbounded; the vessel's max_height caps it


@dataclass(frozen=True)
class ProfileSegment:
    lo_cm: float
    hi_cm: float
    area_cm2: float


@dataclass(frozen=True)
class PiecewiseConstant:
    """Stepped cross-section; yields a piecewise-linear droop curve."""

    segments: tuple[ProfileSegment, ...]

    def area_at(self, level_cm: float) -> float:
        for seg in self.segments:
            if level_cm < seg.hi_cm:
                return seg.area_cm2
        return self.segments[-1].area_cm2

    @property
    def top_cm(self) -> float | None:
        return self.segments[-1].hi_cm


@dataclass(frozen=True)
class Sampled:
    """Cross-section sampled at heights, linearly interpolated between them.

    Represents smoothly curved bodies (convex droop curves). Points must
    start at height 0 and increase strictly.
    """

    points: tuple[tuple[float, float], ...]  # (height_cm, area_cm2)

    def area_at(self, level_cm: float) -> float:
        pts = self.points
        if level_cm <= pts[0][0]:
            return pts[0][1]
        for (h0, a0), (h1, a1) in zip(pts, pts[1:]):
            if level_cm <= h1:
                w = (level_cm - h0) / (h1 - h0)
                return a0 + w * (a1 - a0)
        return pts[-1][1]

    @property
    def top_cm(self) -> float | None:
        return self.points[-1][0]


AreaProfile = Union[Uniform, PiecewiseConstant, Sampled]


def profile_violations(profile: AreaProfile, owner: str) -> list["Violation"]:
    """Invariant checks shared by validate() and the loaders."""
    out: list[Violation] = []
    if isinstance(profile, Uniform):
        if not profile.area_cm2 > 0:
            out.append(Violation(owner, f"profile area must be > 0, got {profile.area_cm2}"))
    elif isinstance(profile, PiecewiseConstant):
        if not profile.segments:
            out.append(Violation(owner, "piecewise profile needs at least one segment"))
            return out
        if profile.segments[0].lo_cm != 0.0:
            out.append(Violation(owner, "piecewise segments must start at height 0"))
        prev_hi = profile.segments[0].lo_cm
        for seg in profile.segments:
            if not seg.area_cm2 > 0:
                out.append(Violation(owner, f"segment [{seg.lo_cm}, {seg.hi_cm}) area must be > 0"))
            if seg.hi_cm <= seg.lo_cm:
                out.append(Violation(owner, f"segment [{seg.lo_cm}, {seg.hi_cm}) is empty or inverted"))
            if seg.lo_cm != prev_hi:
                out.append(Violation(owner, f"segments not contiguous at height {seg.lo_cm}"))
            prev_hi = seg.hi_cm
    elif isinstance(profile, Sampled):
        pts = profile.points
        if len(pts) < 2:
            out.append(Violation(owner, "sampled profile needs at least 2 points"))
            return out
        if pts[0][0] != 0.0:
            out.append(Violation(owner, "sampled profile must start at height 0"))
        for (h0, _), (h1, _) in zip(pts, pts[1:]):
            if h1 <= h0:
                out.append(Violation(owner, f"sampled heights must increase strictly (at {h1})"))
        for h, a in pts:
            if not a > 0:
                out.append(Violation(owner, f"sampled area at height {h} must be > 0"))
    else:  # pragma: no cover - guarded by loaders
        out.append(Violation(owner, f"unknown profile type {type(profile).__name__}"))
    return out


# ---------------------------------------------------------------------------
# Nodes, pipes, network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Vessel:
    """A finite water vessel; the analog of one grid-forming source.

    ``base_elevation_cm`` is the height of the block (or hole, if negative)
    the vessel stands on; ``initial_level_cm`` is measured from the vessel's
    own base, so the absolute water level starts at base + initial level.
    """

    id: str
    profile: AreaProfile
    base_elevation_cm: float = 0.0
    initial_level_cm: float = NOMINAL_LEVEL_CM
    max_height_cm: float = DEFAULT_MAX_HEIGHT_CM


@dataclass(frozen=True)
class InfiniteTank:
    """Boundary node whose level never moves; the analog of the bulk grid."""

    id: str
    fixed_level_cm: float = NOMINAL_LEVEL_CM


@dataclass(frozen=True)
class Pipe:
    """Bottom connection between two nodes; the analog of an electric cable.

    Flow is linear in the absolute level difference: q = conductance * (Hi - Hj),
    zeroed while the valve is closed.
    """

    id: str
    ends: tuple[str, str]
    conductance: float = 1.0
    valve_open: bool = True


@dataclass(frozen=True)
class Network:
    vessels: tuple[Vessel, ...]
    tanks: tuple[InfiniteTank, ...] = ()
    pipes: tuple[Pipe, ...] = ()

    # -- lookups ------------------------------------------------------------

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vessels) + tuple(t.id for t in self.tanks)

    def vessel(self, node_id: str) -> Vessel:
        for v in self.vessels:
            if v.id == node_id:
                return v
        raise KeyError(f"no vessel '{node_id}'")

    def tank(self, node_id: str) -> InfiniteTank:
        for t in self.tanks:
            if t.id == node_id:
                return t
        raise KeyError(f"no tank '{node_id}'")

    def pipe(self, pipe_id: str) -> Pipe:
        for p in self.pipes:
            if p.id == pipe_id:
                return p
        raise KeyError(f"no pipe '{pipe_id}'")

    def has_vessel(self, node_id: str) -> bool:
        return any(v.id == node_id for v in self.vessels)

    def has_tank(self, node_id: str) -> bool:
        return any(t.id == node_id for t in self.tanks)

    # -- functional edits (events produce new networks) ----------------------

    def with_base_elevation(self, node_id: str, elevation_cm: float) -> "Network":
        self.vessel(node_id)
        vs = tuple(
            replace(v, base_elevation_cm=elevation_cm) if v.id == node_id else v
            for v in self.vessels
        )
        return replace(self, vessels=vs)

    def with_valve(self, pipe_id: str, open_: bool) -> "Network":
        self.pipe(pipe_id)
        ps = tuple(replace(p, valve_open=open_) if p.id == pipe_id else p for p in self.pipes)
        return replace(self, pipes=ps)

    def with_tank_level(self, tank_id: str, level_cm: float) -> "Network":
        self.tank(tank_id)
        ts = tuple(
            replace(t, fixed_level_cm=level_cm) if t.id == tank_id else t for t in self.tanks
        )
        return replace(self, tanks=ts)

    def normalized(self) -> "Network":
        """Merge parallel pipes (same unordered ends, same valve state) by
        summing conductance; keeps the first pipe's id."""
        merged: dict[tuple[str, str, bool], Pipe] = {}
        order: list[tuple[str, str, bool]] = []
        for p in self.pipes:
            key = (*sorted(p.ends), p.valve_open)
            if key in merged:
                old = merged[key]
                merged[key] = replace(old, conductance=old.conductance + p.conductance)
            else:
                merged[key] = p
                order.append(key)
        return replace(self, pipes=tuple(merged[k] for k in order))


# ---------------------------------------------------------------------------
# Events and scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetBaseElevation:
    """Place the vessel on a block (positive) or in a hole (negative).

    The water column rides along: level above the vessel's own base is
    unchanged at the instant, the absolute level jumps by the elevation step.
    """

    time_s: float
    node: str
    elevation_cm: float

    def describe(self) -> str:
        return f"set_base_elevation {self.node} -> {self.elevation_cm:g} cm"


@dataclass(frozen=True)
class SetValve:
    time_s: float
    pipe: str
    open: bool

    def describe(self) -> str:
        return f"set_valve {self.pipe} -> {'open' if self.open else 'closed'}"


@dataclass(frozen=True)
class InjectVolume:
    time_s: float
    node: str
    volume_cm3: float

    def describe(self) -> str:
        return f"inject_volume {self.node} -> {self.volume_cm3:+g} cm3"


@dataclass(frozen=True)
class SetTankLevel:
    time_s: float
    tank: str
    level_cm: float

    def describe(self) -> str:
        return f"set_tank_level {self.tank} -> {self.level_cm:g} cm"


Event = Union[SetBaseElevation, SetValve, InjectVolume, SetTankLevel]


@dataclass(frozen=True)
class Scenario:
    network: Network
    events: tuple[Event, ...] = ()
    duration_s: float = 30.0
    timestep_s: float = 0.01
    sample_interval_s: float = 0.1
    name: str = ""

    def sorted_events(self) -> tuple[Event, ...]:
        return tuple(sorted(self.events, key=lambda e: e.time_s))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.rule}"


def validate(scenario: Scenario) -> list[Violation]:
    """Check every model invariant; an empty list means the scenario is runnable."""
    out: list[Violation] = []
    net = scenario.network

    seen: set[str] = set()
    for node_id in net.node_ids:
        if node_id in seen:
            out.append(Violation(node_id, "duplicate node id"))
        seen.add(node_id)

    for v in net.vessels:
        out.extend(profile_violations(v.profile, f"vessel {v.id}"))
        if not 0.0 <= v.initial_level_cm <= v.max_height_cm:
            out.append(
                Violation(
                    f"vessel {v.id}",
                    f"initial_level {v.initial_level_cm:g} outside [0, {v.max_height_cm:g}]",
                )
            )
        top = v.profile.top_cm
        if top is not None and top < v.max_height_cm:
            out.append(
                Violation(
                    f"vessel {v.id}",
                    f"profile covers [0, {top:g}] but max_height is {v.max_height_cm:g}",
                )
            )
        if v.max_height_cm <= 0:
            out.append(Violation(f"vessel {v.id}", "max_height must be > 0"))

    node_set = set(net.node_ids)
    pipe_seen: set[str] = set()
    pair_state: dict[tuple[str, str], bool] = {}
    for p in net.pipes:
        if p.id in pipe_seen:
            out.append(Violation(f"pipe {p.id}", "duplicate pipe id"))
        pipe_seen.add(p.id)
        if not p.conductance > 0:
            out.append(Violation(f"pipe {p.id}", f"conductance must be > 0, got {p.conductance:g}"))
        if p.ends[0] == p.ends[1]:
            out.append(Violation(f"pipe {p.id}", "endpoints must be distinct"))
        for end in p.ends:
            if end not in node_set:
                out.append(Violation(f"pipe {p.id}", f"endpoint '{end}' is not a node"))
        pair = tuple(sorted(p.ends))
        if pair in pair_state:
            # normalized() merges same-state duplicates; mixed states are ambiguous
            if pair_state[pair] != p.valve_open:
                out.append(
                    Violation(f"pipe {p.id}", f"parallel pipe between {pair} with conflicting valve state")
                )
            else:
                out.append(
                    Violation(f"pipe {p.id}", f"parallel pipe between {pair}; merge via Network.normalized()")
                )
        pair_state[pair] = p.valve_open

    last_t = -math.inf
    for e in scenario.events:
        label = f"event t={e.time_s:g}"
        if e.time_s < 0:
            out.append(Violation(label, "event time must be >= 0"))
        if e.time_s < last_t:
            out.append(Violation(label, "events must be sorted by time"))
        last_t = e.time_s
        if isinstance(e, SetBaseElevation) and not net.has_vessel(e.node):
            out.append(Violation(label, f"set_base_elevation targets unknown vessel '{e.node}'"))
        elif isinstance(e, SetValve) and not any(p.id == e.pipe for p in net.pipes):
            out.append(Violation(label, f"set_valve targets unknown pipe '{e.pipe}'"))
        elif isinstance(e, InjectVolume) and not net.has_vessel(e.node):
            out.append(Violation(label, f"inject_volume targets unknown vessel '{e.node}'"))
        elif isinstance(e, SetTankLevel) and not net.has_tank(e.tank):
            out.append(Violation(label, f"set_tank_level targets unknown tank '{e.tank}'"))

    if not scenario.duration_s > 0:
        out.append(Violation("scenario", f"duration must be > 0, got {scenario.duration_s:g}"))
    if not 0 < scenario.timestep_s <= scenario.sample_interval_s <= scenario.duration_s:
        out.append(
            Violation(
                "scenario",
                "must satisfy 0 < timestep <= sample_interval <= duration "
                f"(got {scenario.timestep_s:g}, {scenario.sample_interval_s:g}, {scenario.duration_s:g})",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Connectivity
# ---------------------------------------------------------------------------

def components(
    network: Network, valve_states: Mapping[str, bool]
) -> tuple[tuple[str, ...], ...]:
    """Connected components of the node graph using only open pipes.

    ``valve_states`` must give a state for every pipe (it overrides the pipes'
    own valve flags, so callers can probe hypothetical switchings). Components
    are ordered by their smallest node id, nodes sorted within each.
    """
    known = {p.id for p in network.pipes}
    for pid in valve_states:
        if pid not in known:
            raise ValueError(f"unknown pipe id in valve_states: '{pid}'")
    missing = known - set(valve_states)
    if missing:
        raise ValueError(f"valve_states missing pipes: {sorted(missing)}")

    adj: dict[str, list[str]] = {n: [] for n in network.node_ids}
    for p in network.pipes:
        if valve_states[p.id]:
            adj[p.ends[0]].append(p.ends[1])
            adj[p.ends[1]].append(p.ends[0])

    seen: set[str] = set()
    comps: list[tuple[str, ...]] = []
    for start in network.node_ids:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=lambda c: c[0])
    return tuple(comps)


def current_components(network: Network) -> tuple[tuple[str, ...], ...]:
    """Components under the pipes' own valve states."""
    return components(network, {p.id: p.valve_open for p in network.pipes})
