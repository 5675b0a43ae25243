"""ODE core: level/volume conversion, pipe flows, and fixed-step RK4 integration.

The flow law is linear in the absolute level difference (laminar regime):
q = conductance * (Hi - Hj). Linearity makes the network an exact mirror of
linear droop sharing and turns every equilibrium into an area-weighted mean.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import LevelRangeError
from .model import (
    AreaProfile,
    Network,
    PiecewiseConstant,
    Sampled,
    Uniform,
)

_LEVEL_INVERT_TOL_CM = 1e-13


# ---------------------------------------------------------------------------
# Profile geometry
# ---------------------------------------------------------------------------

def profile_top_cm(profile: AreaProfile, fallback: float | None = None) -> float:
    top = profile.top_cm
    if top is None:
        if fallback is None:
            raise ValueError("uniform profile has no intrinsic top; supply a height")
        return fallback
    return top


def volume_from_level(profile: AreaProfile, level_cm: float) -> float:
    """Water volume when filled to ``level_cm``: the integral of the
    cross-section from 0 up to the level.

    Exact for Uniform and PiecewiseConstant, trapezoidal for Sampled.
    """
    if level_cm < 0:
        raise ValueError(f"level {level_cm:g} below vessel bottom")
    top = profile.top_cm
    if top is not None and level_cm > top * (1 + 1e-12) + 1e-12:
        raise ValueError(f"level {level_cm:g} above profile top {top:g}")
    return _volume_extended(profile, level_cm)


def _volume_extended(profile: AreaProfile, level_cm: float) -> float:
    """Volume integral with linear extension beyond [0, top].

    The extension keeps the function strictly increasing everywhere, which the
    integrator (transient RK stages) and the equilibrium bracketing rely on.
    """
    if isinstance(profile, Uniform):
        return profile.area_cm2 * level_cm
    if level_cm < 0:
        return profile.area_at(0.0) * level_cm
    if isinstance(profile, PiecewiseConstant):
        vol = 0.0
        for seg in profile.segments:
            if level_cm <= seg.lo_cm:
                break
            vol += seg.area_cm2 * (min(level_cm, seg.hi_cm) - seg.lo_cm)
        top = profile.segments[-1].hi_cm
        if level_cm > top:
            vol += profile.segments[-1].area_cm2 * (level_cm - top)
        return vol
    if isinstance(profile, Sampled):
        pts = profile.points
        vol = 0.0
        for (h0, a0), (h1, a1) in zip(pts, pts[1:]):
            if level_cm <= h0:
                break
            if level_cm >= h1:
                vol += 0.5 * (a0 + a1) * (h1 - h0)
            else:
                a_mid = a0 + (a1 - a0) * (level_cm - h0) / (h1 - h0)
                vol += 0.5 * (a0 + a_mid) * (level_cm - h0)
                break
        top = pts[-1][0]
        if level_cm > top:
            vol += pts[-1][1] * (level_cm - top)
        return vol
    raise TypeError(f"unknown profile type {type(profile).__name__}")


def level_from_volume(profile: AreaProfile, volume_cm3: float) -> float:
    """Inverse of :func:`volume_from_level`.

    Closed form for Uniform; monotone bisection otherwise, tight enough that
    the round trip reproduces the volume to 1e-9 relative.
    """
    if volume_cm3 < 0:
        raise ValueError(f"volume {volume_cm3:g} is negative")
    top = profile.top_cm
    if top is not None:
        cap = _volume_extended(profile, top)
        if volume_cm3 > cap * (1 + 1e-12) + 1e-12:
            raise ValueError(f"volume {volume_cm3:g} above capacity {cap:g}")
    return _level_extended(profile, volume_cm3)


def _level_extended(profile: AreaProfile, volume_cm3: float) -> float:
    if isinstance(profile, Uniform):
        return volume_cm3 / profile.area_cm2
    top = profile_top_cm(profile)
    if volume_cm3 < 0:
        return volume_cm3 / profile.area_at(0.0)
    cap = _volume_extended(profile, top)
    if volume_cm3 > cap:
        return top + (volume_cm3 - cap) / profile.area_at(top)
    lo, hi = 0.0, top
    while hi - lo > _LEVEL_INVERT_TOL_CM:
        mid = 0.5 * (lo + hi)
        if _volume_extended(profile, mid) < volume_cm3:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

def pipe_flow(
    level_i_cm: float, level_j_cm: float, conductance: float, valve_open: bool
) -> float:
    """Flow i -> j in cm³/s; exactly antisymmetric in the two levels."""
    if not valve_open:
        return 0.0
    return conductance * (level_i_cm - level_j_cm)


# ---------------------------------------------------------------------------
# Compiled network (internal fast path)
# ---------------------------------------------------------------------------

class _Compiled:
    """Index-based view of a Network for array arithmetic.

    Node order is vessels-then-tanks, in declaration order.
    """

    def __init__(self, net: Network):
        self.vessel_ids = tuple(v.id for v in net.vessels)
        self.tank_ids = tuple(t.id for t in net.tanks)
        self.node_ids = self.vessel_ids + self.tank_ids
        index = {n: i for i, n in enumerate(self.node_ids)}
        self.n_vessels = len(net.vessels)

        self.profiles = tuple(v.profile for v in net.vessels)
        self.all_uniform = all(isinstance(p, Uniform) for p in self.profiles)
        self.areas = (
            np.array([p.area_cm2 for p in self.profiles], dtype=float)
            if self.all_uniform
            else None
        )
        self.z = np.array([v.base_elevation_cm for v in net.vessels], dtype=float)
        self.max_heights = np.array([v.max_height_cm for v in net.vessels], dtype=float)
        self.tank_levels = np.array([t.fixed_level_cm for t in net.tanks], dtype=float)

        self.pipe_ids = tuple(p.id for p in net.pipes)
        self.src = np.array([index[p.ends[0]] for p in net.pipes], dtype=int)
        self.dst = np.array([index[p.ends[1]] for p in net.pipes], dtype=int)
        self.g_open = np.array(
            [p.conductance if p.valve_open else 0.0 for p in net.pipes], dtype=float
        )

        # Signed incidence restricted to vessel rows: dV = -B @ flows
        n_pipes = len(net.pipes)
        self.incidence = np.zeros((self.n_vessels, n_pipes))
        for k in range(n_pipes):
            if self.src[k] < self.n_vessels:
                self.incidence[self.src[k], k] = 1.0
            if self.dst[k] < self.n_vessels:
                self.incidence[self.dst[k], k] = -1.0

    def levels(self, volumes: np.ndarray) -> np.ndarray:
        """Vessel levels above their own base; extends past [0, max] linearly
        so intermediate RK stages stay defined near the caps."""
        if self.all_uniform:
            return volumes / self.areas
        return np.array(
            [_level_extended(p, v) for p, v in zip(self.profiles, volumes)], dtype=float
        )

    def node_levels(self, volumes: np.ndarray) -> np.ndarray:
        """Absolute level per node (vessels then tanks)."""
        return np.concatenate((self.z + self.levels(volumes), self.tank_levels))

    def flows(self, volumes: np.ndarray) -> np.ndarray:
        h = self.node_levels(volumes)
        return self.g_open * (h[self.src] - h[self.dst])

    def dvolumes(self, volumes: np.ndarray) -> np.ndarray:
        return -(self.incidence @ self.flows(volumes))


_compiled_cache: "weakref.WeakValueDictionary[int, Network]" = weakref.WeakValueDictionary()
_compiled_store: dict[int, _Compiled] = {}


def compiled(net: Network) -> _Compiled:
    key = id(net)
    if _compiled_cache.get(key) is net:
        return _compiled_store[key]
    comp = _Compiled(net)
    _compiled_cache[key] = net
    _compiled_store[key] = comp
    # drop stale entries whose networks were collected
    for k in list(_compiled_store):
        if k not in _compiled_cache:
            del _compiled_store[k]
    return comp


# ---------------------------------------------------------------------------
# Simulation state
# ---------------------------------------------------------------------------

def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SimulationState:
    """Snapshot of the hydraulic state at one instant.

    Levels and exited volumes are derived: level = level(profile, volume),
    exited = initial + injected - current (positive means water left the
    vessel through its pipes).
    """

    time_s: float
    vessel_ids: tuple[str, ...]
    node_ids: tuple[str, ...]
    volumes_cm3: np.ndarray
    injected_cm3: np.ndarray
    initial_volumes_cm3: np.ndarray
    levels_cm: np.ndarray
    absolute_levels_cm: np.ndarray
    exited_cm3: np.ndarray

    def volume(self, vessel_id: str) -> float:
        return float(self.volumes_cm3[self.vessel_ids.index(vessel_id)])

    def level(self, vessel_id: str) -> float:
        return float(self.levels_cm[self.vessel_ids.index(vessel_id)])

    def absolute_level(self, node_id: str) -> float:
        return float(self.absolute_levels_cm[self.node_ids.index(node_id)])

    def exited(self, vessel_id: str) -> float:
        return float(self.exited_cm3[self.vessel_ids.index(vessel_id)])


def _build_state(
    net: Network,
    time_s: float,
    volumes: np.ndarray,
    injected: np.ndarray,
    initial: np.ndarray,
) -> SimulationState:
    comp = compiled(net)
    levels = comp.levels(volumes)
    for i, lvl in enumerate(levels):
        if lvl < 0.0 or lvl > comp.max_heights[i]:
            raise LevelRangeError(comp.vessel_ids[i], time_s, float(lvl), float(comp.max_heights[i]))
    return SimulationState(
        time_s=time_s,
        vessel_ids=comp.vessel_ids,
        node_ids=comp.node_ids,
        volumes_cm3=_frozen(volumes),
        injected_cm3=_frozen(injected),
        initial_volumes_cm3=_frozen(initial),
        levels_cm=_frozen(levels),
        absolute_levels_cm=_frozen(np.concatenate((comp.z + levels, comp.tank_levels))),
        exited_cm3=_frozen(initial + injected - volumes),
    )


def initial_state(net: Network) -> SimulationState:
    vols = np.array(
        [volume_from_level(v.profile, v.initial_level_cm) for v in net.vessels], dtype=float
    )
    zeros = np.zeros_like(vols)
    return _build_state(net, 0.0, vols, zeros, vols.copy())


def rebind_state(net: Network, state: SimulationState, time_s: float | None = None) -> SimulationState:
    """Recompute derived fields after a topology/elevation edit; volumes carry over."""
    return _build_state(
        net,
        state.time_s if time_s is None else time_s,
        state.volumes_cm3.copy(),
        state.injected_cm3.copy(),
        state.initial_volumes_cm3.copy(),
    )


def inject(net: Network, state: SimulationState, vessel_id: str, volume_cm3: float) -> SimulationState:
    comp = compiled(net)
    i = comp.vessel_ids.index(vessel_id)
    vols = state.volumes_cm3.copy()
    inj = state.injected_cm3.copy()
    vols[i] += volume_cm3
    inj[i] += volume_cm3
    return _build_state(net, state.time_s, vols, inj, state.initial_volumes_cm3.copy())


# ---------------------------------------------------------------------------
# Derivatives and integration
# ---------------------------------------------------------------------------

def derivatives(net: Network, state: SimulationState) -> dict[str, float]:
    """dV/dt per vessel (cm³/s). Tanks are boundary nodes: flow into a tank
    leaves the system; the tank itself is not tracked."""
    comp = compiled(net)
    dv = comp.dvolumes(state.volumes_cm3)
    return {vid: float(d) for vid, d in zip(comp.vessel_ids, dv)}


def pipe_flows(net: Network, state: SimulationState) -> dict[str, float]:
    """Instantaneous flow per pipe, positive from ends[0] to ends[1]."""
    comp = compiled(net)
    q = comp.flows(state.volumes_cm3)
    return {pid: float(f) for pid, f in zip(comp.pipe_ids, q)}


def _rk4_volumes(comp: _Compiled, volumes: np.ndarray, dt: float) -> np.ndarray:
    k1 = comp.dvolumes(volumes)
    k2 = comp.dvolumes(volumes + 0.5 * dt * k1)
    k3 = comp.dvolumes(volumes + 0.5 * dt * k2)
    k4 = comp.dvolumes(volumes + dt * k3)
    return volumes + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(net: Network, state: SimulationState, dt: float) -> SimulationState:
    """One classical RK4 step on the vessel volumes.

    Raises :class:`LevelRangeError` if the committed state leaves a vessel's
    [0, max_height] band.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt:g}")
    comp = compiled(net)
    vols = _rk4_volumes(comp, state.volumes_cm3, dt)
    return _build_state(
        net,
        state.time_s + dt,
        vols,
        state.injected_cm3.copy(),
        state.initial_volumes_cm3.copy(),
    )
