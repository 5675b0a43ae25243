"""Steady-state prediction per connected component.

With the linear flow law every connected component settles to a single
absolute level. Components holding a tank settle at the tank level; tankless
components conserve volume, so the level solves
sum_k V_k(L - z_k) = sum_k V_k(now), found by monotone bisection. For
all-uniform components that root has the closed form
L = sum(A_k * H_k) / sum(A_k), the area-weighted mean of absolute levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EquilibriumUnreachable
from .hydraulics import SimulationState, _volume_extended
from .model import Network, current_components

_BISECTION_TOL_CM = 1e-10


@dataclass(frozen=True)
class ComponentEquilibrium:
    """Predicted settling point of one connected component."""

    node_ids: tuple[str, ...]
    level_cm: float
    has_tank: bool
    final_volumes_cm3: dict[str, float]
    volume_changes_cm3: dict[str, float]
    exited_cm3: dict[str, float]
    tracking_errors_cm3: dict[str, float]


def closed_form_uniform_level(
    areas_cm2: Sequence[float], absolute_levels_cm: Sequence[float]
) -> float:
    """Area-weighted mean of absolute levels; exact for uniform vessels."""
    num = sum(a * h for a, h in zip(areas_cm2, absolute_levels_cm))
    den = sum(areas_cm2)
    return num / den


def sharing_prediction(areas_cm2: Sequence[float], displaced_cm3: float) -> list[float]:
    """Allocation of a displaced volume among uniform vessels: each takes its
    area share, so the parts sum to the displaced volume exactly."""
    total = sum(areas_cm2)
    if not total > 0:
        raise ValueError("areas must be positive")
    return [displaced_cm3 * a / total for a in areas_cm2]


def component_equilibrium(
    net: Network, state: SimulationState, component: Iterable[str]
) -> ComponentEquilibrium:
    """Solve the settling level for one component of the current topology.

    Raises :class:`EquilibriumUnreachable` if the level would fall outside a
    vessel's [z, z + max_height] band, or if the component pins two tanks at
    different levels.
    """
    nodes = tuple(sorted(component))
    vessels = [net.vessel(n) for n in nodes if net.has_vessel(n)]
    tanks = [net.tank(n) for n in nodes if net.has_tank(n)]

    if tanks:
        level = tanks[0].fixed_level_cm
        for t in tanks[1:]:
            if t.fixed_level_cm != level:
                raise EquilibriumUnreachable(
                    f"component {nodes} pins tanks at different levels "
                    f"({tanks[0].id}={level:g}, {t.id}={t.fixed_level_cm:g})"
                )
    elif vessels:
        level = _solve_tankless_level(vessels, state)
    else:
        raise ValueError(f"component {nodes} has no nodes")

    for v in vessels:
        if not v.base_elevation_cm <= level <= v.base_elevation_cm + v.max_height_cm:
            raise EquilibriumUnreachable(
                f"component {nodes}: settling level {level:.6g} cm outside vessel "
                f"'{v.id}' range [{v.base_elevation_cm:g}, "
                f"{v.base_elevation_cm + v.max_height_cm:g}]"
            )

    final: dict[str, float] = {}
    change: dict[str, float] = {}
    exited: dict[str, float] = {}
    errors: dict[str, float] = {}
    for v in vessels:
        vol = _volume_extended(v.profile, level - v.base_elevation_cm)
        now = state.volume(v.id)
        final[v.id] = vol
        change[v.id] = vol - now
        exited[v.id] = state.exited(v.id) + (now - vol)
        # commanded displaced volume: area * block height for uniform bodies,
        # the profile integral over the block for shaped ones
        commanded = _volume_extended(v.profile, v.base_elevation_cm)
        errors[v.id] = commanded - exited[v.id]
    return ComponentEquilibrium(
        node_ids=nodes,
        level_cm=level,
        has_tank=bool(tanks),
        final_volumes_cm3=final,
        volume_changes_cm3=change,
        exited_cm3=exited,
        tracking_errors_cm3=errors,
    )


def _solve_tankless_level(vessels, state: SimulationState) -> float:
    total_now = sum(state.volume(v.id) for v in vessels)
    lo = min(v.base_elevation_cm for v in vessels)
    hi = max(v.base_elevation_cm + v.max_height_cm for v in vessels)

    def total_at(level: float) -> float:
        return sum(_volume_extended(v.profile, level - v.base_elevation_cm) for v in vessels)

    # the extended volume functions are strictly increasing, so widen until bracketed
    while total_at(lo) > total_now:
        lo -= max(1.0, hi - lo)
    while total_at(hi) < total_now:
        hi += max(1.0, hi - lo)
    while hi - lo > _BISECTION_TOL_CM:
        mid = 0.5 * (lo + hi)
        if total_at(mid) < total_now:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tracking_error_cm3(vessel_id: str, result: ComponentEquilibrium) -> float:
    """Setpoint-tracking error: commanded displaced volume (area * block
    height for uniform bodies) minus the volume that actually exited. Zero
    whenever the component holds a tank; the elevated vessel's share of its
    own disturbance otherwise."""
    if vessel_id not in result.tracking_errors_cm3:
        raise KeyError(f"vessel '{vessel_id}' not in component {result.node_ids}")
    return result.tracking_errors_cm3[vessel_id]


def equilibrium_summary(net: Network, state: SimulationState) -> list[ComponentEquilibrium]:
    """Solve every component of the current topology."""
    return [component_equilibrium(net, state, comp) for comp in current_components(net)]
