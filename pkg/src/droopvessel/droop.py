"""Frequency-droop side of the analogy and the conversions between domains.

The correspondence, attribute by attribute:

    water level (cm)        <->  frequency (Hz)
    base reference level    <->  nominal frequency
    cross-section area      <->  reciprocal of droop slope
    outflow volume          <->  real power
    block elevation         <->  power setpoint
    pipes                   <->  cables (coupling = conductance, opaque)

The default unit map is the identity (1 cm = 1 Hz, 60 cm = 60 Hz; 1 cm³ of
exited water = 1 unit of delivered power), so both views show the same
numbers out of the box. Real grids deviate by millihertz, hence the affine
level map is configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hydraulics import level_from_volume, volume_from_level, _volume_extended
from .model import (
    AreaProfile,
    InfiniteTank,
    Network,
    PiecewiseConstant,
    ProfileSegment,
    Pipe,
    Sampled,
    Uniform,
    Vessel,
    DEFAULT_MAX_HEIGHT_CM,
)


# ---------------------------------------------------------------------------
# Droop law (the electrical-side primitives)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DroopParameters:
    """Linear droop characteristic of one grid-forming source."""

    f_nom_hz: float = 60.0
    m_p_hz_per_w: float = 1.0
    p_ref_w: float = 0.0
    s_rated_w: float | None = None
    delta_f_hz: float | None = None

    def __post_init__(self):
        if not self.m_p_hz_per_w > 0:
            raise ValueError(f"droop slope must be > 0, got {self.m_p_hz_per_w:g}")
        if self.s_rated_w is not None and not self.s_rated_w > 0:
            raise ValueError(f"rated power must be > 0, got {self.s_rated_w:g}")

    @classmethod
    def from_rating(
        cls, f_nom_hz: float, delta_f_hz: float, s_rated_w: float, p_ref_w: float = 0.0
    ) -> "DroopParameters":
        """Slope selection: a desired frequency drop over the rated power."""
        return cls(
            f_nom_hz=f_nom_hz,
            m_p_hz_per_w=droop_slope(delta_f_hz, s_rated_w),
            p_ref_w=p_ref_w,
            s_rated_w=s_rated_w,
            delta_f_hz=delta_f_hz,
        )


def droop_frequency(params: DroopParameters, p_w: float) -> float:
    """f = f_nom - m_p * (P - P_ref)."""
    return params.f_nom_hz - params.m_p_hz_per_w * (p_w - params.p_ref_w)


def droop_slope(delta_f_hz: float, s_rated_w: float) -> float:
    """m_p = delta_f / S_rated."""
    if not delta_f_hz > 0:
        raise ValueError(f"frequency drop must be > 0, got {delta_f_hz:g}")
    if not s_rated_w > 0:
        raise ValueError(f"rated power must be > 0, got {s_rated_w:g}")
    return delta_f_hz / s_rated_w


def area_from_slope(m_p_hz_per_w: float) -> float:
    """Vessel cross-section dual to a droop slope: A = 1 / m_p."""
    if not m_p_hz_per_w > 0:
        raise ValueError(f"droop slope must be > 0, got {m_p_hz_per_w:g}")
    return 1.0 / m_p_hz_per_w


def slope_from_area(area_cm2: float) -> float:
    """Droop slope dual to a vessel cross-section: m_p = 1 / A."""
    if not area_cm2 > 0:
        raise ValueError(f"area must be > 0, got {area_cm2:g}")
    return 1.0 / area_cm2


# ---------------------------------------------------------------------------
# Unit map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitMap:
    """Affine level<->frequency map plus a linear volume<->power scale.

    The level map may carry an offset (grids live within millihertz of
    nominal); volume-derived quantities (exited volume, flows) are
    differences, so their map is a pure scale.
    """

    hz_per_cm: float = 1.0
    hz_offset: float = 0.0
    w_per_cm3: float = 1.0

    def __post_init__(self):
        if self.hz_per_cm == 0 or self.w_per_cm3 == 0:
            raise ValueError("unit map scales must be nonzero")

    def level_to_freq(self, level_cm: float) -> float:
        return self.hz_per_cm * level_cm + self.hz_offset

    def freq_to_level(self, freq_hz: float) -> float:
        return (freq_hz - self.hz_offset) / self.hz_per_cm

    def volume_to_power(self, volume_cm3: float) -> float:
        return self.w_per_cm3 * volume_cm3

    def power_to_volume(self, power_w: float) -> float:
        return power_w / self.w_per_cm3

    def area_from_slope_cm2(self, m_p_hz_per_w: float) -> float:
        if not m_p_hz_per_w > 0:
            raise ValueError(f"droop slope must be > 0, got {m_p_hz_per_w:g}")
        return self.hz_per_cm / (self.w_per_cm3 * m_p_hz_per_w)

    def slope_from_area_cm2(self, area_cm2: float) -> float:
        if not area_cm2 > 0:
            raise ValueError(f"area must be > 0, got {area_cm2:g}")
        return self.hz_per_cm / (self.w_per_cm3 * area_cm2)


IDENTITY_UNITS = UnitMap()


# ---------------------------------------------------------------------------
# Droop curves and body shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DroopCurve:
    """Sampled P-f characteristic, strictly decreasing in P.

    ``tag`` records the family: "linear" curves extrapolate beyond their
    sample range (the law is global); the others are capacity-bounded and
    refuse evaluation outside it.
    """

    points: tuple[tuple[float, float], ...]  # (p_w, f_hz), P strictly increasing
    tag: str = "sampled"

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a droop curve needs at least 2 points")
        for (p0, f0), (p1, f1) in zip(self.points, self.points[1:]):
            if p1 <= p0:
                raise ValueError(f"curve powers must increase strictly (at P={p1:g})")
            if f1 >= f0:
                raise ValueError(f"curve must be strictly decreasing (at P={p1:g})")
        if self.tag not in ("linear", "convex", "piecewise-linear", "sampled"):
            raise ValueError(f"unknown curve tag '{self.tag}'")

    @property
    def p_range_w(self) -> tuple[float, float]:
        return self.points[0][0], self.points[-1][0]

    def frequency_at(self, p_w: float) -> float:
        pts = self.points
        if p_w < pts[0][0] or p_w > pts[-1][0]:
            if self.tag != "linear":
                raise ValueError(
                    f"P={p_w:g} outside curve range [{pts[0][0]:g}, {pts[-1][0]:g}] "
                    "(beyond vessel capacity)"
                )
            # linear law holds globally; extrapolate from the nearest segment
            p0, f0 = pts[0] if p_w < pts[0][0] else pts[-2]
            p1, f1 = pts[1] if p_w < pts[0][0] else pts[-1]
            return f0 + (f1 - f0) * (p_w - p0) / (p1 - p0)
        for (p0, f0), (p1, f1) in zip(pts, pts[1:]):
            if p_w <= p1:
                return f0 + (f1 - f0) * (p_w - p0) / (p1 - p0)
        return pts[-1][1]

    def power_at(self, f_hz: float) -> float:
        pts = self.points
        if f_hz > pts[0][1] or f_hz < pts[-1][1]:
            if self.tag != "linear":
                raise ValueError(
                    f"f={f_hz:g} outside curve range [{pts[-1][1]:g}, {pts[0][1]:g}]"
                )
            p0, f0 = pts[0] if f_hz > pts[0][1] else pts[-2]
            p1, f1 = pts[1] if f_hz > pts[0][1] else pts[-1]
            return p0 + (p1 - p0) * (f_hz - f0) / (f1 - f0)
        for (p0, f0), (p1, f1) in zip(pts, pts[1:]):
            if f_hz >= f1:
                return p0 + (p1 - p0) * (f_hz - f0) / (f1 - f0)
        return pts[-1][0]


def droop_curve_from_profile(
    profile: AreaProfile,
    f_nom_hz: float = 60.0,
    p_ref_w: float = 0.0,
    unit_map: UnitMap = IDENTITY_UNITS,
    max_level_cm: float | None = None,
    max_spacing_cm: float = 0.25,
) -> DroopCurve:
    """The P-f characteristic a vessel body realizes.

    Defined by P - P_ref = integral of the cross-section from level f down to
    level f_nom: outflow drains the vessel from the nominal mark, so wider
    bodies mean flatter curves. Uniform bodies reduce exactly to the linear
    droop law with m_p = 1 / A; stepped bodies give exact breakpoints; smooth
    (Sampled) bodies are emitted on a level grid no coarser than
    ``max_spacing_cm`` so the piecewise-linear curve tracks the true dual.
    """
    h_nom = unit_map.freq_to_level(f_nom_hz)
    top = profile.top_cm
    if top is None:
        top = max_level_cm if max_level_cm is not None else 2.0 * h_nom
    elif max_level_cm is not None:
        top = min(top, max_level_cm)
    if not 0.0 <= h_nom <= top:
        raise ValueError(
            f"nominal frequency {f_nom_hz:g} Hz maps to level {h_nom:g} cm, "
            f"outside the profile's [0, {top:g}]"
        )

    if isinstance(profile, Uniform):
        heights = [0.0, top]
        tag = "linear"
    elif isinstance(profile, PiecewiseConstant):
        heights = sorted({0.0, top, *(s.lo_cm for s in profile.segments), *(s.hi_cm for s in profile.segments)})
        heights = [h for h in heights if 0.0 <= h <= top]
        tag = "piecewise-linear"
    else:
        anchors = sorted({0.0, top, *(h for h, _ in profile.points if 0.0 <= h <= top)})
        heights = []
        for h0, h1 in zip(anchors, anchors[1:]):
            pieces = max(1, math.ceil((h1 - h0) / max_spacing_cm))
            heights.extend(h0 + (h1 - h0) * k / pieces for k in range(pieces))
        heights.append(top)
        tag = "sampled"

    v_nom = volume_from_level(profile, h_nom)
    pts = []
    for h in sorted(heights, reverse=True):  # descending level = increasing P
        p = p_ref_w + unit_map.volume_to_power(v_nom - volume_from_level(profile, h))
        f = unit_map.level_to_freq(h)
        pts.append((p, f))
    return DroopCurve(points=tuple(pts), tag=tag)


def profile_from_droop_curve(
    curve: DroopCurve, unit_map: UnitMap = IDENTITY_UNITS
) -> AreaProfile:
    """Vessel body realizing a droop curve: per segment, area = 1 / slope
    (in mapped units). A linear curve yields a Uniform body; anything else a
    stepped body whose lowest step extends down to level 0.
    """
    pts = curve.points
    segs: list[tuple[float, float, float]] = []  # (lo_level, hi_level, area)
    for (p0, f0), (p1, f1) in zip(pts, pts[1:]):
        slope = (f0 - f1) / (p1 - p0)  # positive by construction
        area = unit_map.area_from_slope_cm2(slope)
        hi = unit_map.freq_to_level(f0)
        lo = unit_map.freq_to_level(f1)
        if lo > hi:
            lo, hi = hi, lo
        segs.append((lo, hi, area))
    segs.sort(key=lambda s: s[0])
    if segs[0][0] < 0:
        raise ValueError("curve maps below level 0; shift the unit map or the curve")

    areas = [a for _, _, a in segs]
    if curve.tag == "linear" or all(abs(a - areas[0]) <= 1e-12 * areas[0] for a in areas):
        return Uniform(area_cm2=areas[0])

    out = []
    lo0 = 0.0  # extend the lowest step to the vessel bottom
    for lo, hi, area in segs:
        out.append(ProfileSegment(lo_cm=lo0, hi_cm=hi, area_cm2=area))
        lo0 = hi
    return PiecewiseConstant(segments=tuple(out))


# ---------------------------------------------------------------------------
# Grid specification and the network conversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSource:
    """One grid-forming source: droop slope or full curve, plus a setpoint."""

    id: str
    f_nom_hz: float = 60.0
    m_p_hz_per_w: float | None = None
    curve: DroopCurve | None = None
    p_ref_w: float = 0.0

    def __post_init__(self):
        if (self.m_p_hz_per_w is None) == (self.curve is None):
            raise ValueError(f"source '{self.id}' needs exactly one of m_p or curve")


@dataclass(frozen=True)
class InfiniteBus:
    """Stiff grid node: frequency fixed regardless of exchanged power."""

    id: str
    frequency_hz: float = 60.0


@dataclass(frozen=True)
class GridLine:
    """Cable between two nodes; coupling is an opaque strength constant."""

    id: str
    ends: tuple[str, str]
    coupling: float = 1.0
    breaker_closed: bool = True


@dataclass(frozen=True)
class GridSpec:
    sources: tuple[GridSource, ...]
    buses: tuple[InfiniteBus, ...] = ()
    lines: tuple[GridLine, ...] = ()


def setpoint_elevation_cm(profile: AreaProfile, p_ref_w: float, unit_map: UnitMap) -> float:
    """Block height that realizes a power setpoint: the displaced (virtual)
    volume under the vessel equals the mapped setpoint."""
    v_ref = unit_map.power_to_volume(p_ref_w)
    if isinstance(profile, Uniform):
        return v_ref / profile.area_cm2
    if v_ref < 0:
        raise ValueError("negative setpoint on a shaped vessel is not representable "
                         "(the body is undefined below its base)")
    return level_from_volume(profile, v_ref)


def elevation_setpoint_w(profile: AreaProfile, elevation_cm: float, unit_map: UnitMap) -> float:
    """Inverse of :func:`setpoint_elevation_cm`."""
    return unit_map.volume_to_power(_volume_extended(profile, elevation_cm))


def grid_to_vessels(
    grid: GridSpec,
    unit_map: UnitMap = IDENTITY_UNITS,
    max_height_cm: float = DEFAULT_MAX_HEIGHT_CM,
) -> Network:
    """Build the hydraulic twin of a grid: one vessel per source, one
    infinite tank per bus, one pipe per line. Sources start at nominal
    frequency."""
    vessels = []
    for s in grid.sources:
        if s.m_p_hz_per_w is not None:
            profile: AreaProfile = Uniform(area_cm2=unit_map.area_from_slope_cm2(s.m_p_hz_per_w))
        else:
            profile = profile_from_droop_curve(s.curve, unit_map)
        z = setpoint_elevation_cm(profile, s.p_ref_w, unit_map)
        level = unit_map.freq_to_level(s.f_nom_hz) - z
        if not 0.0 <= level <= max_height_cm:
            raise ValueError(
                f"source '{s.id}': nominal frequency and setpoint imply initial level "
                f"{level:g} cm outside [0, {max_height_cm:g}]"
            )
        vessels.append(
            Vessel(
                id=s.id,
                profile=profile,
                base_elevation_cm=z,
                initial_level_cm=level,
                max_height_cm=max_height_cm,
            )
        )
    tanks = tuple(
        InfiniteTank(id=b.id, fixed_level_cm=unit_map.freq_to_level(b.frequency_hz))
        for b in grid.buses
    )
    pipes = tuple(
        Pipe(id=l.id, ends=l.ends, conductance=l.coupling, valve_open=l.breaker_closed)
        for l in grid.lines
    )
    return Network(vessels=tuple(vessels), tanks=tanks, pipes=pipes)


def grid_from_vessels(net: Network, unit_map: UnitMap = IDENTITY_UNITS) -> GridSpec:
    """Read a network back as a grid spec (inverse of :func:`grid_to_vessels`)."""
    sources = []
    for v in net.vessels:
        f_nom = unit_map.level_to_freq(v.base_elevation_cm + v.initial_level_cm)
        p_ref = elevation_setpoint_w(v.profile, v.base_elevation_cm, unit_map)
        if isinstance(v.profile, Uniform):
            sources.append(
                GridSource(
                    id=v.id,
                    f_nom_hz=f_nom,
                    m_p_hz_per_w=unit_map.slope_from_area_cm2(v.profile.area_cm2),
                    p_ref_w=p_ref,
                )
            )
        else:
            curve = droop_curve_from_profile(v.profile, f_nom, p_ref, unit_map)
            sources.append(GridSource(id=v.id, f_nom_hz=f_nom, curve=curve, p_ref_w=p_ref))
    buses = tuple(
        InfiniteBus(id=t.id, frequency_hz=unit_map.level_to_freq(t.fixed_level_cm))
        for t in net.tanks
    )
    lines = tuple(
        GridLine(id=p.id, ends=p.ends, coupling=p.conductance, breaker_closed=p.valve_open)
        for p in net.pipes
    )
    return GridSpec(sources=tuple(sources), buses=buses, lines=lines)
