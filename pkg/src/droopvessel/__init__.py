"""droopvessel: a communicating-vessels sandbox for frequency droop.

A network of water vessels and a network of droop-controlled grid-forming
sources are two views of one dynamical system: water level is frequency,
cross-section is the reciprocal droop slope, block elevation is the power
setpoint, and pipes are cables. Build either view, simulate, and read the
result in both.
"""

from .droop import (
    DroopCurve,
    DroopParameters,
    GridLine,
    GridSource,
    GridSpec,
    IDENTITY_UNITS,
    InfiniteBus,
    UnitMap,
    area_from_slope,
    droop_curve_from_profile,
    droop_frequency,
    droop_slope,
    elevation_setpoint_w,
    grid_from_vessels,
    grid_to_vessels,
    profile_from_droop_curve,
    setpoint_elevation_cm,
    slope_from_area,
)
from .engine import (
    BUILTIN_NAMES,
    ElectricalView,
    Simulation,
    TimeSeries,
    builtin_scenario,
    builtin_scenario_text,
    electrical_view,
    event_markers_json,
    export_csv,
    run,
)
from .equilibrium import (
    ComponentEquilibrium,
    closed_form_uniform_level,
    component_equilibrium,
    equilibrium_summary,
    sharing_prediction,
    tracking_error_cm3,
)
from .errors import (
    DroopVesselError,
    EquilibriumUnreachable,
    LevelRangeError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .hydraulics import (
    SimulationState,
    derivatives,
    initial_state,
    level_from_volume,
    pipe_flow,
    pipe_flows,
    step,
    volume_from_level,
)
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
    Violation,
    components,
    current_components,
    validate,
)
from .scenario_io import load_scenario, save_scenario, scenario_from_dict, scenario_to_dict

__version__ = "0.1.0"
