"""Exception types shared across the package."""

from __future__ import annotations


class DroopVesselError(Exception):
    """Base class for all package errors."""


class ScenarioParseError(DroopVesselError):
    """Scenario file is not well-formed (bad JSON, missing keys, bad kinds)."""


class ScenarioValidationError(DroopVesselError):
    """Scenario parsed but violates model invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"scenario invalid: {lines}")


class LevelRangeError(DroopVesselError):
    """A vessel level left [0, max_height] during integration (overflow/underflow)."""

    def __init__(self, vessel_id: str, time_s: float, level_cm: float, max_height_cm: float):
        self.vessel_id = vessel_id
        self.time_s = time_s
        self.level_cm = level_cm
        self.max_height_cm = max_height_cm
        kind = "overflow" if level_cm > max_height_cm else "underflow"
        super().__init__(
            f"{kind} in vessel '{vessel_id}' at t={time_s:.6g} s: "
            f"level {level_cm:.6g} cm outside [0, {max_height_cm:.6g}]"
        )


class EquilibriumUnreachable(DroopVesselError):
    """The common settling level would fall outside some vessel's height range."""

    def __init__(self, detail: str):
        super().__init__(detail)
