// Shared fixtures: a small fake scenario and frame factory for unit tests.

import type { FrameMsg, ScenarioMsg } from "../src/protocol.js";

export function fakeScenario(): ScenarioMsg {
  return {
    type: "scenario",
    name: "interconnected",
    duration_s: 30,
    nodes: [
      { id: "v1", kind: "vessel", profile: { kind: "uniform", area_cm2: 1.25 }, max_height_cm: 120 },
      { id: "v2", kind: "vessel", profile: { kind: "uniform", area_cm2: 2.5 }, max_height_cm: 120 },
      { id: "v3", kind: "vessel", profile: { kind: "uniform", area_cm2: 2.5 }, max_height_cm: 120 },
      { id: "v4", kind: "vessel", profile: { kind: "uniform", area_cm2: 3.75 }, max_height_cm: 120 },
    ],
    pipes: [
      { id: "v1-v2", ends: ["v1", "v2"] },
      { id: "v2-v3", ends: ["v2", "v3"] },
      { id: "v3-v4", ends: ["v3", "v4"] },
      { id: "v4-v1", ends: ["v4", "v1"] },
    ],
  };
}

export function fakeFrame(t: number, overrides: Partial<FrameMsg> = {}): FrameMsg {
  const levels = { v1: 60, v2: 60, v3: 60, v4: 60 };
  const zeros = { v1: 0, v2: 0, v3: 0, v4: 0 };
  return {
    type: "frame",
    t,
    paused: false,
    speed: 1,
    levels: { ...levels },
    volumes: { v1: 75, v2: 150, v3: 150, v4: 225 },
    exited: { ...zeros },
    commanded: { ...zeros },
    flows: { "v1-v2": 0, "v2-v3": 0, "v3-v4": 0, "v4-v1": 0 },
    base_elevation: { ...zeros },
    valves: { "v1-v2": true, "v2-v3": true, "v3-v4": true, "v4-v1": true },
    electrical: { freq_hz: { ...levels }, power_out: { ...zeros }, setpoint_w: { ...zeros } },
    events: [],
    ...overrides,
  };
}
