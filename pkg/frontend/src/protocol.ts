// Wire protocol: newline-terminated JSON objects over a WebSocket, matching
// the session server. Every outbound command is validated before sending so
// the UI can never produce a protocol error.

export type Domain = "hydraulic" | "electrical";

export interface ProfileSpec {
  kind: "uniform" | "piecewise" | "sampled";
  area_cm2?: number;
  segments?: { from_cm: number; to_cm: number; area_cm2: number }[];
  points?: { height_cm: number; area_cm2: number }[];
}

export interface NodeSpec {
  id: string;
  kind: "vessel" | "tank";
  profile?: ProfileSpec;
  max_height_cm?: number;
  fixed_level_cm?: number;
}

export interface ScenarioMsg {
  type: "scenario";
  name: string;
  duration_s: number;
  nodes: NodeSpec[];
  pipes: { id: string; ends: [string, string] }[];
}

export interface FrameMsg {
  type: "frame";
  t: number;
  paused: boolean;
  speed: number;
  levels: Record<string, number>;
  volumes: Record<string, number>;
  exited: Record<string, number>;
  commanded: Record<string, number>;
  flows: Record<string, number>;
  base_elevation: Record<string, number>;
  valves: Record<string, boolean>;
  electrical: {
    freq_hz: Record<string, number>;
    power_out: Record<string, number>;
    setpoint_w: Record<string, number>;
  };
  events: { t: number; desc: string }[];
}

export interface ErrorMsg {
  type: "error";
  detail: string;
}

export type ServerMessage = ScenarioMsg | FrameMsg | ErrorMsg;

export type Command =
  | { type: "reset"; scenario: string; include_events?: boolean }
  | { type: "set_block"; node: string; elevation_cm: number }
  | { type: "set_valve"; pipe: string; open: boolean }
  | { type: "inject"; node: string; volume_cm3: number }
  | { type: "set_tank_level"; tank: string; level_cm: number }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set_speed"; multiplier: number };

export const SPEED_MIN = 0.1;
export const SPEED_MAX = 100;
export const BUILTIN_SCENARIOS = ["grid", "interconnected", "microgrid"] as const;

const finite = (x: unknown): x is number => typeof x === "number" && Number.isFinite(x);
const nonEmpty = (x: unknown): x is string => typeof x === "string" && x.length > 0;

/** Structural validity check mirroring what the server accepts. */
export function validateCommand(cmd: Command): string | null {
  switch (cmd.type) {
    case "reset":
      return nonEmpty(cmd.scenario) ? null : "reset needs a scenario name";
    case "set_block":
      if (!nonEmpty(cmd.node)) return "set_block needs a node";
      return finite(cmd.elevation_cm) ? null : "set_block needs a finite elevation";
    case "set_valve":
      if (!nonEmpty(cmd.pipe)) return "set_valve needs a pipe";
      return typeof cmd.open === "boolean" ? null : "set_valve needs a boolean state";
    case "inject":
      if (!nonEmpty(cmd.node)) return "inject needs a node";
      return finite(cmd.volume_cm3) ? null : "inject needs a finite volume";
    case "set_tank_level":
      if (!nonEmpty(cmd.tank)) return "set_tank_level needs a tank";
      return finite(cmd.level_cm) ? null : "set_tank_level needs a finite level";
    case "pause":
    case "resume":
      return null;
    case "set_speed":
      if (!finite(cmd.multiplier)) return "set_speed needs a finite multiplier";
      return cmd.multiplier >= SPEED_MIN && cmd.multiplier <= SPEED_MAX
        ? null
        : `speed must be within [${SPEED_MIN}, ${SPEED_MAX}]`;
    default:
      return `unknown command ${(cmd as { type: string }).type}`;
  }
}

export function encodeCommand(cmd: Command): string {
  const problem = validateCommand(cmd);
  if (problem) throw new Error(`refusing to send invalid command: ${problem}`);
  return JSON.stringify(cmd) + "\n";
}

export function parseServerMessage(raw: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(raw.trim());
  } catch {
    throw new Error("server sent non-JSON payload");
  }
  if (typeof obj !== "object" || obj === null || !("type" in obj)) {
    throw new Error("server message lacks a type");
  }
  const msg = obj as ServerMessage;
  if (msg.type === "frame" || msg.type === "scenario" || msg.type === "error") return msg;
  throw new Error(`unknown server message type ${(msg as { type: string }).type}`);
}

/** Cross-section width at a given height above the vessel base. */
export function areaAt(profile: ProfileSpec, h: number): number {
  if (profile.kind === "uniform") return profile.area_cm2 ?? 1;
  if (profile.kind === "piecewise") {
    const segs = profile.segments ?? [];
    for (const s of segs) if (h < s.to_cm) return s.area_cm2;
    return segs.length ? segs[segs.length - 1].area_cm2 : 1;
  }
  const pts = profile.points ?? [];
  if (!pts.length) return 1;
  if (h <= pts[0].height_cm) return pts[0].area_cm2;
  for (let i = 0; i + 1 < pts.length; i++) {
    const a = pts[i];
    const b = pts[i + 1];
    if (h <= b.height_cm) {
      const w = (h - a.height_cm) / (b.height_cm - a.height_cm);
      return a.area_cm2 + w * (b.area_cm2 - a.area_cm2);
    }
  }
  return pts[pts.length - 1].area_cm2;
}
