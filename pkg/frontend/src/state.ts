// View model: the latest frame, plot history, and pure-UI flags. State is
// authoritative from server frames only; the client never simulates.

import type { Domain, FrameMsg, ScenarioMsg, ServerMessage } from "./protocol.js";

export const HISTORY_CAPACITY = 1200; // one minute at the 20 Hz frame cadence

export interface Series {
  times: number[];
  values: Map<string, number[]>;
}

function pushSeries(s: Series, t: number, vals: Record<string, number>): void {
  s.times.push(t);
  for (const [k, v] of Object.entries(vals)) {
    let arr = s.values.get(k);
    if (!arr) {
      arr = new Array(s.times.length - 1).fill(NaN);
      s.values.set(k, arr);
    }
    arr.push(v);
  }
  if (s.times.length > HISTORY_CAPACITY) {
    s.times.shift();
    for (const arr of s.values.values()) arr.shift();
  }
}

export class Store {
  scenario: ScenarioMsg | null = null;
  frame: FrameMsg | null = null;
  domain: Domain = "hydraulic";
  selected: string | null = null;
  dragBlock: { node: string; elevation_cm: number } | null = null;
  errors: string[] = [];
  levelHistory: Series = { times: [], values: new Map() };
  exitedHistory: Series = { times: [], values: new Map() };
  commandedHistory: Series = { times: [], values: new Map() };
  listeners: (() => void)[] = [];

  apply(msg: ServerMessage): void {
    if (msg.type === "scenario") {
      this.scenario = msg;
      this.frame = null;
      this.selected = null;
      this.dragBlock = null;
      this.levelHistory = { times: [], values: new Map() };
      this.exitedHistory = { times: [], values: new Map() };
      this.commandedHistory = { times: [], values: new Map() };
    } else if (msg.type === "frame") {
      const repeat =
        this.frame !== null &&
        msg.t === this.frame.t &&
        this.levelHistory.times.length > 0;
      this.frame = msg;
      if (!repeat) {
        pushSeries(this.levelHistory, msg.t, msg.levels);
        pushSeries(this.exitedHistory, msg.t, msg.exited);
        pushSeries(this.commandedHistory, msg.t, msg.commanded);
      }
    } else {
      this.errors.push(msg.detail);
      if (this.errors.length > 50) this.errors.shift();
    }
    for (const fn of this.listeners) fn();
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  vesselIds(): string[] {
    return (this.scenario?.nodes ?? []).filter((n) => n.kind === "vessel").map((n) => n.id);
  }

  nodeIds(): string[] {
    return (this.scenario?.nodes ?? []).map((n) => n.id);
  }

  /** Displayed value for a node level: Hz and cm coincide under the identity
   * unit map, only the labeling changes with the domain toggle. */
  displayedLevel(node: string): number | null {
    if (!this.frame) return null;
    return this.domain === "hydraulic"
      ? this.frame.levels[node] ?? null
      : this.frame.electrical.freq_hz[node] ?? null;
  }

  displayedOutput(vessel: string): number | null {
    if (!this.frame) return null;
    return this.domain === "hydraulic"
      ? this.frame.exited[vessel] ?? null
      : this.frame.electrical.power_out[vessel] ?? null;
  }

  unitLabels(): { level: string; output: string } {
    return this.domain === "hydraulic"
      ? { level: "cm", output: "cm³" }
      : { level: "Hz", output: "W·s" };
  }
}
