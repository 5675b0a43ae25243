// The only path from user gestures to the wire: every action builds a
// command, validates it, and hands it to the transport. Fuzzing this layer
// must never produce an invalid message.

import {
  BUILTIN_SCENARIOS,
  Command,
  SPEED_MAX,
  SPEED_MIN,
  validateCommand,
} from "./protocol.js";
import type { Store } from "./state.js";

export const BLOCK_MIN_CM = -60;
export const BLOCK_MAX_CM = 60;
export const POUR_STEP_CM3 = 10;

const clamp = (x: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, x));

export class Actions {
  constructor(
    private store: Store,
    private send: (cmd: Command) => void,
  ) {}

  private emit(cmd: Command): void {
    const problem = validateCommand(cmd);
    if (problem) throw new Error(problem); // a bug in the UI, not the user
    this.send(cmd);
  }

  resetScenario(name: string, includeEvents = false): void {
    const known = (BUILTIN_SCENARIOS as readonly string[]).includes(name);
    this.emit({ type: "reset", scenario: known ? name : "interconnected", include_events: includeEvents });
  }

  /** Drag a block under a vessel (or dig a hole when negative). */
  setBlockHeight(node: string, elevationCm: number): void {
    if (!this.store.vesselIds().includes(node)) return;
    const snapped = Math.round(clamp(elevationCm, BLOCK_MIN_CM, BLOCK_MAX_CM) * 10) / 10;
    this.emit({ type: "set_block", node, elevation_cm: snapped });
  }

  toggleValve(pipe: string): void {
    const frame = this.store.frame;
    if (!frame || !(pipe in frame.valves)) return;
    this.emit({ type: "set_valve", pipe, open: !frame.valves[pipe] });
  }

  pour(node: string, amountCm3 = POUR_STEP_CM3): void {
    if (!this.store.vesselIds().includes(node)) return;
    this.emit({ type: "inject", node, volume_cm3: amountCm3 });
  }

  scoop(node: string, amountCm3 = POUR_STEP_CM3): void {
    this.pour(node, -Math.abs(amountCm3));
  }

  setSpeed(multiplier: number): void {
    this.emit({ type: "set_speed", multiplier: clamp(multiplier, SPEED_MIN, SPEED_MAX) });
  }

  togglePause(): void {
    const paused = this.store.frame?.paused ?? false;
    this.emit({ type: paused ? "resume" : "pause" });
  }

  setDomain(domain: "hydraulic" | "electrical"): void {
    this.store.domain = domain; // pure re-labeling, nothing goes on the wire
  }
}
