import { describe, expect, it } from "vitest";

import { HISTORY_CAPACITY, Store } from "../src/state.js";
import { fakeFrame, fakeScenario } from "./helpers.js";

describe("Store", () => {
  it("tracks the latest frame and builds history", () => {
    const store = new Store();
    store.apply(fakeScenario());
    store.apply(fakeFrame(0));
    store.apply(fakeFrame(0.05, { levels: { v1: 61, v2: 60, v3: 60, v4: 60 } }));
    expect(store.frame?.t).toBe(0.05);
    expect(store.levelHistory.times).toEqual([0, 0.05]);
    expect(store.levelHistory.values.get("v1")).toEqual([60, 61]);
  });

  it("does not duplicate paused frames in the history", () => {
    const store = new Store();
    store.apply(fakeScenario());
    store.apply(fakeFrame(1.0));
    store.apply(fakeFrame(1.0, { paused: true }));
    store.apply(fakeFrame(1.0, { paused: true }));
    expect(store.levelHistory.times).toEqual([1.0]);
    expect(store.frame?.paused).toBe(true);
  });

  it("caps the history ring buffer", () => {
    const store = new Store();
    store.apply(fakeScenario());
    for (let i = 0; i < HISTORY_CAPACITY + 50; i++) store.apply(fakeFrame(i * 0.05));
    expect(store.levelHistory.times.length).toBe(HISTORY_CAPACITY);
    expect(store.levelHistory.values.get("v1")!.length).toBe(HISTORY_CAPACITY);
  });

  it("a new scenario clears everything", () => {
    const store = new Store();
    store.apply(fakeScenario());
    store.apply(fakeFrame(3));
    store.selected = "v2";
    store.apply(fakeScenario());
    expect(store.frame).toBeNull();
    expect(store.selected).toBeNull();
    expect(store.levelHistory.times).toEqual([]);
  });

  it("collects error messages", () => {
    const store = new Store();
    store.apply({ type: "error", detail: "no scenario loaded; send a reset first" });
    expect(store.errors).toHaveLength(1);
  });

  it("displayed electrical values equal hydraulic ones under the identity map", () => {
    const store = new Store();
    store.apply(fakeScenario());
    store.apply(
      fakeFrame(2, {
        levels: { v1: 63, v2: 63, v3: 63, v4: 63 },
        exited: { v1: -3.75, v2: 22.5, v3: -7.5, v4: -11.25 },
        electrical: {
          freq_hz: { v1: 63, v2: 63, v3: 63, v4: 63 },
          power_out: { v1: -3.75, v2: 22.5, v3: -7.5, v4: -11.25 },
          setpoint_w: { v1: 0, v2: 30, v3: 0, v4: 0 },
        },
      }),
    );
    for (const id of store.vesselIds()) {
      store.domain = "hydraulic";
      const hydraulic = [store.displayedLevel(id), store.displayedOutput(id)];
      store.domain = "electrical";
      const electrical = [store.displayedLevel(id), store.displayedOutput(id)];
      expect(electrical).toEqual(hydraulic);
    }
    expect(store.unitLabels().level).toBe("Hz");
    store.domain = "hydraulic";
    expect(store.unitLabels().level).toBe("cm");
  });

  it("notifies listeners on every message", () => {
    const store = new Store();
    let calls = 0;
    store.onChange(() => calls++);
    store.apply(fakeScenario());
    store.apply(fakeFrame(0));
    expect(calls).toBe(2);
  });
});
