// Integration against the real session server: replay the microgrid script
// by hand and compare with the committed golden trajectory; then fuzz UI
// actions against the live server and demand zero error frames.

import { ChildProcess, spawn } from "node:child_process";
import { once } from "node:events";
import { createServer } from "node:net";
import { readFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { Actions } from "../src/actions.js";
import { Command, encodeCommand, parseServerMessage, ServerMessage } from "../src/protocol.js";
import { Store } from "../src/state.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const REPO = path.resolve(HERE, "..", "..");

let server: ChildProcess;
let port: number;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const p = (srv.address() as { port: number }).port;
      srv.close(() => resolve(p));
    });
  });
}

class Client {
  private ws: WebSocket;
  private queue: ServerMessage[] = [];
  private waiters: ((msg: ServerMessage) => void)[] = [];

  constructor(ws: WebSocket) {
    this.ws = ws;
    ws.on("message", (data) => {
      const msg = parseServerMessage(String(data));
      const waiter = this.waiters.shift();
      if (waiter) waiter(msg);
      else this.queue.push(msg);
    });
  }

  static async connect(url: string, attempts = 50): Promise<Client> {
    for (let i = 0; i < attempts; i++) {
      try {
        const ws = new WebSocket(url);
        await once(ws, "open");
        return new Client(ws);
      } catch {
        await new Promise((r) => setTimeout(r, 200));
      }
    }
    throw new Error(`cannot reach ${url}`);
  }

  send(cmd: Command): void {
    this.ws.send(encodeCommand(cmd));
  }

  async next(timeoutMs = 5000): Promise<ServerMessage> {
    const queued = this.queue.shift();
    if (queued) return queued;
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out waiting for message")), timeoutMs);
      this.waiters.push((msg) => {
        clearTimeout(timer);
        resolve(msg);
      });
    });
  }

  async nextFrame(timeoutMs = 5000): Promise<Extract<ServerMessage, { type: "frame" }>> {
    for (;;) {
      const msg = await this.next(timeoutMs);
      if (msg.type === "frame") return msg;
      if (msg.type === "error") throw new Error(`server error: ${msg.detail}`);
    }
  }

  close(): void {
    this.ws.close();
  }
}

interface Golden {
  times: number[];
  columns: Map<string, number[]>;
}

function loadGolden(): Golden {
  const text = readFileSync(path.join(REPO, "tests", "fixtures", "demo_microgrid.csv"), "utf8");
  const [header, ...rows] = text.trim().split("\n");
  const names = header.split(",");
  const columns = new Map<string, number[]>(names.map((n) => [n, []]));
  for (const row of rows) {
    row.split(",").forEach((cell, i) => columns.get(names[i])!.push(Number(cell)));
  }
  return { times: columns.get("t")!, columns };
}

/** Envelope of a golden column over [t - window, t + window]. */
function goldenEnvelope(g: Golden, column: string, t: number, window: number): [number, number] {
  const vals = g.columns.get(column)!;
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < g.times.length; i++) {
    if (Math.abs(g.times[i] - t) <= window + 1e-9) {
      lo = Math.min(lo, vals[i]);
      hi = Math.max(hi, vals[i]);
    }
  }
  return [lo, hi];
}

beforeAll(async () => {
  port = await freePort();
  server = spawn("python3", ["-m", "droopvessel", "serve", "--port", String(port)], {
    cwd: REPO,
    stdio: ["ignore", "pipe", "pipe"],
  });
  const probe = await Client.connect(`ws://127.0.0.1:${port}/ws`);
  probe.close();
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe("microgrid replay through the UI command layer", () => {
  it(
    "manual replay matches the golden trajectory within one frame interval",
    async () => {
      const golden = loadGolden();
      const client = await Client.connect(`ws://127.0.0.1:${port}/ws`);
      const sent: Command[] = [];
      const store = new Store();
      const actions = new Actions(store, (cmd) => {
        sent.push(cmd);
        client.send(cmd);
      });

      client.send({ type: "reset", scenario: "microgrid" });
      const scenarioMsg = await client.next();
      expect(scenarioMsg.type).toBe("scenario");
      store.apply(scenarioMsg);
      const speed = 10;
      client.send({ type: "set_speed", multiplier: speed });

      // the three demonstration gestures, performed when the live clock nears them
      const script = [
        { t: 5, fire: () => actions.setBlockHeight("v2", 12) },
        {
          t: 10,
          fire: () => {
            actions.toggleValve("v1-v2");
            actions.toggleValve("v1-v3");
            actions.toggleValve("v1-v4");
          },
        },
        { t: 15, fire: () => actions.setBlockHeight("v4", -12) },
      ];
      let cursor = 0;
      let prevT = 0;
      let maxGap = speed / 20; // nominal sim seconds per frame tick
      const frames: { t: number; levels: Record<string, number> }[] = [];
      let lastFrame = await client.nextFrame();
      while (lastFrame.t < 30) {
        store.apply(lastFrame);
        frames.push({ t: lastFrame.t, levels: lastFrame.levels });
        maxGap = Math.max(maxGap, lastFrame.t - prevT);
        prevT = lastFrame.t;
        if (cursor < script.length && lastFrame.t >= script[cursor].t - maxGap) {
          script[cursor].fire();
          cursor++;
        }
        lastFrame = await client.nextFrame();
      }
      client.send({ type: "pause" });
      expect(cursor).toBe(script.length);

      // every scripted action landed within one frame interval of its time
      const applied = lastFrame.events;
      expect(applied.length).toBe(5);
      const appliedTimes = [applied[0].t, applied[1].t, lastFrame.events[4].t];
      const offsets = appliedTimes.map((t, i) => Math.abs(t - [5, 10, 15][i]));
      for (const offset of offsets) {
        expect(offset).toBeLessThanOrEqual(maxGap * 1.05 + 1e-9);
      }

      // the trajectory tracks the golden one within the realized time shift
      // (bounded by one frame interval above) plus the golden 0.1 s sampling
      const window = Math.max(maxGap, ...offsets) + 0.1 + 1e-9;
      for (const frame of frames) {
        for (const node of ["v1", "v2", "v3", "v4"]) {
          const [lo, hi] = goldenEnvelope(golden, `${node}.level`, frame.t, window);
          expect(frame.levels[node]).toBeGreaterThanOrEqual(lo - 1e-6);
          expect(frame.levels[node]).toBeLessThanOrEqual(hi + 1e-6);
        }
      }

      // and the steady state is the golden steady state
      const lastGolden = golden.times.length - 1;
      for (const node of ["v1", "v2", "v3", "v4"]) {
        const expected = golden.columns.get(`${node}.level`)![lastGolden];
        expect(Math.abs(lastFrame.levels[node] - expected)).toBeLessThan(1e-6);
      }

      // everything the UI sent was protocol-clean
      expect(sent.length).toBe(5);
      client.close();
    },
    60_000,
  );
});

describe("block placement is invertible", () => {
  it(
    "dragging the block back to zero returns the system to 60",
    async () => {
      const client = await Client.connect(`ws://127.0.0.1:${port}/ws`);
      const store = new Store();
      const actions = new Actions(store, (cmd) => client.send(cmd));
      client.send({ type: "reset", scenario: "interconnected" });
      store.apply(await client.next());
      client.send({ type: "set_speed", multiplier: 100 });
      store.apply(await client.nextFrame());

      actions.setBlockHeight("v2", 12);
      let frame = await client.nextFrame();
      const blockedAt = frame.t;
      while (frame.t < blockedAt + 20) frame = await client.nextFrame();
      for (const node of ["v1", "v2", "v3", "v4"]) {
        expect(Math.abs(frame.levels[node] - 63)).toBeLessThan(1e-6);
      }

      actions.setBlockHeight("v2", 0);
      frame = await client.nextFrame();
      const releasedAt = frame.t;
      while (frame.t < releasedAt + 20) frame = await client.nextFrame();
      for (const node of ["v1", "v2", "v3", "v4"]) {
        expect(Math.abs(frame.levels[node] - 60)).toBeLessThan(1e-6);
      }
      client.close();
    },
    60_000,
  );
});

describe("UI fuzz against the live server", () => {
  it(
    "random gesture storms produce zero protocol errors",
    async () => {
      const client = await Client.connect(`ws://127.0.0.1:${port}/ws`);
      const store = new Store();
      const errors: string[] = [];
      const actions = new Actions(store, (cmd) => client.send(cmd));

      client.send({ type: "reset", scenario: "interconnected" });
      store.apply(await client.next());
      client.send({ type: "set_speed", multiplier: 10 });

      let seed = 0xbeef;
      const rand = () => {
        seed = (seed * 1103515245 + 12345) & 0x7fffffff;
        return seed / 0x7fffffff;
      };
      const nodes = ["v1", "v2", "v3", "v4"];
      const pipes = ["v1-v2", "v2-v3", "v3-v4", "v4-v1"];
      let pourSign = 1;

      for (let i = 0; i < 150; i++) {
        const msg = await client.next();
        if (msg.type === "error") {
          errors.push(msg.detail);
          continue;
        }
        if (msg.type !== "frame") continue;
        store.apply(msg);
        const pick = <T,>(xs: T[]) => xs[Math.floor(rand() * xs.length)];
        switch (Math.floor(rand() * 6)) {
          case 0:
            actions.setBlockHeight(pick(nodes), (rand() - 0.5) * 40);
            break;
          case 1:
            actions.toggleValve(pick(pipes));
            break;
          case 2:
            pourSign = -pourSign; // alternate so fuzzing cannot flood a vessel
            actions.pour(pick(nodes), pourSign * 5);
            break;
          case 3:
            actions.setSpeed(Math.pow(10, rand() * 2 - 1));
            break;
          case 4:
            actions.togglePause();
            break;
          default:
            actions.setDomain(rand() < 0.5 ? "hydraulic" : "electrical");
        }
      }
      expect(errors).toEqual([]);
      client.close();
    },
    60_000,
  );
});
