// Bootstrap: wire the store, transport, renderers, and DOM controls.

import { Actions } from "./actions.js";
import { dragElevationCm, hitTest, Scene } from "./geometry.js";
import { renderOneLine, renderScene } from "./render.js";
import { renderPlots } from "./plots.js";
import { Store } from "./state.js";
import { connect } from "./socket.js";

const store = new Store();
const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const transport = connect(
  wsUrl,
  (msg) => store.apply(msg),
  (up) => {
    statusEl.textContent = up ? "connected" : "reconnecting…";
    statusEl.className = up ? "status up" : "status down";
    if (up) actions.resetScenario(scenarioSel.value);
  },
);
const actions = new Actions(store, (cmd) => transport.send(cmd));

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
const vesselCanvas = $<HTMLCanvasElement>("vessels");
const onelineCanvas = $<HTMLCanvasElement>("oneline");
const plotCanvas = $<HTMLCanvasElement>("plots");
const statusEl = $<HTMLSpanElement>("status");
const scenarioSel = $<HTMLSelectElement>("scenario");
const speedSlider = $<HTMLInputElement>("speed");
const speedLabel = $<HTMLSpanElement>("speed-label");
const pauseBtn = $<HTMLButtonElement>("pause");
const timeEl = $<HTMLSpanElement>("sim-time");
const logEl = $<HTMLUListElement>("event-log");
const domainInputs = document.querySelectorAll<HTMLInputElement>("input[name=domain]");

let scene: Scene | null = null;
let drag: { node: string } | null = null;

function redraw(): void {
  scene = renderScene(vesselCanvas.getContext("2d")!, store);
  renderOneLine(onelineCanvas.getContext("2d")!, store);
  renderPlots(plotCanvas.getContext("2d")!, store);
  const f = store.frame;
  if (f) {
    timeEl.textContent = `t = ${f.t.toFixed(2)} s`;
    pauseBtn.textContent = f.paused ? "▶ resume" : "⏸ pause";
  }
  const entries = f?.events ?? [];
  logEl.replaceChildren(
    ...entries
      .slice(-8)
      .reverse()
      .map((e) => {
        const li = document.createElement("li");
        li.textContent = `t=${e.t.toFixed(2)}  ${e.desc}`;
        return li;
      }),
  );
  const errors = store.errors.slice(-2);
  if (errors.length) {
    const li = document.createElement("li");
    li.textContent = `error: ${errors[errors.length - 1]}`;
    li.className = "error";
    logEl.prepend(li);
  }
}

store.onChange(redraw);
redraw();

// -- controls ---------------------------------------------------------------

scenarioSel.addEventListener("change", () => actions.resetScenario(scenarioSel.value));
$<HTMLButtonElement>("reset").addEventListener("click", () =>
  actions.resetScenario(scenarioSel.value),
);
$<HTMLButtonElement>("autoplay").addEventListener("click", () =>
  actions.resetScenario(scenarioSel.value, true),
);
pauseBtn.addEventListener("click", () => actions.togglePause());

speedSlider.addEventListener("input", () => {
  // logarithmic slider from 0.1x to 100x
  const speed = Math.pow(10, Number(speedSlider.value));
  actions.setSpeed(speed);
  speedLabel.textContent = `${speed.toFixed(speed < 1 ? 1 : 0)}×`;
});

domainInputs.forEach((el) =>
  el.addEventListener("change", () => {
    actions.setDomain(el.value as "hydraulic" | "electrical");
    redraw();
  }),
);

$<HTMLButtonElement>("pour").addEventListener("click", () => {
  if (store.selected) actions.pour(store.selected);
});
$<HTMLButtonElement>("scoop").addEventListener("click", () => {
  if (store.selected) actions.scoop(store.selected);
});
$<HTMLButtonElement>("clear-block").addEventListener("click", () => {
  if (store.selected) actions.setBlockHeight(store.selected, 0);
});

// -- canvas interaction -------------------------------------------------------

function canvasPos(ev: MouseEvent): [number, number] {
  const rect = vesselCanvas.getBoundingClientRect();
  return [
    ((ev.clientX - rect.left) / rect.width) * vesselCanvas.width,
    ((ev.clientY - rect.top) / rect.height) * vesselCanvas.height,
  ];
}

vesselCanvas.addEventListener("mousedown", (ev) => {
  if (!scene) return;
  const [x, y] = canvasPos(ev);
  const hit = hitTest(scene, x, y);
  if (!hit) return;
  if (hit.kind === "valve") {
    actions.toggleValve(hit.id);
  } else {
    store.selected = hit.id;
    drag = { node: hit.id };
    redraw();
  }
});

vesselCanvas.addEventListener("mousemove", (ev) => {
  if (!drag || !scene) return;
  const [, y] = canvasPos(ev);
  actions.setBlockHeight(drag.node, dragElevationCm(scene, y));
});

window.addEventListener("mouseup", () => {
  drag = null;
});

window.addEventListener("beforeunload", () => transport.close());
