// Two stacked strip charts mirroring the demo figures: levels/frequencies on
// top, exited volumes/powers (with dashed setpoints) below.

import type { Series, Store } from "./state.js";

const PALETTE = ["#4f9dff", "#ff9f43", "#2ecc71", "#e74c3c", "#b48ef5", "#4dd0e1"];

interface Panel {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function colorFor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function renderPlots(ctx: CanvasRenderingContext2D, store: Store): void {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!store.frame || store.levelHistory.times.length < 2) return;
  const labels = store.unitLabels();
  const half = canvas.height / 2;
  drawPanel(
    ctx,
    { x: 46, y: 8, w: canvas.width - 56, h: half - 22 },
    store.levelHistory,
    null,
    store.nodeIds(),
    `level (${labels.level})`,
  );
  drawPanel(
    ctx,
    { x: 46, y: half + 8, w: canvas.width - 56, h: half - 22 },
    store.exitedHistory,
    store.commandedHistory,
    store.vesselIds(),
    `exited (${labels.output})`,
  );
}

function drawPanel(
  ctx: CanvasRenderingContext2D,
  panel: Panel,
  series: Series,
  dashed: Series | null,
  keys: string[],
  label: string,
): void {
  const times = series.times;
  const t0 = times[0];
  const t1 = times[times.length - 1];
  const span = Math.max(t1 - t0, 1e-9);

  let lo = Infinity;
  let hi = -Infinity;
  for (const src of dashed ? [series, dashed] : [series]) {
    for (const key of keys) {
      const arr = src.values.get(key);
      if (!arr) continue;
      for (const v of arr) {
        if (Number.isNaN(v)) continue;
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!Number.isFinite(lo)) return;
  const pad = Math.max((hi - lo) * 0.1, 0.5);
  lo -= pad;
  hi += pad;

  const xOf = (t: number) => panel.x + ((t - t0) / span) * panel.w;
  const yOf = (v: number) => panel.y + panel.h - ((v - lo) / (hi - lo)) * panel.h;

  ctx.strokeStyle = "#3a3a44";
  ctx.lineWidth = 1;
  ctx.strokeRect(panel.x, panel.y, panel.w, panel.h);
  ctx.fillStyle = "#999";
  ctx.font = "10px sans-serif";
  ctx.fillText(label, panel.x + 4, panel.y + 11);
  ctx.fillText(hi.toFixed(1), panel.x - 40, panel.y + 10);
  ctx.fillText(lo.toFixed(1), panel.x - 40, panel.y + panel.h);

  keys.forEach((key, i) => {
    plotLine(ctx, series, key, xOf, yOf, colorFor(i), []);
    if (dashed) plotLine(ctx, dashed, key, xOf, yOf, colorFor(i), [5, 4]);
  });

  // legend with the latest values
  const lx = panel.x + panel.w - 8;
  ctx.textAlign = "right";
  keys.forEach((key, i) => {
    const arr = series.values.get(key);
    const latest = arr ? arr[arr.length - 1] : NaN;
    ctx.fillStyle = colorFor(i);
    ctx.fillText(`${key} ${latest.toFixed(2)}`, lx, panel.y + 11 + 11 * i);
  });
  ctx.textAlign = "left";
}

function plotLine(
  ctx: CanvasRenderingContext2D,
  series: Series,
  key: string,
  xOf: (t: number) => number,
  yOf: (v: number) => number,
  color: string,
  dash: number[],
): void {
  const arr = series.values.get(key);
  if (!arr) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.4;
  ctx.setLineDash(dash);
  ctx.beginPath();
  let started = false;
  for (let i = 0; i < series.times.length; i++) {
    const v = arr[i];
    if (Number.isNaN(v)) continue;
    const x = xOf(series.times[i]);
    const y = yOf(v);
    if (started) ctx.lineTo(x, y);
    else {
      ctx.moveTo(x, y);
      started = true;
    }
  }
  ctx.stroke();
  ctx.setLineDash([]);
}
