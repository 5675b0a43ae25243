// Canvas painting for the vessel scene and the one-line grid diagram.

import { layoutScene, Scene } from "./geometry.js";
import type { Store } from "./state.js";

const WATER = "#3f8efc";
const WATER_DEEP = "#2f6fd0";
const WALL = "#4a4a55";
const BLOCK = "#a5703f";
const HOLE = "#2b2b33";
const GROUND = "#6b6b76";

export function renderScene(ctx: CanvasRenderingContext2D, store: Store): Scene | null {
  const { scenario, frame } = store;
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!scenario || !frame) {
    ctx.fillStyle = "#888";
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for a scenario…", 20, 30);
    return null;
  }
  const scene = layoutScene(scenario, frame, canvas.width, canvas.height);

  // ground
  ctx.strokeStyle = GROUND;
  ctx.lineWidth = 1;
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, scene.groundY);
  ctx.lineTo(scene.ruler.x - 6, scene.groundY);
  ctx.stroke();
  ctx.setLineDash([]);

  drawPipes(ctx, scene);
  for (const v of scene.vessels) drawVessel(ctx, scene, v, store);
  drawRuler(ctx, scene);
  return scene;
}

function drawVessel(
  ctx: CanvasRenderingContext2D,
  scene: Scene,
  v: Scene["vessels"][number],
  store: Store,
) {
  if (v.blockRect) {
    ctx.fillStyle = v.elevationCm > 0 ? BLOCK : HOLE;
    ctx.fillRect(v.blockRect.x, v.blockRect.y, v.blockRect.w, v.blockRect.h);
    ctx.strokeStyle = "#222";
    ctx.strokeRect(v.blockRect.x, v.blockRect.y, v.blockRect.w, v.blockRect.h);
  }

  const steps = 24;
  const topLevel = (scene.groundY - v.topY) / scene.pxPerCm - v.elevationCm;
  const leftWall: [number, number][] = [];
  const rightWall: [number, number][] = [];
  for (let i = 0; i <= steps; i++) {
    const h = (topLevel * i) / steps;
    const y = v.baseY - h * scene.pxPerCm;
    const half = v.halfWidthAt(h);
    leftWall.push([v.cx - half, y]);
    rightWall.push([v.cx + half, y]);
  }

  // water fill up to the current absolute level
  const waterTopH = Math.max(0, (v.baseY - v.waterY) / scene.pxPerCm);
  if (waterTopH > 0) {
    ctx.beginPath();
    ctx.moveTo(v.cx - v.halfWidthAt(0), v.baseY);
    for (let i = 0; i <= steps; i++) {
      const h = (waterTopH * i) / steps;
      ctx.lineTo(v.cx - v.halfWidthAt(h), v.baseY - h * scene.pxPerCm);
    }
    for (let i = steps; i >= 0; i--) {
      const h = (waterTopH * i) / steps;
      ctx.lineTo(v.cx + v.halfWidthAt(h), v.baseY - h * scene.pxPerCm);
    }
    ctx.closePath();
    const grad = ctx.createLinearGradient(0, v.waterY, 0, v.baseY);
    grad.addColorStop(0, WATER);
    grad.addColorStop(1, WATER_DEEP);
    ctx.fillStyle = grad;
    ctx.globalAlpha = v.kind === "tank" ? 0.7 : 0.9;
    ctx.fill();
    ctx.globalAlpha = 1;
  }

  // walls
  ctx.strokeStyle = store.selected === v.id ? "#ffd866" : WALL;
  ctx.lineWidth = store.selected === v.id ? 3 : 2;
  ctx.beginPath();
  for (const [i, [x, y]] of leftWall.entries()) (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y));
  ctx.stroke();
  ctx.beginPath();
  for (const [i, [x, y]] of rightWall.entries()) (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y));
  ctx.stroke();
  ctx.beginPath(); // floor
  ctx.moveTo(v.cx - v.halfWidthAt(0), v.baseY);
  ctx.lineTo(v.cx + v.halfWidthAt(0), v.baseY);
  ctx.stroke();

  // labels: id above, level value at the surface
  ctx.fillStyle = "#ddd";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(v.id, v.cx, v.topY - 6);
  const value = store.displayedLevel(v.id);
  if (value !== null) {
    ctx.fillStyle = "#9ecbff";
    ctx.fillText(value.toFixed(2), v.cx, v.waterY - 4);
  }
  if (v.kind === "tank") {
    ctx.fillStyle = "#aaa";
    ctx.fillText("∞", v.cx, (v.topY + v.waterY) / 2);
  }
  ctx.textAlign = "left";
}

function drawPipes(ctx: CanvasRenderingContext2D, scene: Scene) {
  for (const p of scene.pipes) {
    const [mx, my] = p.mid;
    ctx.strokeStyle = p.open ? "#8a8a96" : "#50505a";
    ctx.lineWidth = 3;
    ctx.setLineDash(p.open ? [] : [5, 5]);
    ctx.beginPath();
    ctx.moveTo(p.from[0], p.from[1]);
    ctx.lineTo(p.from[0], my);
    ctx.lineTo(p.to[0], my);
    ctx.lineTo(p.to[0], p.to[1]);
    ctx.stroke();
    ctx.setLineDash([]);

    // flow arrow: direction and intensity
    const mag = Math.min(1, Math.abs(p.flow) / 20);
    if (p.open && mag > 0.005) {
      const dir = (p.flow > 0 ? 1 : -1) * Math.sign(p.to[0] - p.from[0]);
      ctx.strokeStyle = `rgba(120, 200, 255, ${0.35 + 0.65 * mag})`;
      ctx.lineWidth = 1.5 + 3 * mag;
      ctx.beginPath();
      ctx.moveTo(mx - 12 * dir, my);
      ctx.lineTo(mx + 12 * dir, my);
      ctx.lineTo(mx + 6 * dir, my - 4);
      ctx.moveTo(mx + 12 * dir, my);
      ctx.lineTo(mx + 6 * dir, my + 4);
      ctx.stroke();
    }

    // valve handle
    ctx.beginPath();
    ctx.arc(mx, my, 7, 0, Math.PI * 2);
    ctx.fillStyle = p.open ? "#46b26b" : "#c8503c";
    ctx.fill();
    ctx.strokeStyle = "#222";
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

function drawRuler(ctx: CanvasRenderingContext2D, scene: Scene) {
  const x = scene.ruler.x;
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(x, 8);
  ctx.lineTo(x, scene.height - 8);
  ctx.stroke();
  ctx.font = "10px sans-serif";
  for (const tick of scene.ruler.ticks) {
    ctx.beginPath();
    ctx.moveTo(x, tick.y);
    ctx.lineTo(x + 6, tick.y);
    ctx.stroke();
    ctx.fillStyle = "#bbb";
    // graduated in cm and Hz at once: identical numbers under the identity map
    ctx.fillText(`${tick.cm}`, x + 9, tick.y + 3);
  }
  ctx.fillStyle = "#bbb";
  ctx.fillText("cm | Hz", x + 6, 12);
}

// --------------------------------------------------------------------------
// One-line electrical diagram: the same network with grid symbols
// --------------------------------------------------------------------------

export function renderOneLine(ctx: CanvasRenderingContext2D, store: Store): void {
  const { scenario, frame } = store;
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!scenario || !frame) return;

  const nodes = scenario.nodes;
  const gap = canvas.width / (nodes.length + 1);
  const busY = canvas.height * 0.62;
  const pos = new Map<string, [number, number]>();
  nodes.forEach((n, i) => pos.set(n.id, [gap * (i + 1), busY]));

  for (const [i, p] of scenario.pipes.entries()) {
    const a = pos.get(p.ends[0])!;
    const b = pos.get(p.ends[1])!;
    const open = frame.valves[p.id] ?? true;
    const lift = 18 + 14 * (i % 3);
    ctx.strokeStyle = open ? "#9a9aa6" : "#55555f";
    ctx.setLineDash(open ? [] : [5, 4]);
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(a[0], a[1]);
    ctx.quadraticCurveTo((a[0] + b[0]) / 2, busY + lift + 26, b[0], b[1]);
    ctx.stroke();
    ctx.setLineDash([]);
    // breaker box at the midpoint
    const mx = (a[0] + b[0]) / 2;
    const my = busY + lift;
    ctx.fillStyle = open ? "#46b26b" : "#c8503c";
    ctx.fillRect(mx - 5, my - 5, 10, 10);
  }

  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  for (const n of nodes) {
    const [x, y] = pos.get(n.id)!;
    const freq = frame.electrical.freq_hz[n.id];
    if (n.kind === "tank") {
      ctx.strokeStyle = "#ccc";
      ctx.strokeRect(x - 13, y - 13, 26, 26);
      ctx.fillStyle = "#ccc";
      ctx.fillText("∞ grid", x, y + 3);
    } else {
      ctx.beginPath();
      ctx.arc(x, y, 14, 0, Math.PI * 2);
      ctx.strokeStyle = "#9ecbff";
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.fillStyle = "#9ecbff";
      ctx.fillText("~", x, y + 4); // grid-forming source symbol
    }
    ctx.fillStyle = "#ddd";
    ctx.fillText(n.id, x, y - 20);
    if (freq !== undefined) {
      ctx.fillStyle = "#8fd18f";
      ctx.fillText(`${freq.toFixed(3)} Hz`, x, y + 32);
    }
    const out = store.frame ? store.frame.electrical.power_out[n.id] : undefined;
    if (out !== undefined) {
      ctx.fillStyle = "#d8b65e";
      ctx.fillText(`P=${out.toFixed(1)}`, x, y + 46);
    }
  }
  ctx.textAlign = "left";
}
