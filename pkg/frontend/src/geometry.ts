// Pure scene layout: vessels with true relative cross-sections, blocks and
// holes, pipes, and the dual-graduated ruler. No canvas calls here so the
// math stays unit-testable.

import { areaAt, FrameMsg, NodeSpec, ScenarioMsg } from "./protocol.js";

export const RULER_TOP_CM = 130;
export const RULER_BOTTOM_CM = -30;
const TANK_WIDTH_FACTOR = 1.4;

export interface VesselGeom {
  id: string;
  kind: "vessel" | "tank";
  cx: number;
  baseY: number; // y of the vessel's own floor (after elevation)
  topY: number;
  waterY: number;
  halfWidthAt: (levelCm: number) => number; // silhouette, level above base
  maxHalfWidth: number;
  blockRect: { x: number; y: number; w: number; h: number } | null; // hole if below ground
  elevationCm: number;
  levelCm: number; // absolute level
}

export interface PipeGeom {
  id: string;
  from: [number, number];
  to: [number, number];
  mid: [number, number];
  open: boolean;
  flow: number;
}

export interface RulerTick {
  y: number;
  cm: number;
}

export interface Scene {
  width: number;
  height: number;
  groundY: number;
  pxPerCm: number;
  vessels: VesselGeom[];
  pipes: PipeGeom[];
  ruler: { x: number; ticks: RulerTick[] };
  yOf: (absoluteCm: number) => number;
}

export function layoutScene(
  scenario: ScenarioMsg,
  frame: FrameMsg,
  width: number,
  height: number,
): Scene {
  const pxPerCm = height / (RULER_TOP_CM - RULER_BOTTOM_CM);
  const yOf = (cm: number) => height - (cm - RULER_BOTTOM_CM) * pxPerCm;
  const groundY = yOf(0);

  const nodes = scenario.nodes;
  const areas = nodes.map((n) => nominalArea(n));
  const maxArea = Math.max(...areas, 1);
  const rulerWidth = 64;
  const usable = width - rulerWidth - 20;
  // width proportional to cross-section, normalized so everything fits
  const totalUnits = areas.reduce((acc, a) => acc + a / maxArea, 0);
  const gap = usable / (nodes.length + 1) / 2;
  const unitWidth = (usable - gap * (nodes.length + 1)) / totalUnits;

  const vessels: VesselGeom[] = [];
  let x = gap;
  nodes.forEach((n, i) => {
    const w = (areas[i] / maxArea) * unitWidth * (n.kind === "tank" ? TANK_WIDTH_FACTOR : 1);
    const cx = x + w / 2;
    x += w + gap;
    const elevation = n.kind === "tank" ? 0 : frame.base_elevation[n.id] ?? 0;
    const level = frame.levels[n.id] ?? 0;
    const maxH = n.kind === "tank" ? RULER_TOP_CM : n.max_height_cm ?? 120;
    // silhouette half-width: the widest point of the body spans w/2
    const profileHalf = (h: number) =>
      n.kind === "tank" || !n.profile ? w / 2 : (areaAt(n.profile, h) / areas[i]) * (w / 2);
    let blockRect: VesselGeom["blockRect"] = null;
    if (n.kind === "vessel" && elevation !== 0) {
      const top = Math.max(elevation, 0);
      const bottom = Math.min(elevation, 0);
      blockRect = {
        x: cx - profileHalf(0),
        y: yOf(top),
        w: 2 * profileHalf(0),
        h: (top - bottom) * pxPerCm,
      };
    }
    vessels.push({
      id: n.id,
      kind: n.kind,
      cx,
      baseY: yOf(elevation),
      topY: yOf(elevation + maxH),
      waterY: yOf(level),
      halfWidthAt: profileHalf,
      maxHalfWidth: w / 2,
      blockRect,
      elevationCm: elevation,
      levelCm: level,
    });
  });

  const byId = new Map(vessels.map((v) => [v.id, v]));
  const pipes: PipeGeom[] = scenario.pipes.map((p, i) => {
    const a = byId.get(p.ends[0])!;
    const b = byId.get(p.ends[1])!;
    const depth = groundY + 18 + 10 * (i % 3); // stagger parallel runs
    const from: [number, number] = [a.cx, a.baseY];
    const to: [number, number] = [b.cx, b.baseY];
    return {
      id: p.id,
      from,
      to,
      mid: [(a.cx + b.cx) / 2, depth],
      open: frame.valves[p.id] ?? true,
      flow: frame.flows[p.id] ?? 0,
    };
  });

  const ticks: RulerTick[] = [];
  for (let cm = RULER_BOTTOM_CM + 10; cm <= RULER_TOP_CM - 10; cm += 10) {
    ticks.push({ y: yOf(cm), cm });
  }
  return {
    width,
    height,
    groundY,
    pxPerCm,
    vessels,
    pipes,
    ruler: { x: width - rulerWidth, ticks },
    yOf,
  };
}

function nominalArea(n: NodeSpec): number {
  if (n.kind === "tank") return 6;
  if (!n.profile) return 1;
  if (n.profile.kind === "uniform") return n.profile.area_cm2 ?? 1;
  // shaped bodies: use the widest point so the drawing never clips
  if (n.profile.kind === "piecewise") {
    return Math.max(...(n.profile.segments ?? []).map((s) => s.area_cm2), 1);
  }
  return Math.max(...(n.profile.points ?? []).map((p) => p.area_cm2), 1);
}

export type Hit =
  | { kind: "vessel"; id: string }
  | { kind: "valve"; id: string }
  | null;

export function hitTest(scene: Scene, x: number, y: number): Hit {
  for (const p of scene.pipes) {
    const [mx, my] = p.mid;
    if ((x - mx) ** 2 + (y - my) ** 2 <= 10 ** 2) return { kind: "valve", id: p.id };
  }
  for (const v of scene.vessels) {
    if (v.kind !== "vessel") continue;
    const half = v.maxHalfWidth + 6;
    if (x >= v.cx - half && x <= v.cx + half && y >= v.topY && y <= scene.groundY + 30) {
      return { kind: "vessel", id: v.id };
    }
  }
  return null;
}

/** Convert a vertical pixel position to a block elevation for drag edits. */
export function dragElevationCm(scene: Scene, y: number): number {
  return (scene.groundY - y) / scene.pxPerCm;
}
