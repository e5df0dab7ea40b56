// Top-down grid renderer. A pure view of the mirrored state: the same
// mirror always paints the same frame, and nothing here ever issues a
// command.

import { MirrorState } from "./mirror.js";
import { Cell } from "./protocol.js";

export interface GridView {
  offsetX: number; // canvas px of cell (min_x, min_z) corner
  offsetY: number;
  cellPx: number;
}

export const BLOCK_COLORS: Record<string, string> = {
  dirt: "#9b7653",
  grass: "#6aa84f",
  stone: "#8d8d8d",
  sand: "#e0cda0",
  water: "#4a86e8",
  ice: "#bfe3f2",
  soul_sand: "#5b4232",
};

const FALLBACK_BLOCK = "#c27ba0";

function shade(hex: string, factor: number): string {
  const n = parseInt(hex.slice(1), 16);
  const r = Math.min(255, Math.round(((n >> 16) & 0xff) * factor));
  const g = Math.min(255, Math.round(((n >> 8) & 0xff) * factor));
  const b = Math.min(255, Math.round((n & 0xff) * factor));
  return `rgb(${r},${g},${b})`;
}

export function cellAt(view: GridView, state: MirrorState, px: number, py: number): Cell | null {
  if (!state.terrain) return null;
  const { min_x, min_z, width, depth } = state.terrain.bounds;
  const x = Math.floor((px - view.offsetX) / view.cellPx) + min_x;
  const z = Math.floor((py - view.offsetY) / view.cellPx) + min_z;
  if (x < min_x || z < min_z || x >= min_x + width || z >= min_z + depth) return null;
  return [x, z];
}

export function fitView(state: MirrorState, canvasW: number, canvasH: number): GridView {
  if (!state.terrain) return { offsetX: 0, offsetY: 0, cellPx: 24 };
  const { width, depth } = state.terrain.bounds;
  const cellPx = Math.max(6, Math.floor(Math.min((canvasW - 20) / width, (canvasH - 20) / depth)));
  return {
    offsetX: Math.floor((canvasW - cellPx * width) / 2),
    offsetY: Math.floor((canvasH - cellPx * depth) / 2),
    cellPx,
  };
}

export function drawGrid(
  ctx: CanvasRenderingContext2D,
  state: MirrorState,
  view: GridView,
  canvasW: number,
  canvasH: number,
): void {
  ctx.clearRect(0, 0, canvasW, canvasH);
  if (!state.terrain) {
    ctx.fillStyle = "#666";
    ctx.font = "14px system-ui";
    ctx.fillText("no map loaded", 16, 28);
    return;
  }
  const { min_x, min_z, width, depth } = state.terrain.bounds;
  const cp = view.cellPx;
  const px = (x: number) => view.offsetX + (x - min_x) * cp;
  const py = (z: number) => view.offsetY + (z - min_z) * cp;

  let maxH = 1;
  for (const row of state.terrain.heights) for (const h of row) maxH = Math.max(maxH, h);

  for (let z = 0; z < depth; z++) {
    for (let x = 0; x < width; x++) {
      const block = state.terrain.blocks[z][x];
      const h = state.terrain.heights[z][x];
      const base = BLOCK_COLORS[block] ?? FALLBACK_BLOCK;
      ctx.fillStyle = shade(base, 0.7 + 0.3 * (h / maxH));
      ctx.fillRect(px(x + min_x), py(z + min_z), cp, cp);
      if (h > 1) {
        ctx.fillStyle = "rgba(0,0,0,0.35)";
        ctx.font = `${Math.max(8, cp * 0.32)}px system-ui`;
        ctx.fillText(String(h), px(x + min_x) + 2, py(z + min_z) + cp - 3);
      }
    }
  }

  // grid lines
  ctx.strokeStyle = "rgba(0,0,0,0.15)";
  ctx.lineWidth = 1;
  for (let x = 0; x <= width; x++) {
    ctx.beginPath();
    ctx.moveTo(px(x + min_x), py(min_z));
    ctx.lineTo(px(x + min_x), py(min_z + depth));
    ctx.stroke();
  }
  for (let z = 0; z <= depth; z++) {
    ctx.beginPath();
    ctx.moveTo(px(min_x), py(z + min_z));
    ctx.lineTo(px(min_x + width), py(z + min_z));
    ctx.stroke();
  }

  // per-algorithm coloring: visited solid, frontier translucent ring,
  // current bold, path as a line
  const visual = state.visual;
  if (visual) {
    const n = visual.traces.length || 1;
    for (let i = 0; i < visual.traces.length; i++) {
      const vt = visual.traces[i];
      const inset = 1 + i * Math.max(2, Math.floor(cp / (2 * n)));
      ctx.fillStyle = vt.color;
      ctx.globalAlpha = 0.55;
      for (const [x, z] of vt.visited) {
        ctx.fillRect(px(x) + inset, py(z) + inset, cp - 2 * inset, cp - 2 * inset);
      }
      ctx.globalAlpha = 0.9;
      ctx.strokeStyle = vt.color;
      ctx.lineWidth = 2;
      for (const [x, z] of vt.frontier) {
        ctx.strokeRect(px(x) + inset + 1, py(z) + inset + 1, cp - 2 * inset - 2, cp - 2 * inset - 2);
      }
      ctx.globalAlpha = 1;
      if (vt.path.length > 1) {
        ctx.beginPath();
        ctx.moveTo(px(vt.path[0][0]) + cp / 2, py(vt.path[0][1]) + cp / 2);
        for (const [x, z] of vt.path.slice(1)) {
          ctx.lineTo(px(x) + cp / 2, py(z) + cp / 2);
        }
        ctx.lineWidth = Math.max(2, cp / 6);
        ctx.strokeStyle = vt.color;
        ctx.stroke();
      }
      if (vt.current) {
        const [x, z] = vt.current;
        ctx.fillStyle = "#ffffff";
        ctx.fillRect(px(x) + 2, py(z) + 2, cp - 4, cp - 4);
        ctx.strokeStyle = vt.color;
        ctx.lineWidth = 3;
        ctx.strokeRect(px(x) + 2, py(z) + 2, cp - 4, cp - 4);
      }
    }
    // overlays drawn last so no trace covers them
    ctx.font = `${Math.max(9, cp * 0.4)}px system-ui`;
    for (const vt of visual.traces) {
      if (vt.overlay) {
        const [x, z] = vt.overlay.cell;
        const text = `${vt.label}: ${vt.overlay.text}`;
        const tx = px(x) + cp / 2 - ctx.measureText(text).width / 2;
        const ty = py(z) - 4;
        ctx.fillStyle = "rgba(255,255,255,0.85)";
        const w = ctx.measureText(text).width;
        ctx.fillRect(tx - 2, ty - cp * 0.45, w + 4, cp * 0.5);
        ctx.fillStyle = "#111";
        ctx.fillText(text, tx, ty);
      }
    }
  }

  // endpoints: ring markers
  const marks: [Cell | undefined, string][] = [
    [state.endpoints.start, "#00c853"],
    [state.endpoints.goal, "#ff1744"],
  ];
  for (const [cell, color] of marks) {
    if (!cell) continue;
    const [x, z] = cell;
    ctx.beginPath();
    ctx.arc(px(x) + cp / 2, py(z) + cp / 2, cp * 0.36, 0, Math.PI * 2);
    ctx.lineWidth = Math.max(2, cp / 8);
    ctx.strokeStyle = color;
    ctx.stroke();
  }

  if (state.stale) {
    ctx.fillStyle = "rgba(255, 170, 0, 0.92)";
    ctx.fillRect(8, 8, 230, 26);
    ctx.fillStyle = "#402b00";
    ctx.font = "13px system-ui";
    ctx.fillText("stale: terrain changed, re-run", 14, 26);
  }
}
