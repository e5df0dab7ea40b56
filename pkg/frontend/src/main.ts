// Wires everything: connection -> mirror -> canvas + panels, plus the
// keyboard bindings and click tools. The mirror is the only state; every
// frame is a pure redraw of it.

import { Connection } from "./connection.js";
import { bindKeyboard } from "./keyboard.js";
import { initialMirror, MirrorState, reduce } from "./mirror.js";
import { Panels } from "./panels.js";
import { cellAt, drawGrid, fitView } from "./render.js";
import { defaultOrbit, drawSky, edgeAt } from "./skyview.js";

function serverUrl(): string {
  const params = new URLSearchParams(location.search);
  return params.get("server") ?? `ws://${location.hostname || "127.0.0.1"}:45802`;
}

function start(): void {
  const mount = document.getElementById("app");
  if (!mount) throw new Error("missing #app mount point");

  const conn = new Connection(serverUrl());
  const panels = new Panels(conn, mount);
  let state: MirrorState = initialMirror();
  let dirty = true;

  const grid = panels.gridCanvas;
  const gridCtx = grid.getContext("2d")!;
  const sky = panels.skyCanvas;
  const skyCtx = sky.getContext("2d")!;
  const orbit = defaultOrbit();

  conn.onEvent = (event) => {
    state = reduce(state, event);
    if (event.type === "session_created") {
      conn.send("list_maps");
      conn.send("list_books");
      conn.send("challenge_list");
    }
    dirty = true;
  };
  conn.onStatus = (status) => {
    panels.setStatus(status);
    dirty = true;
  };
  conn.connect();

  bindKeyboard(window as unknown as Parameters<typeof bindKeyboard>[0], conn);

  grid.addEventListener("click", (e) => {
    const rect = grid.getBoundingClientRect();
    const view = fitView(state, grid.width, grid.height);
    const cell = cellAt(view, state, e.clientX - rect.left, e.clientY - rect.top);
    if (!cell || !state.terrain) return;
    const [x, z] = cell;
    const { min_x, min_z } = state.terrain.bounds;
    const height = state.terrain.heights[z - min_z][x - min_x];
    switch (panels.tool) {
      case "wand-start":
        conn.send("select_endpoint", { which: "start", x, z });
        break;
      case "wand-goal":
        conn.send("select_endpoint", { which: "goal", x, z });
        break;
      case "place":
        conn.send("set_block", { x, z, y: height, block: panels.block });
        break;
      case "dig":
        conn.send("set_block", { x, z, y: height - 1, block: "air" });
        break;
      default:
        break;
    }
  });

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  let moved = false;
  sky.addEventListener("mousedown", (e) => {
    dragging = true;
    moved = false;
    lastX = e.clientX;
    lastY = e.clientY;
  });
  window.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    const dx = e.clientX - lastX;
    const dy = e.clientY - lastY;
    if (Math.abs(dx) + Math.abs(dy) > 2) moved = true;
    orbit.yaw += dx * 0.01;
    orbit.pitch = Math.max(-1.4, Math.min(1.4, orbit.pitch + dy * 0.01));
    lastX = e.clientX;
    lastY = e.clientY;
    dirty = true;
  });
  window.addEventListener("mouseup", () => (dragging = false));
  sky.addEventListener("click", (e) => {
    if (moved || !state.skyGraph) return; // an orbit drag, not a chain click
    const rect = sky.getBoundingClientRect();
    const hit = edgeAt(
      state.skyGraph,
      orbit,
      sky.width,
      sky.height,
      e.clientX - rect.left,
      e.clientY - rect.top,
    );
    if (hit) {
      conn.send("sky_edit", { action: "remove_edge", from: hit[0], to: hit[1] });
    }
  });

  const frame = () => {
    if (dirty) {
      dirty = false;
      drawGrid(gridCtx, state, fitView(state, grid.width, grid.height), grid.width, grid.height);
      drawSky(skyCtx, state.skyGraph, orbit, sky.width, sky.height);
      panels.refresh(state);
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);

  // keep the sky view orbiting gently so depth reads at a glance
  setInterval(() => {
    if (!dragging && state.skyGraph) {
      orbit.yaw += 0.004;
      dirty = true;
    }
  }, 40);
}

start();
