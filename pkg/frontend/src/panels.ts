// DOM control panels. Rendering code never synthesizes commands on its
// own: every command in this file is the direct result of a user
// gesture (click, submit, slider move).

import { Connection } from "./connection.js";
import { MirrorState } from "./mirror.js";
import { BLOCK_COLORS } from "./render.js";

export type Tool = "wand-start" | "wand-goal" | "place" | "dig" | "inspect";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

export class Panels {
  tool: Tool = "wand-start";
  block = "soul_sand";
  private algoBoxes: HTMLInputElement[] = [];
  private statusEl = el("span", { class: "status" }, "connecting");
  private sessionEl = el("span", {}, "-");
  private staleEl = el("span", { class: "badge hidden" }, "STALE - re-run");
  private mapList = el("select", { size: "5", class: "maplist" });
  private mapName = el("input", { placeholder: "map id", value: "sandbox" });
  private newW = el("input", { value: "12", size: "3" });
  private newD = el("input", { value: "12", size: "3" });
  private weightsBox = el("textarea", { rows: "7", spellcheck: "false" });
  private speedSlider = el("input", {
    type: "range", min: "0.5", max: "100", step: "0.5", value: "4",
  });
  private speedLabel = el("span", {}, "4 steps/s");
  private cursorEl = el("span", {}, "-");
  private modeEl = el("span", {}, "paused");
  private inspectEl = el("pre", { class: "inspect" }, "");
  private metricsEl = el("pre", { class: "metrics" }, "");
  private challengeSelect = el("select", { class: "maplist" });
  private challengePrompt = el("p", { class: "prompt" }, "");
  private verdictEl = el("p", { class: "verdict" }, "");
  private attemptsEl = el("span", {}, "0");
  private predictX = el("input", { size: "2", placeholder: "x" });
  private predictZ = el("input", { size: "2", placeholder: "z" });
  private puzzlePrompt = el("p", { class: "prompt" }, "");
  private skyVerdictEl = el("p", { class: "verdict" }, "");
  private bookSelect = el("select", { class: "maplist" });
  private bookEl = el("div", { class: "book" });
  private gatesEl = el("span", {}, "none");
  private errorEl = el("div", { class: "error hidden" });

  readonly gridCanvas = el("canvas", { width: "760", height: "620" });
  readonly skyCanvas = el("canvas", { width: "330", height: "260" });

  constructor(private conn: Connection, mount: HTMLElement) {
    mount.append(
      this.header(),
      el(
        "div",
        { class: "columns" },
        this.leftColumn(),
        el("div", { class: "center" }, this.gridCanvas),
        this.rightColumn(),
      ),
    );
  }

  private header(): HTMLElement {
    return el(
      "header",
      {},
      el("strong", {}, "pathlab"),
      " session ",
      this.sessionEl,
      " ",
      this.statusEl,
      " ",
      this.staleEl,
      this.errorEl,
    );
  }

  private toolButton(tool: Tool, label: string): HTMLElement {
    const btn = el("button", { class: "tool", "data-tool": tool }, label);
    btn.addEventListener("click", () => {
      this.tool = tool;
      const siblings = btn.parentElement?.querySelectorAll("button.tool");
      for (const other of Array.from(siblings ?? [])) {
        other.classList.toggle("active", other === btn);
      }
    });
    return btn;
  }

  private leftColumn(): HTMLElement {
    const loadBtn = el("button", {}, "load");
    loadBtn.addEventListener("click", () => {
      const id = (this.mapList as HTMLSelectElement).value;
      if (id) this.conn.send("load_map", { map_id: id });
    });
    const saveBtn = el("button", {}, "save");
    saveBtn.addEventListener("click", () => {
      this.conn.send("save_map", { map_id: (this.mapName as HTMLInputElement).value });
    });
    const newBtn = el("button", {}, "create");
    newBtn.addEventListener("click", () => {
      this.conn.send("new_map", {
        width: parseInt((this.newW as HTMLInputElement).value, 10),
        depth: parseInt((this.newD as HTMLInputElement).value, 10),
        map_id: (this.mapName as HTMLInputElement).value,
      });
    });
    const refreshBtn = el("button", {}, "refresh");
    refreshBtn.addEventListener("click", () => this.conn.send("list_maps"));

    const applyWeights = el("button", {}, "apply weights");
    applyWeights.addEventListener("click", () => {
      this.conn.send("set_weights", { text: (this.weightsBox as HTMLTextAreaElement).value });
    });
    (this.weightsBox as HTMLTextAreaElement).value =
      "default_cost 1.0\nstep_up_penalty 0.5\nstep_down_penalty 0.25\n" +
      "diagonal_multiplier 1.4142135623730951\nmax_step_height 1\npair dirt water 4.0\npair water dirt 4.0\n";

    const algos: [string, string][] = [
      ["bfs", "BFS"],
      ["dijkstra", "Dijkstra"],
      ["astar", "A* (octile)"],
    ];
    const algoRows = algos.map(([kind, label]) => {
      const box = el("input", { type: "checkbox", value: kind }) as HTMLInputElement;
      if (kind === "dijkstra") box.checked = true;
      this.algoBoxes.push(box);
      return el("label", { class: "algo" }, box, " ", label);
    });
    const runBtn = el("button", { class: "run" }, "run");
    runBtn.addEventListener("click", () => {
      const algorithms = this.algoBoxes
        .filter((b) => b.checked)
        .map((b) => (b.value === "astar" ? { kind: "astar", heuristic: "octile" } : { kind: b.value }));
      if (algorithms.length > 0) this.conn.send("run", { algorithms });
    });

    const palette = el("select", {}) as HTMLSelectElement;
    for (const block of Object.keys(BLOCK_COLORS)) {
      palette.append(el("option", { value: block }, block));
    }
    palette.value = this.block;
    palette.addEventListener("change", () => (this.block = palette.value));

    const tools = el(
      "div",
      { class: "tools" },
      this.toolButton("wand-start", "wand: start"),
      this.toolButton("wand-goal", "wand: goal"),
      this.toolButton("place", "place block"),
      this.toolButton("dig", "dig"),
    );
    (tools.querySelector("button") as HTMLButtonElement).classList.add("active");

    return el(
      "div",
      { class: "panel left" },
      el("h3", {}, "maps"),
      this.mapList,
      el("div", {}, refreshBtn, loadBtn),
      el("div", {}, this.mapName, newBtn, saveBtn),
      el("div", {}, "size ", this.newW, " x ", this.newD),
      el("h3", {}, "tools"),
      tools,
      el("div", {}, "block: ", palette),
      el("h3", {}, "algorithms"),
      ...algoRows,
      runBtn,
      el("h3", {}, "weights"),
      this.weightsBox,
      applyWeights,
    );
  }

  private rightColumn(): HTMLElement {
    const mk = (label: string, type: string) => {
      const b = el("button", {}, label);
      b.addEventListener("click", () => this.conn.send(type));
      return b;
    };
    this.speedSlider.addEventListener("change", () => {
      this.conn.send("set_speed", { speed: parseFloat((this.speedSlider as HTMLInputElement).value) });
    });

    const startChallenge = el("button", {}, "start");
    startChallenge.addEventListener("click", () => {
      const id = (this.challengeSelect as HTMLSelectElement).value;
      if (id) this.conn.send("challenge_start", { challenge_id: id });
    });
    const listChallenges = el("button", {}, "refresh");
    listChallenges.addEventListener("click", () => this.conn.send("challenge_list"));
    const predictBtn = el("button", {}, "predict");
    predictBtn.addEventListener("click", () => {
      this.conn.send("submit_prediction", {
        x: parseInt((this.predictX as HTMLInputElement).value, 10),
        z: parseInt((this.predictZ as HTMLInputElement).value, 10),
      });
    });
    const evaluateBtn = el("button", { class: "run" }, "evaluate");
    evaluateBtn.addEventListener("click", () => this.conn.send("challenge_evaluate"));

    const loadPuzzle = el("button", {}, "new cycle puzzle");
    loadPuzzle.addEventListener("click", () => {
      this.conn.send("load_puzzle", {
        kind: "cycle_breaker",
        size: 6,
        seed: Math.floor(Math.random() * 10000),
      });
    });
    const checkPuzzle = el("button", {}, "check");
    checkPuzzle.addEventListener("click", () => this.conn.send("sky_check"));

    const listBooks = el("button", {}, "refresh");
    listBooks.addEventListener("click", () => this.conn.send("list_books"));
    const openBook = el("button", {}, "open");
    openBook.addEventListener("click", () => {
      const id = (this.bookSelect as HTMLSelectElement).value;
      if (id) this.conn.send("open_book", { book_id: id });
    });

    return el(
      "div",
      { class: "panel right" },
      el("h3", {}, "debugger"),
      el(
        "div",
        {},
        mk("⏸ break (b)", "break"),
        mk("▶ continue (c)", "continue"),
        mk("◀ step (←)", "step_back"),
        mk("step (→) ▶", "step_fwd"),
      ),
      el("div", {}, "speed ", this.speedSlider, this.speedLabel),
      el("div", {}, "mode ", this.modeEl, " cursor ", this.cursorEl),
      this.inspectEl,
      this.metricsEl,
      el("h3", {}, "challenges (attempts failed: ", this.attemptsEl, ")"),
      this.challengeSelect,
      el("div", {}, listChallenges, startChallenge, evaluateBtn),
      el("div", {}, "predict next: ", this.predictX, this.predictZ, predictBtn),
      this.challengePrompt,
      this.verdictEl,
      el("h3", {}, "sky graph"),
      this.skyCanvas,
      el("div", {}, loadPuzzle, checkPuzzle),
      this.puzzlePrompt,
      this.skyVerdictEl,
      el("h3", {}, "books (gates passed: ", this.gatesEl, ")"),
      this.bookSelect,
      el("div", {}, listBooks, openBook),
      this.bookEl,
    );
  }

  private renderBook(state: MirrorState): void {
    this.bookEl.replaceChildren();
    const book = state.book;
    if (!book) return;
    this.bookEl.append(el("h4", {}, book.title));
    for (const page of book.pages) {
      this.bookEl.append(el("p", { class: "page" }, page));
    }
    if (book.quiz.length === 0) return;
    const form = el("form", {});
    book.quiz.forEach((item, qi) => {
      const fs = el("fieldset", {}, el("legend", {}, item.question));
      item.options.forEach((opt, oi) => {
        const radio = el("input", {
          type: "radio",
          name: `q${qi}`,
          value: String(oi),
        });
        fs.append(el("label", {}, radio, " ", opt), el("br"));
      });
      if (state.quizResult) {
        const ok = state.quizResult.per_item[qi];
        fs.append(
          el(
            "div",
            { class: ok ? "right" : "wrong" },
            (ok ? "correct. " : "not quite. ") + (state.quizResult.explanations[qi] ?? ""),
          ),
        );
      }
      form.append(fs);
    });
    const submit = el("button", { type: "submit" }, "submit answers");
    form.append(submit);
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      const answers = book.quiz.map((_, qi) => {
        const checked = form.querySelector<HTMLInputElement>(`input[name=q${qi}]:checked`);
        return checked ? parseInt(checked.value, 10) : -1;
      });
      this.conn.send("submit_answers", { book_id: book.id, answers });
    });
    if (state.quizResult) {
      this.bookEl.append(
        el(
          "p",
          { class: state.quizResult.gate_passed ? "right" : "wrong" },
          `score ${(state.quizResult.score * 100).toFixed(0)}% - gate ` +
            (state.quizResult.gate_passed ? "OPEN" : "still closed"),
        ),
      );
    }
    this.bookEl.append(form);
  }

  setStatus(status: string): void {
    this.statusEl.textContent = status;
    this.statusEl.className = `status ${status}`;
  }

  refresh(state: MirrorState): void {
    this.sessionEl.textContent = state.sessionId ?? "-";
    this.staleEl.classList.toggle("hidden", !state.stale);
    this.modeEl.textContent = state.mode;
    this.cursorEl.textContent = state.visual ? state.visual.cursors.join("/") : "-";
    this.speedLabel.textContent = `${state.speed} steps/s`;
    if (state.lastError) {
      this.errorEl.textContent = `${state.lastError.code}: ${state.lastError.message}`;
      this.errorEl.classList.remove("hidden");
    } else {
      this.errorEl.classList.add("hidden");
    }
    this.inspectEl.textContent = state.inspection
      ? `${state.inspection.label}: g=${state.inspection.g_cost ?? "-"} ` +
        `h=${state.inspection.h_value ?? "-"} ${state.inspection.status} ` +
        `visited=${state.inspection.visited_count}`
      : "";
    this.metricsEl.textContent = state.report?.table ?? "";

    const mapSel = this.mapList as HTMLSelectElement;
    const current = mapSel.value;
    mapSel.replaceChildren(...state.maps.map((m) => el("option", { value: m }, m)));
    if (state.maps.includes(current)) mapSel.value = current;

    const chSel = this.challengeSelect as HTMLSelectElement;
    const ch = chSel.value;
    chSel.replaceChildren(
      ...state.challenges.map((c) => el("option", { value: c.id }, `${c.id} (${c.kind})`)),
    );
    if (state.challenges.some((c) => c.id === ch)) chSel.value = ch;
    this.challengePrompt.textContent = state.activeChallenge?.prompt ?? "";
    this.attemptsEl.textContent = String(state.activeChallenge?.failedAttempts ?? 0);
    if (state.verdict) {
      this.verdictEl.textContent = state.verdict.passed
        ? `PASS (+${state.verdict.points} points)`
        : `FAIL: ${state.verdict.reason ?? ""}`;
      this.verdictEl.className = state.verdict.passed ? "verdict right" : "verdict wrong";
    } else {
      this.verdictEl.textContent = "";
    }

    this.puzzlePrompt.textContent = state.puzzle
      ? `${state.puzzle.prompt} (edits ${state.skyEdits}` +
        (state.puzzle.budget !== null ? ` / budget ${state.puzzle.budget})` : ")")
      : "";
    this.skyVerdictEl.textContent = state.skyVerdict
      ? state.skyVerdict.status + (state.skyVerdict.reason ? `: ${state.skyVerdict.reason}` : "")
      : "";
    this.skyVerdictEl.className =
      "verdict " + (state.skyVerdict?.status === "solved" ? "right" : "wrong");

    const bookSel = this.bookSelect as HTMLSelectElement;
    const prev = bookSel.value;
    const bookIds = new Set<string>();
    for (const c of state.challenges) if (c.gate) bookIds.add(c.gate);
    for (const entry of state.bookList) {
      bookIds.add(entry.id);
    }
    if (state.book) bookIds.add(state.book.id);
    for (const g of state.gates) bookIds.add(g);
    bookSel.replaceChildren(...[...bookIds].sort().map((b) => el("option", { value: b }, b)));
    if (bookIds.has(prev)) bookSel.value = prev;
    this.gatesEl.textContent = state.gates.length ? state.gates.join(", ") : "none";
    this.renderBook(state);
  }
}
