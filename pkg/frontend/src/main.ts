import embed from "vega-embed";

import { SynthesisClient } from "./api";
import {
  addRow,
  addTable,
  buildTaskPayload,
  clearSketch,
  initialState,
  latestRun,
  loadTask,
  previousRun,
  rankDelta,
  recordResult,
  removeRow,
  removeTable,
  replaceSketch,
  selectCandidate,
  setCell,
  setOption,
  sketchElements,
  tableNameProblem,
  type SessionState,
} from "./state";
import { parseTrace } from "./trace";
import { createBanner } from "./ui/banner";
import { createGallery } from "./ui/gallery";
import { createSketchGrid } from "./ui/grid";
import { createTablesPanel } from "./ui/tables";

let state: SessionState = initialState();
const client = new SynthesisClient("");

const app = document.querySelector("#app")!;
const banner = createBanner();

const tablesPanel = createTablesPanel({
  onAdd(name, table) {
    const problem = tableNameProblem(state, name);
    if (problem !== null) {
      banner.show("error", problem);
      return;
    }
    state = addTable(state, name, table);
    banner.clear();
    paint();
  },
  onRemove(name) {
    state = removeTable(state, name);
    paint();
  },
  onProblem(message) {
    banner.show("error", message);
  },
});

const grid = createSketchGrid({
  onAddRow(kind) {
    state = addRow(state, kind);
    paint();
  },
  onRemoveRow(id) {
    state = removeRow(state, id);
    paint();
  },
  onCell(id, attr, raw) {
    state = setCell(state, id, attr, raw);
    run.disabled = client.busy || !("task" in buildTaskPayload(state));
  },
  onClear() {
    state = clearSketch(state);
    paint();
  },
  onPasteTrace(text) {
    try {
      state = replaceSketch(state, parseTrace(text));
      banner.clear();
    } catch (e) {
      banner.show("error", (e as Error).message);
    }
    paint();
  },
});

const gallery = createGallery({
  embed: (el, spec) => embed(el, spec as Parameters<typeof embed>[1], { actions: false }),
  onSelect(index) {
    state = selectCandidate(state, index);
    paint();
  },
});

const controls = document.createElement("section");
controls.className = "panel run-controls";

function numberField(
  label: string,
  key: "budget" | "top_k" | "max_stmts" | "seed",
  min: number,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "option-field";
  wrap.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.min = String(min);
  input.value = String(state.options[key]);
  input.onchange = () => {
    const v = Number(input.value);
    if (Number.isFinite(v) && v >= min) state = setOption(state, key, v);
    else input.value = String(state.options[key]);
  };
  wrap.appendChild(input);
  return wrap;
}

controls.appendChild(numberField("budget (s)", "budget", 0));
controls.appendChild(numberField("top k", "top_k", 1));
controls.appendChild(numberField("max steps", "max_stmts", 0));
controls.appendChild(numberField("seed", "seed", 0));

const run = document.createElement("button");
run.textContent = "Synthesize";
run.className = "run-button";
controls.appendChild(run);

const cancel = document.createElement("button");
cancel.textContent = "Cancel";
cancel.className = "cancel-button";
cancel.disabled = true;
cancel.onclick = () => client.abort();
controls.appendChild(cancel);

const loadButton = document.createElement("button");
loadButton.textContent = "Load task JSON";
loadButton.className = "load-task";
loadButton.onclick = () => {
  const text = window.prompt("Task JSON (tables, sketch, options):");
  if (text === null || text.trim() === "") return;
  try {
    state = loadTask(state, text);
    banner.show("info", "task loaded");
  } catch (e) {
    banner.show("error", (e as Error).message);
  }
  paint();
};
controls.appendChild(loadButton);

run.onclick = async () => {
  const built = buildTaskPayload(state);
  if (!("task" in built)) {
    banner.show("error", built.message);
    return;
  }
  const nElements = sketchElements(state).length;
  banner.show("busy", "synthesizing…");
  run.disabled = true;
  cancel.disabled = false;
  const outcome = await client.synthesize(built.task);
  run.disabled = false;
  cancel.disabled = true;
  if (outcome.kind === "aborted") {
    banner.show("info", "cancelled");
    return;
  }
  if (outcome.kind === "error") {
    banner.show("error", outcome.message);
    return;
  }
  state = recordResult(state, nElements, outcome.result);
  const n = outcome.result.n_solutions;
  banner.show("info", n === 0 ? "no candidates found" : `${n} candidate${n === 1 ? "" : "s"}`);
  paint();
};

function paint(): void {
  tablesPanel.render(state.tables);
  grid.render(state.rows);
  run.disabled = client.busy || !("task" in buildTaskPayload(state));
  const last = latestRun(state);
  gallery.render(
    last === null ? null : last.result,
    state.selected,
    (key) => rankDelta(state, key),
    previousRun(state) !== null,
  );
}

app.appendChild(banner.el);
app.appendChild(tablesPanel.el);
app.appendChild(grid.el);
app.appendChild(controls);
app.appendChild(gallery.el);
paint();
