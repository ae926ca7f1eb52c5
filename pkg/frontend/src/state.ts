/**
 * Session state and its reducers. Every transition returns a fresh
 * state value; past synthesis results are kept verbatim so refining the
 * sketch can show how each candidate's rank moved.
 */

import type { ResultDoc, TablePayload, TaskPayload } from "./api";
import {
  ELEMENT_ATTRS,
  makeElement,
  parseAttrInput,
  parseTrace,
  sketchToJson,
  traceKey,
  type SketchElement,
} from "./trace";

export interface GridRow {
  readonly id: number;
  readonly kind: string;
  /** Raw text per attribute, exactly as typed. */
  readonly raw: Readonly<Record<string, string>>;
}

export interface TableEntry {
  readonly name: string;
  readonly table: TablePayload;
}

export interface RunRecord {
  /** Number of sketch elements that were sent. */
  readonly nElements: number;
  readonly result: ResultDoc;
  /** Candidate identity (rendered-trace key) to rank, for this run. */
  readonly ranks: ReadonlyMap<string, number>;
}

export interface SessionState {
  readonly tables: readonly TableEntry[];
  readonly rows: readonly GridRow[];
  readonly options: { budget: number; top_k: number; max_stmts: number; seed: number };
  readonly history: readonly RunRecord[];
  /** Index into the latest result's solutions, if any is focused. */
  readonly selected: number | null;
  readonly nextRowId: number;
}

export const DEFAULT_OPTIONS = { budget: 30, top_k: 10, max_stmts: 3, seed: 0 };

export function initialState(): SessionState {
  return {
    tables: [],
    rows: [],
    options: { ...DEFAULT_OPTIONS },
    history: [],
    selected: null,
    nextRowId: 1,
  };
}

const RESERVED_TABLE_NAME = /^t\d+$/;

export function tableNameProblem(
  state: SessionState,
  name: string,
): string | null {
  if (name === "") return "table name must not be empty";
  if (RESERVED_TABLE_NAME.test(name)) {
    return `"${name}" is reserved; pick another name`;
  }
  if (state.tables.some((t) => t.name === name)) {
    return `a table named "${name}" already exists`;
  }
  return null;
}

export function addTable(
  state: SessionState,
  name: string,
  table: TablePayload,
): SessionState {
  const problem = tableNameProblem(state, name);
  if (problem !== null) throw new Error(problem);
  return { ...state, tables: [...state.tables, { name, table }] };
}

export function removeTable(state: SessionState, name: string): SessionState {
  return { ...state, tables: state.tables.filter((t) => t.name !== name) };
}

export function addRow(state: SessionState, kind: string): SessionState {
  if (!(kind in ELEMENT_ATTRS)) throw new Error(`unknown element kind ${kind}`);
  const row: GridRow = { id: state.nextRowId, kind, raw: {} };
  return {
    ...state,
    rows: [...state.rows, row],
    nextRowId: state.nextRowId + 1,
  };
}

export function removeRow(state: SessionState, id: number): SessionState {
  return { ...state, rows: state.rows.filter((r) => r.id !== id) };
}

export function setCell(
  state: SessionState,
  id: number,
  attr: string,
  raw: string,
): SessionState {
  const rows = state.rows.map((r) => {
    if (r.id !== id) return r;
    if (!ELEMENT_ATTRS[r.kind]!.includes(attr)) {
      throw new Error(`${r.kind} has no attribute ${attr}`);
    }
    return { ...r, raw: { ...r.raw, [attr]: raw } };
  });
  return { ...state, rows };
}

export function clearSketch(state: SessionState): SessionState {
  return { ...state, rows: [], selected: null };
}

export function setOption(
  state: SessionState,
  key: "budget" | "top_k" | "max_stmts" | "seed",
  value: number,
): SessionState {
  return { ...state, options: { ...state.options, [key]: value } };
}

/** Grid text that parses back to exactly this value. */
export function rawCellText(v: number | string): string {
  if (typeof v === "number") return String(v);
  if (v.trim() !== "" && !v.includes("_") && Number.isFinite(Number(v))) {
    return `"${v}"`;
  }
  return v;
}

/**
 * Replace the sketch grid with rows built from parsed elements, e.g.
 * after pasting trace JSON.
 */
export function replaceSketch(
  state: SessionState,
  elements: SketchElement[],
): SessionState {
  let nextId = state.nextRowId;
  const rows = elements.map((e) => {
    const raw: Record<string, string> = {};
    for (const [a, v] of Object.entries(e.attrs)) {
      raw[a] = rawCellText(v);
    }
    return { id: nextId++, kind: e.kind, raw };
  });
  return { ...state, rows, nextRowId: nextId, selected: null };
}

/**
 * A grid row becomes a sketch element once any attribute is set.
 * Rows with every cell blank are drafts and stay out of the payload.
 */
export function rowElement(row: GridRow): SketchElement | null {
  const attrs: Record<string, number | string | null> = {};
  let any = false;
  for (const name of ELEMENT_ATTRS[row.kind]!) {
    const raw = row.raw[name];
    if (raw === undefined) continue;
    const v = parseAttrInput(raw);
    if (v === null) continue;
    attrs[name] = v;
    any = true;
  }
  if (!any) return null;
  return makeElement(row.kind, attrs);
}

export function sketchElements(state: SessionState): SketchElement[] {
  const out: SketchElement[] = [];
  for (const row of state.rows) {
    const e = rowElement(row);
    if (e !== null) out.push(e);
  }
  return out;
}

export type PayloadProblem = { message: string };

/**
 * The full current sketch and all tables go into every request; the
 * engine re-ranks from scratch, so there is no partial update to send.
 */
export function buildTaskPayload(
  state: SessionState,
): { task: TaskPayload } | PayloadProblem {
  if (state.tables.length === 0) {
    return { message: "add at least one input table" };
  }
  const sketch = sketchElements(state);
  if (sketch.length === 0) {
    return { message: "sketch at least one element" };
  }
  const tables: Record<string, TablePayload> = {};
  for (const { name, table } of state.tables) tables[name] = table;
  return {
    task: {
      tables,
      sketch: sketchToJson(sketch),
      options: { ...state.options },
    },
  };
}

function solutionRanks(result: ResultDoc): Map<string, number> {
  const ranks = new Map<string, number>();
  for (const sol of result.solutions) {
    const key = traceKey(parseTrace(sol.trace));
    if (!ranks.has(key)) ranks.set(key, sol.rank);
  }
  return ranks;
}

export function recordResult(
  state: SessionState,
  nElements: number,
  result: ResultDoc,
): SessionState {
  const record: RunRecord = {
    nElements,
    result,
    ranks: solutionRanks(result),
  };
  return {
    ...state,
    history: [...state.history, record],
    selected: result.solutions.length > 0 ? 0 : null,
  };
}

export function selectCandidate(
  state: SessionState,
  index: number | null,
): SessionState {
  return { ...state, selected: index };
}

export function latestRun(state: SessionState): RunRecord | null {
  return state.history.length > 0
    ? state.history[state.history.length - 1]!
    : null;
}

export function previousRun(state: SessionState): RunRecord | null {
  return state.history.length > 1
    ? state.history[state.history.length - 2]!
    : null;
}

/**
 * Rank movement for a candidate between the last two runs, keyed by its
 * rendered trace: the same program draws the same picture from the same
 * tables, so the trace identifies it across runs. Positive means it
 * climbed, negative it fell, null it is new or there was no prior run.
 */
export function rankDelta(state: SessionState, key: string): number | null {
  const prev = previousRun(state);
  const last = latestRun(state);
  if (prev === null || last === null) return null;
  const before = prev.ranks.get(key);
  const after = last.ranks.get(key);
  if (before === undefined || after === undefined) return null;
  return before - after;
}

/** Trace key for one solution in a result document. */
export function solutionKey(trace: unknown[]): string {
  return traceKey(parseTrace(trace));
}

function tableFromObj(name: string, value: unknown): TablePayload {
  if (typeof value !== "object" || value === null) {
    throw new Error(`table "${name}" must be an inline object here`);
  }
  const rec = value as Record<string, unknown>;
  if ("path" in rec) {
    throw new Error(
      `table "${name}" is a file reference; paste the table contents instead`,
    );
  }
  const { columns, rows } = rec;
  if (!Array.isArray(columns) || !Array.isArray(rows)) {
    throw new Error(`table "${name}" needs "columns" and "rows" lists`);
  }
  return {
    columns: columns.map(String),
    rows: rows.map((r, i) => {
      if (!Array.isArray(r)) throw new Error(`table "${name}" row ${i} is not a list`);
      return r.map((cell) => {
        if (cell === null || typeof cell === "number" || typeof cell === "string") {
          return cell;
        }
        if (typeof cell === "boolean") return cell ? "true" : "false";
        throw new Error(`table "${name}" row ${i} has an unsupported value`);
      });
    }),
  };
}

/**
 * Replace the whole session with a pasted task document: tables, sketch
 * and options together. History is dropped since it described another
 * problem.
 */
export function loadTask(state: SessionState, text: string): SessionState {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (e) {
    throw new Error(`not valid JSON: ${(e as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("a task is a JSON object");
  }
  const rec = obj as Record<string, unknown>;
  if (typeof rec.tables !== "object" || rec.tables === null) {
    throw new Error('the task needs a "tables" object');
  }
  const tables: TableEntry[] = Object.entries(rec.tables).map(
    ([name, value]) => ({ name, table: tableFromObj(name, value) }),
  );
  if (tables.length === 0) throw new Error("the task has no tables");
  const elements = parseTrace(rec.sketch ?? []);

  const options = { ...DEFAULT_OPTIONS };
  if (typeof rec.options === "object" && rec.options !== null) {
    const raw = rec.options as Record<string, unknown>;
    for (const key of ["budget", "top_k", "max_stmts", "seed"] as const) {
      const v = raw[key];
      if (typeof v === "number") options[key] = v;
    }
  }

  const blank = initialState();
  const withTables = tables.reduce(
    (s, t) => addTable(s, t.name, t.table),
    { ...blank, options },
  );
  return replaceSketch(withTables, elements);
}
