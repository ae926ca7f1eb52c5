/**
 * Input-table panel: paste CSV, name it, add it. Cells follow the
 * engine's text convention: blank is null, plain numbers are numbers,
 * everything else stays text (the service recognizes date strings on
 * its side).
 */

import Papa from "papaparse";

import type { CellValue, TablePayload } from "../api";
import type { TableEntry } from "../state";

export function csvCellValue(raw: string): CellValue {
  if (raw === "") return null;
  if (!raw.includes("_")) {
    const n = Number(raw);
    if (raw.trim() !== "" && Number.isFinite(n)) return n;
  }
  return raw;
}

export function tableFromCsv(text: string): TablePayload {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new Error(`CSV problem on row ${first.row ?? "?"}: ${first.message}`);
  }
  const grid = parsed.data;
  if (grid.length === 0) throw new Error("the CSV needs a header row");
  const columns = grid[0]!;
  if (columns.some((c) => c === "")) {
    throw new Error("every column needs a name in the header row");
  }
  const rows: CellValue[][] = [];
  for (let i = 1; i < grid.length; i++) {
    const cells = grid[i]!;
    if (cells.length !== columns.length) {
      throw new Error(
        `row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    rows.push(cells.map(csvCellValue));
  }
  return { columns, rows };
}

export interface TablesPanelProps {
  onAdd(name: string, table: TablePayload): void;
  onRemove(name: string): void;
  onProblem(message: string): void;
}

export interface TablesPanel {
  el: HTMLElement;
  render(tables: readonly TableEntry[]): void;
}

export function createTablesPanel(props: TablesPanelProps): TablesPanel {
  const el = document.createElement("section");
  el.className = "panel tables-panel";

  const heading = document.createElement("h2");
  heading.textContent = "Input tables";
  el.appendChild(heading);

  const list = document.createElement("ul");
  list.className = "table-list";
  el.appendChild(list);

  const name = document.createElement("input");
  name.type = "text";
  name.placeholder = "table name";
  name.className = "table-name";
  el.appendChild(name);

  const csv = document.createElement("textarea");
  csv.placeholder = "paste CSV with a header row";
  csv.className = "table-csv";
  csv.rows = 6;
  el.appendChild(csv);

  const add = document.createElement("button");
  add.textContent = "Add table";
  add.className = "table-add";
  add.onclick = () => {
    let table: TablePayload;
    try {
      table = tableFromCsv(csv.value);
    } catch (e) {
      props.onProblem((e as Error).message);
      return;
    }
    props.onAdd(name.value.trim(), table);
    name.value = "";
    csv.value = "";
  };
  el.appendChild(add);

  function render(tables: readonly TableEntry[]): void {
    list.textContent = "";
    if (tables.length === 0) {
      const empty = document.createElement("li");
      empty.className = "table-empty";
      empty.textContent = "no tables yet";
      list.appendChild(empty);
      return;
    }
    for (const { name: tname, table } of tables) {
      const item = document.createElement("li");
      item.className = "table-item";
      const label = document.createElement("span");
      label.textContent =
        `${tname} (${table.columns.length} cols, ${table.rows.length} rows)`;
      item.appendChild(label);
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.className = "table-remove";
      remove.onclick = () => props.onRemove(tname);
      item.appendChild(remove);
      list.appendChild(item);
    }
  }

  return { el, render };
}
