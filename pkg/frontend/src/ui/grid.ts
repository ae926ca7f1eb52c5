/**
 * Sketch grid: one row per visual element, one input per attribute.
 * Blank cells are wildcards the engine is free to fill; a row with
 * every cell blank is a draft and is not sent.
 */

import { ELEMENT_ATTRS, ELEMENT_KINDS } from "../trace";
import type { GridRow } from "../state";

export interface GridProps {
  onAddRow(kind: string): void;
  onRemoveRow(id: number): void;
  onCell(id: number, attr: string, raw: string): void;
  onClear(): void;
  onPasteTrace(text: string): void;
}

export interface SketchGrid {
  el: HTMLElement;
  render(rows: readonly GridRow[]): void;
}

export function createSketchGrid(props: GridProps): SketchGrid {
  const el = document.createElement("section");
  el.className = "panel sketch-grid";

  const heading = document.createElement("h2");
  heading.textContent = "Sketch";
  el.appendChild(heading);

  const body = document.createElement("div");
  body.className = "grid-body";
  el.appendChild(body);

  const controls = document.createElement("div");
  controls.className = "grid-controls";
  el.appendChild(controls);

  const kindPick = document.createElement("select");
  kindPick.className = "grid-kind";
  for (const kind of ELEMENT_KINDS) {
    const opt = document.createElement("option");
    opt.value = kind;
    opt.textContent = kind;
    kindPick.appendChild(opt);
  }
  controls.appendChild(kindPick);

  const addRow = document.createElement("button");
  addRow.textContent = "Add element";
  addRow.className = "grid-add";
  addRow.onclick = () => props.onAddRow(kindPick.value);
  controls.appendChild(addRow);

  const clear = document.createElement("button");
  clear.textContent = "Clear sketch";
  clear.className = "grid-clear";
  clear.onclick = () => props.onClear();
  controls.appendChild(clear);

  const paste = document.createElement("button");
  paste.textContent = "Paste trace JSON";
  paste.className = "grid-paste";
  paste.onclick = () => {
    const text = window.prompt("Trace JSON (a list of elements):");
    if (text !== null && text.trim() !== "") props.onPasteTrace(text);
  };
  controls.appendChild(paste);

  function renderKindTable(kind: string, rows: GridRow[]): HTMLElement {
    const attrs = ELEMENT_ATTRS[kind]!;
    const table = document.createElement("table");
    table.className = "grid-table";
    table.dataset.kind = kind;

    const headRow = document.createElement("tr");
    const kindCell = document.createElement("th");
    kindCell.textContent = kind;
    headRow.appendChild(kindCell);
    for (const a of attrs) {
      const th = document.createElement("th");
      th.textContent = a;
      headRow.appendChild(th);
    }
    headRow.appendChild(document.createElement("th"));
    table.appendChild(headRow);

    for (const row of rows) {
      const tr = document.createElement("tr");
      tr.dataset.rowId = String(row.id);
      tr.appendChild(document.createElement("td"));
      for (const a of attrs) {
        const td = document.createElement("td");
        const input = document.createElement("input");
        input.type = "text";
        input.value = row.raw[a] ?? "";
        input.dataset.attr = a;
        input.onchange = () => props.onCell(row.id, a, input.value);
        td.appendChild(input);
        tr.appendChild(td);
      }
      const td = document.createElement("td");
      const remove = document.createElement("button");
      remove.textContent = "x";
      remove.title = "remove this element";
      remove.className = "grid-remove";
      remove.onclick = () => props.onRemoveRow(row.id);
      td.appendChild(remove);
      tr.appendChild(td);
      table.appendChild(tr);
    }
    return table;
  }

  function render(rows: readonly GridRow[]): void {
    body.textContent = "";
    if (rows.length === 0) {
      const empty = document.createElement("p");
      empty.className = "grid-empty";
      empty.textContent = "no elements yet; add one below or paste a trace";
      body.appendChild(empty);
      return;
    }
    for (const kind of ELEMENT_KINDS) {
      const ofKind = rows.filter((r) => r.kind === kind);
      if (ofKind.length > 0) body.appendChild(renderKindTable(kind, ofKind));
    }
  }

  return { el, render };
}
