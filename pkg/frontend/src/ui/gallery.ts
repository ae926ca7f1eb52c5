/**
 * Candidate gallery: one card per returned program, ranked order,
 * chart on top and the program underneath. When a refinement rerun
 * comes back, each card that also appeared last time gets a badge for
 * how its rank moved.
 */

import type { ResultDoc, SolutionDoc } from "../api";
import { solutionKey } from "../state";

/** Chart renderer, injectable so tests can stub the real embedder. */
export type EmbedFn = (el: HTMLElement, spec: unknown) => Promise<unknown>;

export interface GalleryProps {
  embed: EmbedFn;
  onSelect(index: number): void;
}

export interface Gallery {
  el: HTMLElement;
  render(
    result: ResultDoc | null,
    selected: number | null,
    deltaOf: (key: string) => number | null,
    hasPrior: boolean,
  ): void;
}

function deltaBadge(delta: number | null): HTMLElement {
  const badge = document.createElement("span");
  if (delta === null) {
    badge.className = "delta delta-new";
    badge.textContent = "new";
  } else if (delta > 0) {
    badge.className = "delta delta-up";
    badge.textContent = `▲ ${delta}`;
  } else if (delta < 0) {
    badge.className = "delta delta-down";
    badge.textContent = `▼ ${-delta}`;
  } else {
    badge.className = "delta delta-same";
    badge.textContent = "=";
  }
  return badge;
}

function programText(sol: SolutionDoc): string {
  const parts: string[] = [];
  for (const lines of sol.table_programs) parts.push(lines.join("\n"));
  parts.push(sol.visual);
  return parts.join("\n");
}

export function createGallery(props: GalleryProps): Gallery {
  const el = document.createElement("section");
  el.className = "panel gallery";

  const heading = document.createElement("h2");
  heading.textContent = "Candidates";
  el.appendChild(heading);

  const cards = document.createElement("div");
  cards.className = "cards";
  el.appendChild(cards);

  function renderCard(
    sol: SolutionDoc,
    index: number,
    selected: boolean,
    delta: number | null,
    hasPrior: boolean,
  ): HTMLElement {
    const card = document.createElement("article");
    card.className = selected ? "card card-selected" : "card";
    card.dataset.rank = String(sol.rank);
    card.onclick = () => props.onSelect(index);

    const header = document.createElement("header");
    const rank = document.createElement("span");
    rank.className = "card-rank";
    rank.textContent = `#${sol.rank}`;
    header.appendChild(rank);
    const size = document.createElement("span");
    size.className = "card-size";
    size.textContent = `size ${sol.size}`;
    header.appendChild(size);
    if (hasPrior) header.appendChild(deltaBadge(delta));
    card.appendChild(header);

    const chart = document.createElement("div");
    chart.className = "card-chart";
    card.appendChild(chart);
    props.embed(chart, sol.vega).catch((e) => {
      chart.textContent = `chart failed to render: ${(e as Error).message}`;
    });

    const program = document.createElement("pre");
    program.className = "card-program";
    program.textContent = programText(sol);
    card.appendChild(program);
    return card;
  }

  function render(
    result: ResultDoc | null,
    selected: number | null,
    deltaOf: (key: string) => number | null,
    hasPrior: boolean,
  ): void {
    cards.textContent = "";
    if (result === null) {
      const hint = document.createElement("p");
      hint.className = "gallery-hint";
      hint.textContent = "run a synthesis to see candidates here";
      cards.appendChild(hint);
      return;
    }
    if (result.solutions.length === 0) {
      const hint = document.createElement("p");
      hint.className = "gallery-hint gallery-empty";
      hint.textContent =
        "no candidate matches this sketch; check the values against the tables, or raise the budget";
      cards.appendChild(hint);
      return;
    }
    result.solutions.forEach((sol, i) => {
      const delta = deltaOf(solutionKey(sol.trace));
      cards.appendChild(renderCard(sol, i, i === selected, delta, hasPrior));
    });
  }

  return { el, render };
}
