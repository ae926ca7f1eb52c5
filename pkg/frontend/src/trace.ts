/**
 * Sketch elements, mirroring the engine service's trace JSON format:
 * a list of objects keyed by attribute name, one `kind` per element.
 * Validation and canonicalization follow the service's parse rules so a
 * pasted trace round-trips identically.
 */

export type AttrValue = number | string | null;

export const ELEMENT_ATTRS: Record<string, readonly string[]> = {
  point: ["x", "y", "shape", "color", "size", "col", "row"],
  line: ["x1", "y1", "x2", "y2", "width", "color", "col", "row"],
  barV: ["x", "y1", "y2", "width", "color", "col", "row"],
  barH: ["y", "x1", "x2", "width", "color", "col", "row"],
  area: [
    "x_tl", "y_tl", "x_bl", "y_bl",
    "x_tr", "y_tr", "x_br", "y_br",
    "color", "col", "row",
  ],
};

export const ELEMENT_KINDS = Object.keys(ELEMENT_ATTRS);

const KIND_ORDER = ["point", "line", "barV", "barH", "area"];

export interface SketchElement {
  kind: string;
  attrs: Record<string, number | string>;
}

export class TraceParseError extends Error {}

/** Value kinds in sort order: null < number < text < datetime. */
function valueKind(v: number | string): number {
  if (typeof v === "number") return 1;
  return isIsoDatetime(v) ? 3 : 2;
}

// The service treats ISO-8601 text as a datetime; mirror just enough of
// that rule to keep element ordering consistent.
const ISO_RE =
  /^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?)?$/;

export function isIsoDatetime(s: string): boolean {
  return ISO_RE.test(s.trim()) && !Number.isNaN(Date.parse(s.trim()));
}

function compareValues(a: number | string, b: number | string): number {
  const ka = valueKind(a);
  const kb = valueKind(b);
  if (ka !== kb) return ka - kb;
  if (typeof a === "number" && typeof b === "number") return a - b;
  const sa = String(a);
  const sb = String(b);
  return sa < sb ? -1 : sa > sb ? 1 : 0;
}

function swapPairs(
  attrs: Record<string, number | string>,
  a1: string,
  b1: string,
  a2: string,
  b2: string,
): void {
  const va1 = attrs[a1];
  const vb1 = attrs[b1];
  const va2 = attrs[a2];
  const vb2 = attrs[b2];
  for (const k of [a1, b1, a2, b2]) delete attrs[k];
  if (va2 !== undefined) attrs[a1] = va2;
  if (vb2 !== undefined) attrs[b1] = vb2;
  if (va1 !== undefined) attrs[a2] = va1;
  if (vb1 !== undefined) attrs[b2] = vb1;
}

/** Order segment endpoints and bar extents the way the service does. */
function canonicalize(
  kind: string,
  attrs: Record<string, number | string>,
): Record<string, number | string> {
  const out = { ...attrs };
  if (kind === "line") {
    const { x1, x2, y1, y2 } = out;
    if (x1 !== undefined && x2 !== undefined) {
      const flip =
        compareValues(x1, x2) > 0 ||
        (x1 === x2 &&
          y1 !== undefined &&
          y2 !== undefined &&
          compareValues(y1, y2) > 0);
      if (flip) swapPairs(out, "x1", "y1", "x2", "y2");
    }
  } else if (kind === "barV") {
    const { y1, y2 } = out;
    if (y1 !== undefined && y2 !== undefined && compareValues(y1, y2) > 0) {
      out.y1 = y2;
      out.y2 = y1;
    }
  } else if (kind === "barH") {
    const { x1, x2 } = out;
    if (x1 !== undefined && x2 !== undefined && compareValues(x1, x2) > 0) {
      out.x1 = x2;
      out.x2 = x1;
    }
  }
  return out;
}

function canonicalCell(v: unknown, where: string): number | string | null {
  if (v === null) return null;
  if (typeof v === "boolean") return v ? "true" : "false";
  if (typeof v === "number") {
    if (!Number.isFinite(v)) {
      throw new TraceParseError(`${where}: non-finite number`);
    }
    return v;
  }
  if (typeof v === "string") return v;
  throw new TraceParseError(`${where}: unsupported value ${JSON.stringify(v)}`);
}

export function makeElement(
  kind: string,
  attrs: Record<string, AttrValue>,
): SketchElement {
  const allowed = ELEMENT_ATTRS[kind];
  if (!allowed) throw new TraceParseError(`unknown kind ${JSON.stringify(kind)}`);
  const clean: Record<string, number | string> = {};
  for (const name of allowed) {
    const v = attrs[name];
    if (v === undefined || v === null) continue;
    clean[name] = v;
  }
  for (const name of Object.keys(attrs)) {
    if (!allowed.includes(name)) {
      throw new TraceParseError(`${kind} has no attribute ${JSON.stringify(name)}`);
    }
  }
  return { kind, attrs: canonicalize(kind, clean) };
}

/** Parse the trace JSON format; errors match the service's rejections. */
export function parseTrace(textOrList: string | unknown): SketchElement[] {
  let obj: unknown;
  if (typeof textOrList === "string") {
    try {
      obj = JSON.parse(textOrList);
    } catch (e) {
      throw new TraceParseError(`bad JSON: ${(e as Error).message}`);
    }
  } else {
    obj = textOrList;
  }
  if (!Array.isArray(obj)) {
    throw new TraceParseError("a trace is a JSON list of elements");
  }
  return obj.map((item, i) => {
    if (typeof item !== "object" || item === null || !("kind" in item)) {
      throw new TraceParseError(`element ${i}: expected an object with a "kind" key`);
    }
    const rec = item as Record<string, unknown>;
    const kind = rec.kind;
    if (typeof kind !== "string" || !(kind in ELEMENT_ATTRS)) {
      throw new TraceParseError(`element ${i}: unknown kind ${JSON.stringify(kind)}`);
    }
    const attrs: Record<string, AttrValue> = {};
    for (const [k, v] of Object.entries(rec)) {
      if (k === "kind") continue;
      if (!ELEMENT_ATTRS[kind]!.includes(k)) {
        throw new TraceParseError(
          `element ${i}: ${kind} has no attribute ${JSON.stringify(k)}`,
        );
      }
      attrs[k] = canonicalCell(v, `element ${i}, attribute ${k}`);
    }
    return makeElement(kind, attrs);
  });
}

/** JSON body for one element, attributes in canonical order. */
export function elementToJson(e: SketchElement): Record<string, unknown> {
  const out: Record<string, unknown> = { kind: e.kind };
  for (const name of ELEMENT_ATTRS[e.kind]!) {
    const v = e.attrs[name];
    if (v !== undefined) out[name] = v;
  }
  return out;
}

export function sketchToJson(elements: SketchElement[]): unknown[] {
  return elements.map(elementToJson);
}

/** Stable identity for an element (kind plus canonical attribute list). */
export function elementKey(e: SketchElement): string {
  return JSON.stringify(elementToJson(e));
}

function sortToken(e: SketchElement): [number, (string | number)[]] {
  const parts: (string | number)[] = [];
  for (const name of ELEMENT_ATTRS[e.kind]!) {
    const v = e.attrs[name];
    if (v === undefined) continue;
    parts.push(name, valueKind(v), typeof v === "number" ? v : String(v));
  }
  return [KIND_ORDER.indexOf(e.kind), parts];
}

function compareTokens(a: SketchElement, b: SketchElement): number {
  const [ka, pa] = sortToken(a);
  const [kb, pb] = sortToken(b);
  if (ka !== kb) return ka - kb;
  const n = Math.min(pa.length, pb.length);
  for (let i = 0; i < n; i++) {
    const x = pa[i]!;
    const y = pb[i]!;
    if (x === y) continue;
    if (typeof x === "number" && typeof y === "number") return x - y;
    const sx = String(x);
    const sy = String(y);
    return sx < sy ? -1 : 1;
  }
  return pa.length - pb.length;
}

/**
 * Identity for a whole rendered trace: element multiset, order-free.
 * Used to recognize the same candidate across synthesis runs.
 */
export function traceKey(elements: SketchElement[]): string {
  const sorted = [...elements].sort(compareTokens);
  return JSON.stringify(sorted.map(elementToJson));
}

const REL_TOL = 1e-9;
const ABS_TOL = 1e-12;

/** Attribute comparison: tolerant on numbers, exact elsewhere. */
export function valuesMatch(small: number | string, big: number | string): boolean {
  if (typeof small === "number" && typeof big === "number") {
    return (
      Math.abs(small - big) <=
      Math.max(REL_TOL * Math.max(Math.abs(small), Math.abs(big)), ABS_TOL)
    );
  }
  return small === big;
}

/** Attributes set on the small element must agree; unset ones are wildcards. */
export function elementMatches(small: SketchElement, big: SketchElement): boolean {
  if (small.kind !== big.kind) return false;
  for (const [a, v] of Object.entries(small.attrs)) {
    const bv = big.attrs[a];
    if (bv === undefined || !valuesMatch(v, bv)) return false;
  }
  return true;
}

/** True iff an injective element matching embeds small into big. */
export function traceContains(small: SketchElement[], big: SketchElement[]): boolean {
  if (small.length > big.length) return false;
  const cands: number[][] = [];
  for (const s of small) {
    const c: number[] = [];
    big.forEach((b, j) => {
      if (elementMatches(s, b)) c.push(j);
    });
    if (c.length === 0) return false;
    cands.push(c);
  }

  const order = cands.map((_, i) => i).sort((a, b) => cands[a]!.length - cands[b]!.length);
  const matchOfBig = new Map<number, number>();

  const augment = (i: number, seen: Set<number>): boolean => {
    for (const j of cands[i]!) {
      if (seen.has(j)) continue;
      seen.add(j);
      const prev = matchOfBig.get(j);
      if (prev === undefined || augment(prev, seen)) {
        matchOfBig.set(j, i);
        return true;
      }
    }
    return false;
  };

  for (const i of order) {
    if (!augment(i, new Set())) return false;
  }
  return true;
}

/**
 * Grid-entry parsing for one attribute cell: empty means unset, numbers
 * are typed as numbers, anything else stays text. Double-quote a value
 * to force text (mirrors how the task file's JSON types disambiguate).
 */
export function parseAttrInput(raw: string): AttrValue {
  const s = raw.trim();
  if (s === "") return null;
  if (s.length >= 2 && s.startsWith('"') && s.endsWith('"')) {
    return s.slice(1, -1);
  }
  if (!s.includes("_")) {
    const n = Number(s);
    if (Number.isFinite(n)) return n;
  }
  return s;
}
