import { describe, expect, it } from "vitest";

import {
  elementKey,
  elementToJson,
  makeElement,
  parseAttrInput,
  parseTrace,
  sketchToJson,
  traceContains,
  traceKey,
  TraceParseError,
  valuesMatch,
} from "../src/trace";
import { fixtureCases, readFixture, refineFixture, type TaskFixture } from "./helpers";

describe("parseTrace", () => {
  it("round-trips every service-produced trace unchanged", () => {
    const docs: Record<string, unknown>[][] = [];
    const sec2 = readFixture<TaskFixture>("sec2_task.json");
    docs.push(sec2.sketch);
    for (const caseName of fixtureCases()) {
      for (const tag of ["n4", "n8"] as const) {
        const { task, result } = refineFixture(caseName, tag);
        docs.push(task.sketch, task.target!);
        for (const sol of result.solutions) {
          docs.push(sol.trace as Record<string, unknown>[]);
        }
      }
    }
    expect(docs.length).toBeGreaterThan(50);
    for (const doc of docs) {
      const roundTripped = sketchToJson(parseTrace(doc));
      expect(roundTripped).toEqual(doc.map((e) => normalize(e)));
    }
  });

  it("rejects unknown kinds and attributes", () => {
    expect(() => parseTrace('[{"kind": "blob", "x": 1}]')).toThrow(TraceParseError);
    expect(() => parseTrace('[{"kind": "point", "x1": 1}]')).toThrow(
      TraceParseError,
    );
    expect(() => parseTrace('{"kind": "point"}')).toThrow(TraceParseError);
    expect(() => parseTrace("not json")).toThrow(TraceParseError);
  });

  it("drops nulls and renders booleans as their text form", () => {
    const [e] = parseTrace('[{"kind": "point", "x": null, "y": 2, "color": true}]');
    expect(e!.attrs).toEqual({ y: 2, color: "true" });
  });
});

describe("canonical element form", () => {
  it("orders line endpoints by x, then y", () => {
    const flipped = makeElement("line", { x1: 5, y1: 1, x2: 2, y2: 3 });
    const straight = makeElement("line", { x1: 2, y1: 3, x2: 5, y2: 1 });
    expect(elementKey(flipped)).toBe(elementKey(straight));
    expect(flipped.attrs).toEqual({ x1: 2, y1: 3, x2: 5, y2: 1 });

    const vertical = makeElement("line", { x1: 2, y1: 9, x2: 2, y2: 4 });
    expect(vertical.attrs).toEqual({ x1: 2, y1: 4, x2: 2, y2: 9 });
  });

  it("orders bar extents low to high", () => {
    expect(makeElement("barV", { x: 1, y1: 8, y2: 2 }).attrs).toEqual({
      x: 1,
      y1: 2,
      y2: 8,
    });
    expect(makeElement("barH", { y: 1, x1: 8, x2: 2 }).attrs).toEqual({
      y: 1,
      x1: 2,
      x2: 8,
    });
  });

  it("keys a trace independently of element order", () => {
    const a = parseTrace('[{"kind": "point", "x": 1}, {"kind": "point", "x": 2}]');
    const b = parseTrace('[{"kind": "point", "x": 2}, {"kind": "point", "x": 1}]');
    expect(traceKey(a)).toBe(traceKey(b));
    const c = parseTrace('[{"kind": "point", "x": 3}, {"kind": "point", "x": 1}]');
    expect(traceKey(a)).not.toBe(traceKey(c));
  });
});

describe("traceContains", () => {
  it("embeds every bundled sketch in its target", () => {
    for (const caseName of fixtureCases()) {
      const { task } = refineFixture(caseName, "n8");
      const sketch = parseTrace(task.sketch);
      const target = parseTrace(task.target!);
      expect(traceContains(sketch, target), caseName).toBe(true);
    }
  });

  it("respects bag semantics: duplicates need distinct matches", () => {
    const two = parseTrace('[{"kind": "point", "x": 1}, {"kind": "point", "x": 1}]');
    const one = parseTrace('[{"kind": "point", "x": 1}]');
    expect(traceContains(two, one)).toBe(false);
    expect(traceContains(one, two)).toBe(true);
  });

  it("treats unset attributes as wildcards, set ones as binding", () => {
    const loose = parseTrace('[{"kind": "point", "x": 1}]');
    const full = parseTrace('[{"kind": "point", "x": 1, "y": 2, "color": "M"}]');
    expect(traceContains(loose, full)).toBe(true);
    expect(traceContains(full, loose)).toBe(false);
    const wrong = parseTrace('[{"kind": "point", "x": 1, "color": "F"}]');
    expect(traceContains(wrong, full)).toBe(false);
  });
});

describe("value handling", () => {
  it("compares numbers with tolerance and text exactly", () => {
    expect(valuesMatch(0.1 + 0.2, 0.3)).toBe(true);
    expect(valuesMatch(1, 1.5)).toBe(false);
    expect(valuesMatch("M", "M")).toBe(true);
    expect(valuesMatch("1", 1)).toBe(false);
  });

  it("parses grid input: blank unsets, numbers type, quotes force text", () => {
    expect(parseAttrInput("")).toBeNull();
    expect(parseAttrInput("  ")).toBeNull();
    expect(parseAttrInput("3.5")).toBe(3.5);
    expect(parseAttrInput("-2")).toBe(-2);
    expect(parseAttrInput("1_0")).toBe("1_0");
    expect(parseAttrInput("Infinity")).toBe("Infinity");
    expect(parseAttrInput('"7"')).toBe("7");
    expect(parseAttrInput("M")).toBe("M");
    expect(parseAttrInput("2020-01-01")).toBe("2020-01-01");
  });
});

function normalize(e: Record<string, unknown>): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const [k, v] of Object.entries(e)) {
    if (v === null) continue;
    out[k] = typeof v === "boolean" ? String(v) : v;
  }
  return out;
}
