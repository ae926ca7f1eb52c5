import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { ResultDoc } from "../src/api";

// Resolved from the package directory (the vitest root), which also
// holds in the jsdom environment where module URLs are not file paths.
const FIXTURES = join(process.cwd(), "tests", "fixtures");

export function readFixture<T = unknown>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export interface TaskFixture {
  name: string;
  tables: Record<string, { columns: string[]; rows: unknown[][] }>;
  sketch: Record<string, unknown>[];
  options: Record<string, number>;
  target?: Record<string, unknown>[];
}

export function fixtureCases(): string[] {
  return readFixture<{ cases: string[] }>("index.json").cases;
}

export function refineFixture(
  caseName: string,
  tag: "n4" | "n8",
): { task: TaskFixture; result: ResultDoc } {
  return {
    task: readFixture<TaskFixture>(`refine/${caseName}_${tag}_task.json`),
    result: readFixture<ResultDoc>(`refine/${caseName}_${tag}_result.json`),
  };
}
