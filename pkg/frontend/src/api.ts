/**
 * Client for the synthesis service. One request may be in flight at a
 * time; starting a new one aborts the old, which also tells the service
 * to stop that search.
 */

export type CellValue = number | string | null;

export interface TablePayload {
  columns: string[];
  rows: CellValue[][];
}

export interface TaskOptions {
  budget?: number;
  top_k?: number;
  max_stmts?: number;
  seed?: number;
}

export interface TaskPayload {
  name?: string;
  tables: Record<string, TablePayload>;
  sketch: unknown[];
  options?: TaskOptions;
  target?: unknown[];
}

export interface SolutionDoc {
  rank: number;
  size: number;
  layers: number;
  table_programs: string[][];
  visual: string;
  vega: Record<string, unknown>;
  trace: unknown[];
}

export interface ResultDoc {
  engine: { name: string; version: string };
  options: { budget: number; top_k: number; max_stmts: number; seed: number };
  n_solutions: number;
  solutions: SolutionDoc[];
}

export type SynthesisOutcome =
  | { kind: "ok"; result: ResultDoc }
  | { kind: "error"; message: string; status: number | null }
  | { kind: "aborted" };

export type FetchLike = (
  url: string,
  init: RequestInit,
) => Promise<Response>;

export class SynthesisClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private inflight: AbortController | null = null;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  get busy(): boolean {
    return this.inflight !== null;
  }

  abort(): void {
    if (this.inflight !== null) {
      this.inflight.abort();
      this.inflight = null;
    }
  }

  async synthesize(task: TaskPayload): Promise<SynthesisOutcome> {
    this.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/synthesize`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(task),
        signal: controller.signal,
      });
    } catch (e) {
      if (this.inflight === controller) this.inflight = null;
      if (controller.signal.aborted) return { kind: "aborted" };
      return {
        kind: "error",
        message: `cannot reach the engine service: ${(e as Error).message}`,
        status: null,
      };
    }
    if (this.inflight === controller) this.inflight = null;
    if (controller.signal.aborted) return { kind: "aborted" };

    if (response.status === 204) return { kind: "aborted" };
    if (response.ok) {
      try {
        const result = (await response.json()) as ResultDoc;
        return { kind: "ok", result };
      } catch {
        return {
          kind: "error",
          message: "the service returned a malformed result document",
          status: response.status,
        };
      }
    }
    let message = `request failed with status ${response.status}`;
    try {
      const body = (await response.json()) as { error?: unknown };
      if (typeof body.error === "string") message = body.error;
    } catch {
      /* keep the status-based message */
    }
    return { kind: "error", message, status: response.status };
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(`${this.baseUrl}/health`, {
        method: "GET",
      });
      return response.ok;
    } catch {
      return false;
    }
  }
}
