/**
 * Session exploration history: an append-only list of solve requests and
 * their outcomes. Entries are frozen on the way in, so nothing downstream
 * can rewrite what happened; replaying a request against an unchanged
 * workspace must reproduce the recorded outcome bit for bit.
 */

import type { CsxClient, SolveRequest, SolveResponse } from "./api.js";

export interface HistoryEntry {
  readonly seq: number;
  readonly request: SolveRequest;
  readonly outcome: SolveResponse;
}

function deepFreeze<T>(obj: T): T {
  if (obj !== null && typeof obj === "object") {
    for (const v of Object.values(obj)) {
      deepFreeze(v);
    }
    Object.freeze(obj);
  }
  return obj;
}

/** Canonical JSON with sorted keys, for outcome comparison. */
export function canonical(doc: unknown): string {
  return JSON.stringify(doc, (_k, v) => {
    if (v !== null && typeof v === "object" && !Array.isArray(v)) {
      const sorted: Record<string, unknown> = {};
      for (const key of Object.keys(v).sort()) {
        sorted[key] = v[key];
      }
      return sorted;
    }
    return v;
  });
}

export class ExplorationHistory {
  private readonly entries: HistoryEntry[] = [];

  record(request: SolveRequest, outcome: SolveResponse): HistoryEntry {
    const entry: HistoryEntry = deepFreeze({
      seq: this.entries.length + 1,
      request: structuredClone(request),
      outcome: structuredClone(outcome),
    });
    this.entries.push(entry);
    return entry;
  }

  all(): readonly HistoryEntry[] {
    return [...this.entries];
  }

  get length(): number {
    return this.entries.length;
  }

  /** Most recent successful configuration for a device, if any. */
  lastFound(device: string): HistoryEntry | undefined {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const e = this.entries[i]!;
      if (e.request.device === device && e.outcome.status === "found") {
        return e;
      }
    }
    return undefined;
  }

  /**
   * Re-issue one recorded request and report whether the service still
   * answers the same. The request goes out without its revision guard so
   * replay works after unrelated workspaces changed the counter.
   */
  async replay(
    client: CsxClient,
    workspaceId: string,
    entry: HistoryEntry,
  ): Promise<{ outcome: SolveResponse; matches: boolean }> {
    const req = { ...structuredClone(entry.request) as SolveRequest };
    delete req.revision;
    const outcome = await client.solve(workspaceId, req);
    const matches =
      outcome.status === entry.outcome.status &&
      outcome.objective === entry.outcome.objective &&
      canonical(outcome.configuration) ===
        canonical(entry.outcome.configuration);
    return { outcome, matches };
  }
}
