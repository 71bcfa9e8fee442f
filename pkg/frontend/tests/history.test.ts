import { describe, expect, it } from "vitest";

import type { CsxClient, SolveRequest, SolveResponse } from "../src/api.js";
import { ExplorationHistory, canonical } from "../src/history.js";

function req(device = "D", value = 10): SolveRequest {
  return { device, bindings: [{ path: "a.w", value }] };
}

function found(objective: number | null = null): SolveResponse {
  return {
    revision: 1,
    status: "found",
    objective,
    configuration: { flat: { a_w: 10, c_t: 2 }, tree: { a: { w: 10 }, c: { t: 2 } } },
  };
}

const EMPTY: SolveResponse = {
  revision: 1,
  status: "empty",
  objective: null,
  configuration: null,
};

describe("ExplorationHistory", () => {
  it("appends in order with increasing sequence numbers", () => {
    const h = new ExplorationHistory();
    h.record(req("D", 1), found());
    h.record(req("D", 2), EMPTY);
    expect(h.length).toBe(2);
    expect(h.all().map((e) => e.seq)).toEqual([1, 2]);
  });

  it("entries are frozen and detached from caller objects", () => {
    const h = new ExplorationHistory();
    const r = req();
    const entry = h.record(r, found());
    r.bindings[0]!.value = 999; // caller mutates its own copy afterwards
    expect(entry.request.bindings[0]?.value).toBe(10);
    expect(Object.isFrozen(entry)).toBe(true);
    expect(Object.isFrozen(entry.outcome.configuration)).toBe(true);
    expect(() => {
      (entry as { seq: number }).seq = 99;
    }).toThrow();
  });

  it("the view returned by all() does not expose the backing list", () => {
    const h = new ExplorationHistory();
    h.record(req(), found());
    const view = h.all() as unknown as unknown[];
    view.pop();
    expect(h.length).toBe(1);
  });

  it("lastFound skips failures and other devices", () => {
    const h = new ExplorationHistory();
    h.record(req("D", 1), found(5));
    h.record(req("Other", 2), found(7));
    h.record(req("D", 3), EMPTY);
    const last = h.lastFound("D");
    expect(last?.seq).toBe(1);
    expect(last?.outcome.objective).toBe(5);
    expect(h.lastFound("Missing")).toBeUndefined();
  });

  it("replay reports a reproduced outcome", async () => {
    const h = new ExplorationHistory();
    const entry = h.record(req(), found(4));
    const client = {
      solve: async () => found(4),
    } as unknown as CsxClient;
    const { matches } = await h.replay(client, "w1", entry);
    expect(matches).toBe(true);
  });

  it("replay flags divergence after the workspace changed", async () => {
    const h = new ExplorationHistory();
    const entry = h.record(req(), found(4));
    const changed = found(4);
    changed.configuration!.flat["c_t"] = 3;
    const client = {
      solve: async () => changed,
    } as unknown as CsxClient;
    const { matches, outcome } = await h.replay(client, "w1", entry);
    expect(matches).toBe(false);
    expect(outcome.configuration?.flat["c_t"]).toBe(3);
  });

  it("replay drops the stale revision guard", async () => {
    const h = new ExplorationHistory();
    const entry = h.record({ ...req(), revision: 1 }, found());
    let sent: SolveRequest | undefined;
    const client = {
      solve: async (_w: string, r: SolveRequest) => {
        sent = r;
        return found();
      },
    } as unknown as CsxClient;
    await h.replay(client, "w1", entry);
    expect(sent?.revision).toBeUndefined();
  });
});

describe("canonical", () => {
  it("is key-order independent", () => {
    expect(canonical({ b: 1, a: { d: 2, c: 3 } })).toBe(
      canonical({ a: { c: 3, d: 2 }, b: 1 }),
    );
  });

  it("distinguishes different values", () => {
    expect(canonical({ a: 1 })).not.toBe(canonical({ a: 2 }));
  });
});
