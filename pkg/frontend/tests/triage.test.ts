import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { TriageFlow, renderAssumptions } from "../src/triage.js";
import { FakeService } from "./fake.js";

let service: FakeService;
let flow: TriageFlow;

beforeEach(async () => {
  service = new FakeService(2, 2);
  flow = new TriageFlow(new ApiClient("http://svc", service.fetch), "s-1");
  await flow.refresh();
});

describe("triage flow", () => {
  it("starts with every pair open", () => {
    expect(flow.assumptions).toHaveLength(4);
    expect(flow.matrix?.cells).toHaveLength(4);
    expect(flow.stale).toBe(false);
  });

  it("one action posts exactly one fact and shrinks the list by one", () => {
    const top = flow.assumptions[0]!;
    return flow
      .triage({ kind: "process", left: top.left, right: top.right, verdict: "equal" })
      .then((ok) => {
        expect(ok).toBe(true);
        expect(service.postedFacts()).toHaveLength(1);
        expect(service.facts.size).toBe(1);
        expect(flow.assumptions).toHaveLength(3);
        expect(flow.assumptions.some((a) => a.left === top.left && a.right === top.right)).toBe(
          false,
        );
        expect(flow.lastError).toBeNull();
        expect(flow.stale).toBe(false);
      });
  });

  it("a rejection pins the cell to zero on refresh", async () => {
    const target = flow.assumptions[0]!;
    await flow.triage({
      kind: "process",
      left: target.left,
      right: target.right,
      verdict: "different",
    });
    const cell = flow.matrix!.cells.find(
      (c) => c.left === target.left && c.right === target.right,
    )!;
    expect(cell.pinned).toBe("different");
    expect(cell.combined).toBe(0);
  });

  it("surfaces a duplicate verdict inline and changes nothing", async () => {
    const pair = flow.assumptions[0]!;
    const fact = { kind: "process" as const, left: pair.left, right: pair.right, verdict: "equal" as const };
    await flow.triage(fact);
    const recomputesBefore = service.recomputeCalls();
    const listBefore = [...flow.assumptions];

    const ok = await flow.triage(fact);
    expect(ok).toBe(false);
    expect(flow.lastError).toMatch(/already recorded/);
    expect(service.postedFacts()).toHaveLength(2); // attempted twice
    expect(service.facts.size).toBe(1); // stored once
    expect(service.recomputeCalls()).toBe(recomputesBefore); // no pointless recompute
    expect(flow.assumptions).toEqual(listBefore);
  });

  it("recompute advances the iteration and reconciles the digest", async () => {
    const before = flow.matrix!.fact_digest;
    await flow.triage({
      kind: "process",
      left: "l0",
      right: "r1",
      verdict: "equal",
    });
    expect(flow.matrix!.fact_digest).not.toBe(before);
    expect(flow.iteration).toBeGreaterThan(1);
  });

  it("records every recompute in the history", async () => {
    flow.seedHistory([
      {
        index: 1,
        scope: "processes",
        created_at: "then",
        fact_digest: "d0",
        weights: { w_pds: 1 / 3, w_pcs: 1 / 3, w_pch: 1 / 3 },
        left_count: 2,
        right_count: 2,
      },
    ]);
    await flow.triage({ kind: "process", left: "l0", right: "r0", verdict: "equal" });
    expect(flow.history).toHaveLength(2);
    expect(flow.history[1]!.fact_digest).toBe("d1");
    expect(flow.history[1]!.weights.w_pds).toBeCloseTo(1 / 3, 9);
  });

  it("recompute without new facts repeats the matrix but extends the history", async () => {
    const cellsBefore = structuredClone(flow.matrix!.cells);
    await flow.recompute("processes");
    await flow.recompute("processes");
    expect(flow.matrix!.cells).toEqual(cellsBefore);
    expect(flow.matrix!.fact_digest).toBe("d0");
    expect(flow.history).toHaveLength(2);
  });
});

describe("assumption list rendering", () => {
  it("renders ranked rows with accept and reject actions", () => {
    const html = renderAssumptions(flow.assumptions);
    expect(html.match(/<li data-left=/g) ?? []).toHaveLength(4);
    expect(html).toContain('data-verdict="equal"');
    expect(html).toContain('data-verdict="different"');
    expect(html).toContain("#1");
  });

  it("caps long lists and says how many are hidden", () => {
    const rows = Array.from({ length: 30 }, (_, i) => ({
      rank: i + 1,
      left: `l${i}`,
      right: `r${i}`,
      score: 1 - i / 30,
    }));
    const html = renderAssumptions(rows, 25);
    expect(html.match(/<li data-left=/g) ?? []).toHaveLength(25);
    expect(html).toContain("and 5 more");
  });

  it("shows the settled state when nothing is open", () => {
    expect(renderAssumptions([])).toContain("settled");
  });
});
