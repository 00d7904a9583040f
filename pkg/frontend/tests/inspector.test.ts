import { describe, expect, it } from "vitest";

import { ApiClient, type MatrixCell, type ModelDocument } from "../src/api.js";
import { ModelCatalog, renderContextPair, renderPairInspector } from "../src/inspector.js";

const leftDoc: ModelDocument = {
  id: "pilot-one",
  name: "Trading Process",
  context: [
    { factor: "Application domain", characteristic: "Application type", value: "Information system" },
    { factor: "Development characteristics", characteristic: "Team size", value: "5" },
  ],
  products: [
    { id: "pd1-wishes", name: "Customer wishes" },
    { id: "pd1-reqdoc", name: "Requirements document" },
  ],
  roles: [],
  tools: [],
  processes: [
    {
      id: "p1-req",
      name: "Requirements phase",
      description: "Collect and settle what the system must do.",
      subprocesses: ["p1-elicit"],
      accesses: [
        { product: "pd1-wishes", mode: "consume" },
        { product: "pd1-reqdoc", mode: "produce" },
      ],
    },
    { id: "p1-elicit", name: "Elicit wishes", subprocesses: [], accesses: [] },
  ],
  root_processes: ["p1-req"],
};

const rightDoc: ModelDocument = {
  id: "pilot-two",
  name: "Game Process <beta>",
  context: [
    { factor: "Application domain", characteristic: "Application type", value: "Computation intensive" },
    { factor: "Development characteristics", characteristic: "Team size", value: "5" },
    { factor: "Organization", characteristic: "Customer involvement", value: "Low" },
  ],
  products: [{ id: "pd2-needs", name: "Customer needs" }],
  roles: [],
  tools: [],
  processes: [
    {
      id: "p2-req",
      name: "Requirements phase",
      description: "Find out what the game needs.",
      subprocesses: ["p2-gather"],
      accesses: [{ product: "pd2-needs", mode: "produce" }],
    },
    { id: "p2-gather", name: "Gather requirements", subprocesses: [], accesses: [] },
  ],
  root_processes: ["p2-req"],
};

function cellFor(left: string, right: string, pinned: MatrixCell["pinned"] = null): MatrixCell {
  return {
    left,
    right,
    name: 1,
    product_structure: 0.5,
    subprocess_structure: 0.5,
    hierarchy: 0.8,
    effective_weights: [1 / 3, 1 / 3, 1 / 3],
    combined: 0.6,
    pinned,
  };
}

describe("pair inspector", () => {
  it("shows both entities with descriptions, products, and sub-processes", () => {
    const html = renderPairInspector({
      cell: cellFor("p1-req", "p2-req"),
      left: leftDoc,
      right: rightDoc,
    });
    expect(html).toContain("Collect and settle what the system must do.");
    expect(html).toContain("Find out what the game needs.");
    expect(html).toContain("Customer wishes");
    expect(html).toContain("(consume)");
    expect(html).toContain("(produce)");
    expect(html).toContain("Elicit wishes");
    expect(html).toContain("Gather requirements");
    expect(html).toContain("combined: 0.6000");
  });

  it("marks only differing context rows", () => {
    const html = renderPairInspector({
      cell: cellFor("p1-req", "p2-req"),
      left: leftDoc,
      right: rightDoc,
    });
    const differing = html.match(/class="differs"/g) ?? [];
    // application type differs; team size agrees; involvement is right-only
    expect(differing).toHaveLength(2);
    expect(html).toContain("Information system");
    expect(html).toContain("Computation intensive");
  });

  it("notes the hierarchy fallback for a leaf pair", () => {
    const leaves = renderPairInspector({
      cell: cellFor("p1-elicit", "p2-gather"),
      left: leftDoc,
      right: rightDoc,
    });
    expect(leaves).toContain("hierarchy rule falls back");
    const mixed = renderPairInspector({
      cell: cellFor("p1-req", "p2-gather"),
      left: leftDoc,
      right: rightDoc,
    });
    expect(mixed).not.toContain("hierarchy rule falls back");
  });

  it("shows the verdict and rationale of a pinning fact", () => {
    const html = renderPairInspector({
      cell: cellFor("p1-req", "p2-req", "equal"),
      left: leftDoc,
      right: rightDoc,
      fact: {
        id: "f-1",
        kind: "process",
        left: "p1-req",
        right: "p2-req",
        verdict: "equal",
        rationale: "same checklist in both shops",
        created_at: "now",
      },
    });
    expect(html).toContain("Verdict: equal.");
    expect(html).toContain("same checklist in both shops");
    expect(html).toContain("Pinned equal by fact.");
  });

  it("escapes markup coming from the documents", () => {
    const html = renderPairInspector({
      cell: cellFor("p1-req", "p2-req"),
      left: leftDoc,
      right: rightDoc,
    });
    expect(html).toContain("Game Process &lt;beta&gt;");
    expect(html).not.toContain("<beta>");
  });

  it("degrades when the pair is not in the documents", () => {
    const html = renderPairInspector({
      cell: cellFor("p1-req", "p9-ghost"),
      left: leftDoc,
      right: rightDoc,
    });
    expect(html).toContain("not found in the model documents");
  });
});

describe("context table", () => {
  it("keeps rows in first-seen order with both values", () => {
    const html = renderContextPair(leftDoc.context, rightDoc.context);
    const typeAt = html.indexOf("Application type");
    const sizeAt = html.indexOf("Team size");
    const involvementAt = html.indexOf("Customer involvement");
    expect(typeAt).toBeGreaterThan(-1);
    expect(typeAt).toBeLessThan(sizeAt);
    expect(sizeAt).toBeLessThan(involvementAt);
  });

  it("treats a one-sided entry as a difference", () => {
    const html = renderContextPair([], [{ factor: "f", characteristic: "c", value: "v" }]);
    expect(html).toContain('class="differs"');
  });
});

describe("model catalog", () => {
  it("fetches each document once", async () => {
    let calls = 0;
    const api = new ApiClient("http://svc", async (url) => {
      calls += 1;
      const doc = url.endsWith("/models/pilot-one") ? leftDoc : rightDoc;
      return new Response(JSON.stringify(doc), { status: 200 });
    });
    const catalog = new ModelCatalog(api);
    const [a, b, c] = await Promise.all([
      catalog.get("pilot-one"),
      catalog.get("pilot-one"),
      catalog.get("pilot-two"),
    ]);
    expect(a).toEqual(leftDoc);
    expect(b).toEqual(leftDoc);
    expect(c).toEqual(rightDoc);
    expect(calls).toBe(2);
  });

  it("does not cache a failed fetch", async () => {
    let calls = 0;
    const api = new ApiClient("http://svc", async () => {
      calls += 1;
      if (calls === 1) {
        return new Response(JSON.stringify({ code: "unknown_model", message: "nope", details: {} }), {
          status: 404,
        });
      }
      return new Response(JSON.stringify(leftDoc), { status: 200 });
    });
    const catalog = new ModelCatalog(api);
    await expect(catalog.get("pilot-one")).rejects.toMatchObject({ code: "unknown_model" });
    await expect(catalog.get("pilot-one")).resolves.toEqual(leftDoc);
    expect(calls).toBe(2);
  });
});
