import { describe, expect, it } from "vitest";

import {
  EMPTY_STATE,
  HeatmapGrid,
  cellMarker,
  rampColor,
  renderCellDetail,
  renderHeatmap,
} from "../src/heatmap.js";
import { makeMatrix } from "./fake.js";

describe("heatmap grid", () => {
  it("maps a served 10x12 matrix onto the right dimensions", () => {
    const grid = new HeatmapGrid(makeMatrix(10, 12));
    expect(grid.rows).toBe(10);
    expect(grid.cols).toBe(12);
    expect(grid.cellAt(0, 0).left).toBe("l0");
    expect(grid.cellAt(9, 11).left).toBe("l9");
    expect(grid.cellAt(9, 11).right).toBe("r11");
    // row-major: second row starts after twelve cells
    expect(grid.cellAt(1, 0).left).toBe("l1");
    expect(grid.cellAt(1, 0).right).toBe("r0");
  });

  it("rejects out-of-bounds lookups and ragged payloads", () => {
    const matrix = makeMatrix(3, 4);
    const grid = new HeatmapGrid(matrix);
    expect(() => grid.cellAt(3, 0)).toThrow(RangeError);
    expect(() => grid.cellAt(0, 4)).toThrow(RangeError);
    expect(() => grid.cellAt(-1, 0)).toThrow(RangeError);
    const ragged = { ...matrix, cells: matrix.cells.slice(1) };
    expect(() => new HeatmapGrid(ragged)).toThrow(/ragged/);
  });
});

describe("heatmap rendering", () => {
  it("renders all 120 cells of the 10x12 fixture", () => {
    const html = renderHeatmap(makeMatrix(10, 12));
    const cells = html.match(/<td class="cell[" ]/g) ?? [];
    expect(cells).toHaveLength(120);
    expect(html.match(/<th scope="col">/g) ?? []).toHaveLength(12);
    expect(html.match(/<th scope="row">/g) ?? []).toHaveLength(10);
  });

  it("marks pinned cells with = and ≠", () => {
    const matrix = makeMatrix(2, 2);
    matrix.cells[0]!.pinned = "equal";
    matrix.cells[3]!.pinned = "different";
    expect(cellMarker(matrix.cells[0]!)).toBe("=");
    expect(cellMarker(matrix.cells[3]!)).toBe("≠");
    expect(cellMarker(matrix.cells[1]!)).toBe("");
    const html = renderHeatmap(matrix);
    expect(html).toContain('<span class="marker">=</span>');
    expect(html).toContain("<span class=\"marker\">≠</span>");
    expect(html.match(/class="cell pinned"/g) ?? []).toHaveLength(2);
  });

  it("prompts for a computation when there is no matrix", () => {
    expect(renderHeatmap(null)).toBe(EMPTY_STATE);
    expect(EMPTY_STATE).toMatch(/[Rr]un a computation/);
  });

  it("overlays expectations with the session thresholds", () => {
    const matrix = makeMatrix(2, 2);
    matrix.cells[0]!.combined = 0.1; // expected but weak
    matrix.cells[1]!.combined = 0.9; // unexpected and strong
    matrix.cells[2]!.combined = 0.9;
    matrix.cells[3]!.combined = 0.5; // expected, unremarkable
    const html = renderHeatmap(matrix, {
      expected: [
        ["l0", "r0"],
        ["l1", "r1"],
      ],
    });
    expect(html).toContain('class="cell expected weak"');
    expect(html).toContain('class="cell strong"');
    expect(html.match(/ expected/g) ?? []).toHaveLength(2);
    // without an expected list there is no overlay at all
    const plain = renderHeatmap(matrix);
    expect(plain).not.toContain("expected");
    expect(plain).not.toContain("strong");
  });

  it("marks the selected cell", () => {
    const html = renderHeatmap(makeMatrix(2, 2), { selected: { row: 1, col: 0 } });
    expect(html.match(/ selected"/g) ?? []).toHaveLength(1);
    expect(html).toContain('data-row="1" data-col="0"');
  });

  it("escapes names coming from the service", () => {
    const matrix = makeMatrix(1, 1);
    matrix.left[0]!.name = 'Design <"architecture"> & more';
    const html = renderHeatmap(matrix);
    expect(html).toContain("Design &lt;&quot;architecture&quot;&gt; &amp; more");
    expect(html).not.toContain('<"architecture">');
  });
});

describe("color ramp", () => {
  it("is a linear single-hue ramp over the unit interval", () => {
    expect(rampColor(0)).toBe("hsl(215 65% 96%)");
    expect(rampColor(1)).toBe("hsl(215 65% 45%)");
    expect(rampColor(0.5)).toBe("hsl(215 65% 71%)");
    expect(rampColor(-3)).toBe(rampColor(0));
    expect(rampColor(7)).toBe(rampColor(1));
  });
});

describe("cell detail", () => {
  it("shows per-rule scores with their effective weights", () => {
    const cell = makeMatrix(1, 1).cells[0]!;
    const html = renderCellDetail(cell);
    expect(html).toContain("product structure: 0.5000 (weight 1.00)");
    expect(html).toContain("hierarchy: 0.7500 (weight 0.00)");
    expect(html).toContain(`combined: ${cell.combined.toFixed(4)}`);
  });

  it("flags the name-only fallback when no rule applies", () => {
    const cell = { ...makeMatrix(1, 1).cells[0]!, effective_weights: [0, 0, 0] };
    expect(renderCellDetail(cell)).toContain("name match alone");
  });

  it("shows the pinned verdict", () => {
    const cell = { ...makeMatrix(1, 1).cells[0]!, pinned: "equal" as const };
    expect(renderCellDetail(cell)).toContain("Pinned equal by fact.");
  });
});
