// Heatmap rendering. Pure string output so the grid logic is testable
// without a browser; the app shell drops the markup into the page.

import type { Matrix, MatrixCell } from "./api.js";

export const EMPTY_STATE = '<p class="empty-state">No scores yet. Run a computation to fill the heatmap.</p>';

// Thresholds for the expectation overlay, mirroring the session report
// defaults.
export const WEAK_BELOW = 0.3;
export const STRONG_FROM = 0.7;

export type HeatmapOptions = {
  // pairs of [left id, right id] the engineer expects to align
  expected?: [string, string][];
  selected?: { row: number; col: number } | null;
};

/** Linear single-hue ramp over [0, 1]: pale for low, saturated for high. */
export function rampColor(score: number): string {
  const clamped = Math.min(1, Math.max(0, score));
  const lightness = Math.round(96 - 51 * clamped);
  return `hsl(215 65% ${lightness}%)`;
}

export function cellMarker(cell: MatrixCell): string {
  if (cell.pinned === "equal") return "=";
  if (cell.pinned === "different") return "≠";
  return "";
}

export class HeatmapGrid {
  readonly rows: number;
  readonly cols: number;

  constructor(readonly matrix: Matrix) {
    this.rows = matrix.left.length;
    this.cols = matrix.right.length;
    if (matrix.cells.length !== this.rows * this.cols) {
      throw new Error(
        `matrix payload is ragged: ${matrix.cells.length} cells for ${this.rows}x${this.cols}`,
      );
    }
  }

  cellAt(row: number, col: number): MatrixCell {
    if (row < 0 || row >= this.rows || col < 0 || col >= this.cols) {
      throw new RangeError(`cell ${row},${col} outside ${this.rows}x${this.cols}`);
    }
    const cell = this.matrix.cells[row * this.cols + col];
    if (cell === undefined) throw new RangeError(`cell ${row},${col} missing from payload`);
    return cell;
  }
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderHeatmap(matrix: Matrix | null, options: HeatmapOptions = {}): string {
  if (matrix === null) return EMPTY_STATE;
  const grid = new HeatmapGrid(matrix);
  const expected = new Set((options.expected ?? []).map(([l, r]) => `${l}\0${r}`));

  const head = matrix.right
    .map((entry) => `<th scope="col">${escapeHtml(entry.name)}</th>`)
    .join("");
  const body: string[] = [];
  for (let row = 0; row < grid.rows; row++) {
    const axis = matrix.left[row];
    const cells: string[] = [];
    for (let col = 0; col < grid.cols; col++) {
      const cell = grid.cellAt(row, col);
      const classes = ["cell"];
      if (cell.pinned) classes.push("pinned");
      const isExpected = expected.has(`${cell.left}\0${cell.right}`);
      if (isExpected) {
        classes.push("expected");
        if (cell.combined < WEAK_BELOW) classes.push("weak");
      } else if (expected.size > 0 && cell.combined >= STRONG_FROM) {
        classes.push("strong");
      }
      if (options.selected && options.selected.row === row && options.selected.col === col) {
        classes.push("selected");
      }
      const marker = cellMarker(cell);
      cells.push(
        `<td class="${classes.join(" ")}" data-row="${row}" data-col="${col}"` +
          ` style="background:${rampColor(cell.combined)}"` +
          ` title="${escapeHtml(cell.left)} / ${escapeHtml(cell.right)}: ${cell.combined.toFixed(4)}">` +
          `${cell.combined.toFixed(2)}${marker ? `<span class="marker">${marker}</span>` : ""}</td>`,
      );
    }
    body.push(
      `<tr><th scope="row">${escapeHtml(axis ? axis.name : "")}</th>${cells.join("")}</tr>`,
    );
  }
  return (
    `<table class="heatmap" data-iteration="${matrix.iteration}" data-scope="${matrix.scope}">` +
    `<thead><tr><th></th>${head}</tr></thead><tbody>${body.join("")}</tbody></table>`
  );
}

/** Per-rule breakdown for the inspector panel next to the grid. */
export function renderCellDetail(cell: MatrixCell): string {
  const rows = [
    ["name", cell.name],
    ["product structure", cell.product_structure],
    ["sub-process structure", cell.subprocess_structure],
    ["hierarchy", cell.hierarchy],
  ] as const;
  const weights = cell.effective_weights;
  const lines = rows
    .map(([label, value], i) => {
      const weight = i === 0 ? null : weights[i - 1];
      const suffix = weight === null || weight === undefined ? "" : ` (weight ${weight.toFixed(2)})`;
      return `<li>${label}: ${value.toFixed(4)}${suffix}</li>`;
    })
    .join("");
  const allSilent = weights.every((w) => w === 0);
  const fallback = allSilent && !cell.pinned
    ? '<p class="fallback">No structural rule applies here; the score is the name match alone.</p>'
    : "";
  const pinned = cell.pinned
    ? `<p class="pinned-note">Pinned ${cell.pinned === "equal" ? "equal" : "different"} by fact.</p>`
    : "";
  return `<div class="cell-detail"><ul>${lines}</ul>${fallback}${pinned}` +
    `<p class="combined">combined: ${cell.combined.toFixed(4)}</p></div>`;
}
