// View state shared by the panels. Selection is kept inside the
// current matrix bounds at all times; a weight draft counts as invalid
// until it sums to one.

import type { Scope } from "./api.js";
import { isValid, type WeightVector } from "./weights.js";

export type CellAddress = { row: number; col: number };

export class ViewState {
  scope: Scope = "processes";
  sessionId: string | null = null;
  selected: CellAddress | null = null;
  weightDraft: WeightVector | null = null;

  private rows = 0;
  private cols = 0;

  /** Record the served matrix dimensions and re-clamp the selection. */
  matrixChanged(rows: number, cols: number): void {
    this.rows = rows;
    this.cols = cols;
    if (this.selected === null) return;
    if (rows === 0 || cols === 0) {
      this.selected = null;
      return;
    }
    this.selected = {
      row: Math.min(this.selected.row, rows - 1),
      col: Math.min(this.selected.col, cols - 1),
    };
  }

  select(row: number, col: number): void {
    if (this.rows === 0 || this.cols === 0) {
      this.selected = null;
      return;
    }
    this.selected = {
      row: Math.min(Math.max(0, Math.trunc(row)), this.rows - 1),
      col: Math.min(Math.max(0, Math.trunc(col)), this.cols - 1),
    };
  }

  clearSelection(): void {
    this.selected = null;
  }

  draftValid(): boolean {
    return this.weightDraft !== null && isValid(this.weightDraft);
  }
}
