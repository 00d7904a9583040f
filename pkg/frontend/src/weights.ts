// Slider model for the three rule weights. The service rejects any
// vector that does not sum to one, so the UI keeps invalid states
// unreachable: editing one slider renormalizes the other two.

import type { IterationSummary, WeightsBody } from "./api.js";

export type WeightVector = readonly [number, number, number];

export const EVEN: WeightVector = [1 / 3, 1 / 3, 1 / 3];

const TOLERANCE = 1e-9;

export function isValid(v: WeightVector): boolean {
  for (const w of v) {
    if (!Number.isFinite(w) || w < 0 || w > 1) return false;
  }
  return Math.abs(v[0] + v[1] + v[2] - 1) <= TOLERANCE;
}

/**
 * Set one weight and rescale the other two so the vector still sums
 * to one. The untouched pair keeps its internal proportion; when both
 * are zero the remainder splits evenly. Input is clamped to [0, 1].
 */
export function setWeight(current: WeightVector, index: 0 | 1 | 2, value: number): WeightVector {
  const pinned = Math.min(1, Math.max(0, Number.isFinite(value) ? value : 0));
  const remainder = 1 - pinned;
  const others: [0 | 1 | 2, 0 | 1 | 2] =
    index === 0 ? [1, 2] : index === 1 ? [0, 2] : [0, 1];
  const a = current[others[0]];
  const b = current[others[1]];
  const pool = a + b;

  const out: [number, number, number] = [0, 0, 0];
  out[index] = pinned;
  if (pool <= 0) {
    out[others[0]] = remainder / 2;
    out[others[1]] = remainder / 2;
  } else {
    const first = (a / pool) * remainder;
    out[others[0]] = first;
    out[others[1]] = remainder - first; // absorb rounding so the sum is exact
  }
  return out;
}

export function toBody(v: WeightVector): WeightsBody {
  return { w_pds: v[0], w_pcs: v[1], w_pch: v[2] };
}

export function fromBody(body: WeightsBody): WeightVector {
  return [body.w_pds, body.w_pcs, body.w_pch];
}

/** The recompute history under the sliders: which weights ran when. */
export function renderHistory(iterations: readonly IterationSummary[]): string {
  if (iterations.length === 0) {
    return '<p class="empty-state">No iterations yet.</p>';
  }
  const rows = iterations
    .map(
      (it) =>
        `<li data-index="${it.index}">#${it.index} ${it.scope}` +
        ` <span class="weights">pds ${it.weights.w_pds.toFixed(2)}` +
        ` / pcs ${it.weights.w_pcs.toFixed(2)}` +
        ` / pch ${it.weights.w_pch.toFixed(2)}</span>` +
        ` <span class="digest">${it.fact_digest.slice(0, 8)}</span></li>`,
    )
    .join("");
  return `<ol class="history">${rows}</ol>`;
}
