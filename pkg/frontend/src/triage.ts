// The accept/reject loop. One triage action is exactly one posted
// fact; the matrix and assumption list refresh afterwards so the view
// reflects the narrowed pair space.

import {
  ApiClient,
  ServiceError,
  type AssumptionRow,
  type FactInput,
  type IterationSummary,
  type Matrix,
  type Scope,
} from "./api.js";

export class TriageFlow {
  matrix: Matrix | null = null;
  assumptions: AssumptionRow[] = [];
  iteration = 0;
  history: IterationSummary[] = [];
  lastError: string | null = null;

  // Facts posted since the matrix was last recomputed. Non-zero means
  // the snapshot on screen is stale.
  private pendingFacts = 0;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  get stale(): boolean {
    return this.pendingFacts > 0;
  }

  /** Adopt the iterations a reloaded session already ran. */
  seedHistory(iterations: IterationSummary[]): void {
    this.history = [...iterations];
  }

  async recompute(scope: Scope): Promise<void> {
    const record = await this.api.recompute(this.sessionId, scope);
    this.history.push(record);
    this.pendingFacts = 0;
    await this.refresh();
  }

  /** Pull the served matrix and assumption list as they stand. */
  async refresh(): Promise<void> {
    this.matrix = await this.api.matrix(this.sessionId);
    const listing = await this.api.assumptions(this.sessionId);
    this.assumptions = listing.assumptions;
    this.iteration = listing.iteration;
  }

  /**
   * Post one verdict for a pair, then recompute and refresh. Service
   * rejections (duplicate fact, unknown entity) land in lastError and
   * leave the view untouched.
   */
  async triage(fact: FactInput): Promise<boolean> {
    this.lastError = null;
    try {
      await this.api.postFact(this.sessionId, fact);
    } catch (error) {
      if (error instanceof ServiceError) {
        this.lastError = error.message;
        return false;
      }
      throw error;
    }
    this.pendingFacts += 1;
    const scope = this.matrix ? this.matrix.scope : "processes";
    await this.recompute(scope);
    return true;
  }
}

export function renderAssumptions(rows: AssumptionRow[], limit = 25): string {
  if (rows.length === 0) {
    return '<p class="empty-state">Every pair in scope is settled.</p>';
  }
  const items = rows
    .slice(0, limit)
    .map(
      (row) =>
        `<li data-left="${row.left}" data-right="${row.right}">` +
        `<span class="rank">#${row.rank}</span> ${row.left} ↔ ${row.right}` +
        ` <span class="score">${row.score.toFixed(4)}</span>` +
        ` <button data-verdict="equal">accept</button>` +
        ` <button data-verdict="different">reject</button></li>`,
    )
    .join("");
  const more = rows.length > limit ? `<p class="more">and ${rows.length - limit} more</p>` : "";
  return `<ol class="assumptions">${items}</ol>${more}`;
}
