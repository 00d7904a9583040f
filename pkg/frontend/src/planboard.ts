// Merge plan review: list the proposed groupings, apply reassignments
// through the service, and surface its rejections verbatim. The board
// never edits the plan locally; a rejected decision leaves it as
// served.

import {
  ApiClient,
  ServiceError,
  type AnnotationInput,
  type BuildResult,
  type DecisionInput,
  type PlanData,
  type ReferenceBox,
} from "./api.js";
import { escapeHtml } from "./heatmap.js";

export class PlanBoard {
  plan: PlanData | null = null;
  stored = false;
  rejection: string | null = null;
  built: BuildResult | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  async load(): Promise<void> {
    const response = await this.api.mergePlan(this.sessionId);
    this.plan = response.plan;
    this.stored = response.stored;
  }

  async propose(annotations: AnnotationInput[]): Promise<void> {
    const response = await this.api.postAnnotations(this.sessionId, annotations);
    this.plan = response.plan;
    this.stored = response.stored;
    this.rejection = null;
  }

  /** Apply one decision; a service rejection leaves the plan intact. */
  async decide(decision: DecisionInput): Promise<boolean> {
    this.rejection = null;
    try {
      const response = await this.api.postDecision(this.sessionId, decision);
      this.plan = response.plan;
      this.stored = response.stored;
      return true;
    } catch (error) {
      if (error instanceof ServiceError && error.status < 500) {
        this.rejection = error.message;
        return false;
      }
      throw error;
    }
  }

  accept(): Promise<boolean> {
    return this.decide({ action: "accept" });
  }

  async build(): Promise<BuildResult> {
    const result = await this.api.buildReference(this.sessionId);
    this.built = result;
    return result;
  }
}

function item(text: string, attrs = ""): string {
  return `<li${attrs ? " " + attrs : ""}>${text}</li>`;
}

export function renderPlan(board: PlanBoard): string {
  const plan = board.plan;
  if (plan === null) {
    return '<p class="empty-state">No merge plan yet. Load or propose one.</p>';
  }
  const commons = plan.common_groups
    .map((g) => item(`${g.left} = ${g.right} <em>${g.name}</em>`, `data-fact="${g.fact}"`))
    .join("");
  const alts = plan.alternative_groups
    .map((g) => {
      const nestedHere = plan.optional_candidates.filter((c) => c.nested_in === g.id);
      const nested = nestedHere
        .map((c) => `<li class="nested-opt">OPT ${c.process} <em>${c.reason}</em></li>`)
        .join("");
      return item(
        `ALT <strong>${g.id}</strong> (${g.purpose}): ` +
          `[${g.left_members.join(", ")}] vs [${g.right_members.join(", ")}]` +
          (nested ? `<ul>${nested}</ul>` : ""),
        `data-group="${g.id}"`,
      );
    })
    .join("");
  const opts = plan.optional_candidates
    .filter((c) => c.nested_in === null)
    .map((c) => item(`OPT ${c.process} (${c.source}) <em>${c.reason}</em>`))
    .join("");
  const excluded = plan.exclusions
    .map((e) => item(`${e.process} (${e.source})${e.note ? ` <em>${e.note}</em>` : ""}`))
    .join("");
  const banner = board.rejection
    ? `<p class="rejection" role="alert">${board.rejection}</p>`
    : "";
  const state = plan.final ? "final" : board.stored ? "draft" : "proposal";
  return (
    `${banner}<div class="plan" data-state="${state}">` +
    `<section><h3>Common</h3><ul>${commons}</ul></section>` +
    `<section><h3>Alternatives</h3><ul>${alts}</ul></section>` +
    `<section><h3>Optional</h3><ul>${opts}</ul></section>` +
    `<section><h3>Excluded</h3><ul>${excluded}</ul></section>` +
    `</div>`
  );
}

function renderBox(box: ReferenceBox, byId: Map<string, ReferenceBox>): string {
  const reasons = box.reasons
    .slice(0, 3)
    .map(
      (r) =>
        `<li>${escapeHtml(r.characteristic)}: ` +
        `${escapeHtml(r.left_value)} vs ${escapeHtml(r.right_value)}</li>`,
    )
    .join("");
  const inner = box.nested
    .map((id) => byId.get(id))
    .filter((b): b is ReferenceBox => b !== undefined)
    .map((b) => renderBox(b, byId))
    .join("");
  return (
    `<li class="box ${box.kind.toLowerCase()}" data-box="${box.id}">` +
    `${box.kind} <strong>${escapeHtml(box.id)}</strong> (${escapeHtml(box.purpose)}): ` +
    escapeHtml(box.members.join(", ")) +
    (reasons ? `<ul class="reasons">${reasons}</ul>` : "") +
    (inner ? `<ul class="nested-boxes">${inner}</ul>` : "") +
    "</li>"
  );
}

/** Outline of the built reference model: backbone, boxes, exclusions. */
export function renderReference(result: BuildResult): string {
  const doc = result.reference;
  const byId = new Map(doc.boxes.map((b) => [b.id, b]));
  const nestedIds = new Set(doc.boxes.flatMap((b) => b.nested));
  const boxes = doc.boxes
    .filter((b) => !nestedIds.has(b.id))
    .map((b) => renderBox(b, byId))
    .join("");
  const backbone = doc.base.root_processes
    .map((id) => doc.base.processes.find((p) => p.id === id)?.name ?? id)
    .map((name) => `<li>${escapeHtml(name)}</li>`)
    .join("");
  const excluded = doc.exclusions
    .map(
      (e) =>
        `<li>${escapeHtml(e.process)} (${escapeHtml(e.source)})` +
        `${e.note ? ` <em>${escapeHtml(e.note)}</em>` : ""}</li>`,
    )
    .join("");
  const acc = result.accounting;
  const balance = acc.balanced ? "every source process accounted for" : "UNBALANCED";
  return (
    `<div class="reference-outline"><h3>${escapeHtml(doc.base.name)}</h3>` +
    `<p class="counts">${acc.common_pairs} common pairs, ${acc.box_members} box members, ` +
    `${acc.exclusions} exclusions; ${balance}</p>` +
    `<section><h4>Backbone</h4><ol class="backbone">${backbone}</ol></section>` +
    `<section><h4>Variation boxes</h4><ul class="boxes">${boxes}</ul></section>` +
    `<section><h4>Excluded</h4><ul class="excluded">${excluded}</ul></section>` +
    "</div>"
  );
}
