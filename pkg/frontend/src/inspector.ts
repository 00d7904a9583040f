// Pair inspector: both entities of a selected cell side by side, so
// the engineer can read the descriptions before judging the pair. The
// documents come from the model endpoints and are cached per view.

import {
  ApiClient,
  type ContextEntry,
  type Fact,
  type MatrixCell,
  type ModelDocument,
  type ProcessEntry,
} from "./api.js";
import { escapeHtml, renderCellDetail } from "./heatmap.js";

export class ModelCatalog {
  private readonly cache = new Map<string, Promise<ModelDocument>>();

  constructor(private readonly api: ApiClient) {}

  get(id: string): Promise<ModelDocument> {
    let doc = this.cache.get(id);
    if (doc === undefined) {
      doc = this.api.model(id).catch((error) => {
        this.cache.delete(id); // a failed fetch must not stick
        throw error;
      });
      this.cache.set(id, doc);
    }
    return doc;
  }
}

function processById(doc: ModelDocument, id: string): ProcessEntry | undefined {
  return doc.processes.find((p) => p.id === id);
}

function productName(doc: ModelDocument, id: string): string {
  return doc.products.find((p) => p.id === id)?.name ?? id;
}

function processName(doc: ModelDocument, id: string): string {
  return processById(doc, id)?.name ?? id;
}

function column(doc: ModelDocument, entry: ProcessEntry): string {
  const products = (entry.accesses ?? [])
    .map(
      (a) =>
        `<li>${escapeHtml(productName(doc, a.product))}` +
        ` <span class="mode">(${escapeHtml(a.mode)})</span></li>`,
    )
    .join("");
  const subs = (entry.subprocesses ?? [])
    .map((sid) => `<li>${escapeHtml(processName(doc, sid))}</li>`)
    .join("");
  const none = '<li class="none">none</li>';
  return (
    `<div class="entity"><h4>${escapeHtml(entry.name)}</h4>` +
    `<p class="origin">${escapeHtml(doc.name)}</p>` +
    (entry.description ? `<p class="description">${escapeHtml(entry.description)}</p>` : "") +
    `<h5>Products</h5><ul class="products">${products || none}</ul>` +
    `<h5>Sub-processes</h5><ul class="subprocesses">${subs || none}</ul></div>`
  );
}

/**
 * The two characterization vectors as one table, keyed by factor and
 * characteristic; rows where the models disagree are marked, since
 * those are the entries that later justify variation boxes.
 */
export function renderContextPair(left: ContextEntry[], right: ContextEntry[]): string {
  const keys: string[] = [];
  const values = new Map<string, { left?: string; right?: string }>();
  const note = (entries: ContextEntry[], side: "left" | "right") => {
    for (const entry of entries) {
      const key = `${entry.factor}\0${entry.characteristic}`;
      let row = values.get(key);
      if (row === undefined) {
        row = {};
        values.set(key, row);
        keys.push(key);
      }
      row[side] = entry.value;
    }
  };
  note(left, "left");
  note(right, "right");
  const rows = keys
    .map((key) => {
      const [factor, characteristic] = key.split("\0");
      const row = values.get(key)!;
      const differs = row.left !== row.right;
      return (
        `<tr${differs ? ' class="differs"' : ""}>` +
        `<td>${escapeHtml(factor ?? "")}</td><td>${escapeHtml(characteristic ?? "")}</td>` +
        `<td>${escapeHtml(row.left ?? "")}</td><td>${escapeHtml(row.right ?? "")}</td></tr>`
      );
    })
    .join("");
  return (
    '<table class="context-pair"><thead><tr>' +
    "<th>Factor</th><th>Characteristic</th><th>Left</th><th>Right</th>" +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export type PairView = {
  cell: MatrixCell;
  left: ModelDocument;
  right: ModelDocument;
  fact?: Fact | null;
};

export function renderPairInspector(view: PairView): string {
  const leftEntry = processById(view.left, view.cell.left);
  const rightEntry = processById(view.right, view.cell.right);
  if (leftEntry === undefined || rightEntry === undefined) {
    return '<p class="empty-state">Pair not found in the model documents.</p>';
  }
  const bothLeaf =
    (leftEntry.subprocesses ?? []).length === 0 && (rightEntry.subprocesses ?? []).length === 0;
  const leafNote = bothLeaf
    ? '<p class="note">Leaf pair: the hierarchy rule falls back to the names of the pair itself.</p>'
    : "";
  const fact = view.fact;
  const factNote = fact
    ? `<p class="fact">Verdict: ${fact.verdict}.` +
      `${fact.rationale ? ` ${escapeHtml(fact.rationale)}` : ""}</p>`
    : "";
  return (
    '<div class="pair-inspector">' +
    `<div class="columns">${column(view.left, leftEntry)}${column(view.right, rightEntry)}</div>` +
    renderCellDetail(view.cell) +
    leafNote +
    factNote +
    "<h5>Context</h5>" +
    renderContextPair(view.left.context, view.right.context) +
    "</div>"
  );
}
