// Page shell: wires the panels to a live service with plain DOM
// delegation. Everything interesting is in the imported modules; this
// file only moves strings and events around.

import { ApiClient, ServiceError, type Fact } from "./api.js";
import { renderCellDetail, renderHeatmap, HeatmapGrid } from "./heatmap.js";
import { ModelCatalog, renderPairInspector } from "./inspector.js";
import { PlanBoard, renderPlan, renderReference } from "./planboard.js";
import { ViewState } from "./state.js";
import { renderAssumptions, TriageFlow } from "./triage.js";
import {
  EVEN,
  fromBody,
  isValid,
  renderHistory,
  setWeight,
  toBody,
  type WeightVector,
} from "./weights.js";

export function bootstrap(root: HTMLElement, baseUrl: string, sessionId: string): void {
  const api = new ApiClient(baseUrl);
  const catalog = new ModelCatalog(api);
  const state = new ViewState();
  const flow = new TriageFlow(api, sessionId);
  const board = new PlanBoard(api, sessionId);
  state.sessionId = sessionId;
  let weights: WeightVector = EVEN;
  let facts: Fact[] = [];
  let detailToken = 0;

  root.innerHTML = `
    <div class="layout">
      <section id="heatmap"></section>
      <aside id="detail"></aside>
      <section id="assumptions"></section>
      <section id="weights">
        ${[0, 1, 2]
          .map(
            (i) =>
              `<label>w${i}<input type="range" min="0" max="1" step="0.01" data-weight="${i}"></label>`,
          )
          .join("")}
        <button id="recompute">recompute</button>
        <span id="stale"></span>
        <div id="history"></div>
      </section>
      <section id="plan">
        <button id="load-plan">merge plan</button>
        <button id="build-ref">build reference</button>
        <div id="plan-body"></div>
        <div id="reference-body"></div>
      </section>
    </div>`;

  const panel = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;

  function paintDetail(): void {
    const target = panel("detail");
    if (!flow.matrix || !state.selected) {
      target.innerHTML = "";
      return;
    }
    const grid = new HeatmapGrid(flow.matrix);
    const cell = grid.cellAt(state.selected.row, state.selected.col);
    target.innerHTML = renderCellDetail(cell); // rule view right away
    const token = ++detailToken;
    const { left_model, right_model } = flow.matrix;
    Promise.all([catalog.get(left_model), catalog.get(right_model)])
      .then(([left, right]) => {
        if (token !== detailToken) return; // selection moved on
        const fact =
          facts.find(
            (f) => f.kind === "process" && f.left === cell.left && f.right === cell.right,
          ) ?? null;
        target.innerHTML = renderPairInspector({ cell, left, right, fact });
      })
      .catch(() => {
        // documents unavailable; the rule breakdown stays up
      });
  }

  function paint(): void {
    panel("heatmap").innerHTML = renderHeatmap(flow.matrix, { selected: state.selected });
    panel("assumptions").innerHTML =
      (flow.lastError ? `<p class="rejection" role="alert">${flow.lastError}</p>` : "") +
      renderAssumptions(flow.assumptions);
    panel("stale").textContent = flow.stale ? "matrix out of date" : "";
    panel("history").innerHTML = renderHistory(flow.history);
    paintDetail();
    root.querySelectorAll<HTMLInputElement>("input[data-weight]").forEach((input, i) => {
      input.value = String(weights[i as 0 | 1 | 2]);
    });
    panel("plan-body").innerHTML = renderPlan(board);
    panel("reference-body").innerHTML = board.built ? renderReference(board.built) : "";
  }

  panel("heatmap").addEventListener("click", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>("td.cell");
    if (!cell || !flow.matrix) return;
    state.matrixChanged(flow.matrix.left.length, flow.matrix.right.length);
    state.select(Number(cell.dataset.row), Number(cell.dataset.col));
    paint();
  });

  panel("assumptions").addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("button[data-verdict]");
    const row = button?.closest<HTMLElement>("li[data-left]");
    if (!button || !row) return;
    const ok = await flow.triage({
      kind: "process",
      left: row.dataset.left!,
      right: row.dataset.right!,
      verdict: button.dataset.verdict as "equal" | "different",
    });
    if (ok) {
      try {
        facts = (await api.session(sessionId)).facts;
      } catch {
        // stale fact list is tolerable; the matrix pins still show
      }
    }
    if (flow.matrix) state.matrixChanged(flow.matrix.left.length, flow.matrix.right.length);
    paint();
  });

  panel("weights").addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.dataset.weight === undefined) return;
    weights = setWeight(weights, Number(input.dataset.weight) as 0 | 1 | 2, Number(input.value));
    paint();
  });

  panel("weights").addEventListener("click", async (event) => {
    if ((event.target as HTMLElement).id !== "recompute") return;
    if (!isValid(weights)) return; // unreachable by construction, cheap to keep
    await api.putWeights(sessionId, toBody(weights));
    await flow.recompute(state.scope);
    if (flow.matrix) state.matrixChanged(flow.matrix.left.length, flow.matrix.right.length);
    paint();
  });

  panel("plan").addEventListener("click", async (event) => {
    const id = (event.target as HTMLElement).id;
    if (id === "load-plan") {
      await board.load();
      paint();
    } else if (id === "build-ref") {
      try {
        await board.build();
      } catch (error) {
        if (!(error instanceof ServiceError)) throw error;
        board.rejection = error.message;
      }
      paint();
    }
  });

  api
    .session(sessionId)
    .then(async (info) => {
      weights = fromBody(info.weights);
      facts = info.facts;
      flow.seedHistory(info.iterations);
      if (info.iterations.length > 0) {
        await flow.refresh();
        state.matrixChanged(flow.matrix!.left.length, flow.matrix!.right.length);
      }
      paint();
    })
    .catch((error) => {
      root.innerHTML = `<p class="rejection">${String(error)}</p>`;
    });
}
