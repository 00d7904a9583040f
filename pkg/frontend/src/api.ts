// Typed client for the procompare service. The UI never computes a
// similarity value itself; everything rendered comes from these calls.

export type Scope = "phases" | "processes";

export type WeightsBody = { w_pds: number; w_pcs: number; w_pch: number };

export type AxisEntry = { id: string; name: string };

export type MatrixCell = {
  left: string;
  right: string;
  name: number;
  product_structure: number;
  subprocess_structure: number;
  hierarchy: number;
  effective_weights: number[];
  combined: number;
  pinned: "equal" | "different" | null;
};

export type Matrix = {
  left_model: string;
  right_model: string;
  weights: { product_structure: number; subprocess_structure: number; hierarchy: number };
  name_threshold: number;
  left: AxisEntry[];
  right: AxisEntry[];
  cells: MatrixCell[];
  iteration: number;
  scope: Scope;
  fact_digest: string;
};

export type AssumptionRow = { rank: number; left: string; right: string; score: number };

export type AssumptionList = { session: string; iteration: number; assumptions: AssumptionRow[] };

export type FactInput = {
  kind: "process" | "product";
  left: string;
  right: string;
  verdict: "equal" | "different";
  rationale?: string;
};

export type Fact = FactInput & { id: string; created_at: string };

export type IterationSummary = {
  index: number;
  scope: Scope;
  created_at: string;
  fact_digest: string;
  weights: WeightsBody;
  left_count: number;
  right_count: number;
};

export type SessionInfo = {
  id: string;
  created_at: string;
  left_model: string;
  right_model: string;
  weights: WeightsBody;
  name_threshold: number;
  facts: Fact[];
  iterations: IterationSummary[];
  has_merge_plan: boolean;
};

export type ContextEntry = { factor: string; characteristic: string; value: string };

export type ProductAccess = { product: string; mode: string };

export type ProcessEntry = {
  id: string;
  name: string;
  description?: string;
  subprocesses?: string[];
  accesses?: ProductAccess[];
  roles?: string[];
};

export type ModelDocument = {
  id: string;
  name: string;
  context: ContextEntry[];
  products: { id: string; name: string; description?: string }[];
  roles: { id: string; name: string }[];
  tools: { id: string; name: string }[];
  processes: ProcessEntry[];
  root_processes: string[];
};

export type PlanData = {
  left_model: string;
  right_model: string;
  final: boolean;
  common_groups: { left: string; right: string; name: string; fact: string }[];
  optional_candidates: { process: string; source: string; reason: string; nested_in: string | null }[];
  alternative_groups: { id: string; purpose: string; left_members: string[]; right_members: string[] }[];
  exclusions: { process: string; source: string; note: string }[];
  equal_facts: { left: string; right: string; fact: string }[];
  left_process_ids: string[];
  right_process_ids: string[];
};

export type PlanResponse = { stored: boolean; plan: PlanData };

export type AnnotationInput = {
  process: string;
  source?: "left" | "right";
  skipped_but_important?: boolean;
  purpose?: string;
  exclude?: boolean;
  note?: string;
};

export type DecisionInput = {
  action: "accept" | "reassign";
  process?: string;
  to?: "common" | "optional" | "alternative" | "excluded";
  source?: "left" | "right";
  group?: string;
  counterpart?: string;
  reason?: string;
  nested?: boolean;
};

export type ContextReason = {
  factor: string;
  characteristic: string;
  left_value: string;
  right_value: string;
  note: string;
};

export type ReferenceBox = {
  id: string;
  kind: "OPT" | "ALT";
  purpose: string;
  members: string[];
  nested: string[];
  reasons: ContextReason[];
};

export type ReferenceDocument = {
  base: { id: string; name: string; processes: ProcessEntry[]; root_processes: string[] };
  boxes: ReferenceBox[];
  exclusions: { process: string; source: string; note: string }[];
  left_model: string;
  right_model: string;
  source_counts: { left: number; right: number };
};

export type BuildResult = {
  reference: ReferenceDocument;
  accounting: {
    left_processes: number;
    right_processes: number;
    common_pairs: number;
    box_members: number;
    exclusions: number;
    balanced: boolean;
  };
};

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Carries the service's flat error body: {code, message, details}. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "unknown";
  let message = `service returned ${response.status}`;
  let details: Record<string, unknown> = {};
  try {
    const body = await response.json();
    if (body && typeof body === "object") {
      code = typeof body.code === "string" ? body.code : code;
      message = typeof body.message === "string" ? body.message : message;
      details = body.details ?? details;
    }
  } catch {
    // non-JSON error body; keep the status-line message
  }
  throw new ServiceError(response.status, code, message, details);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchLike: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private get(path: string): Promise<Response> {
    return this.fetchLike(this.baseUrl + path);
  }

  private send(method: string, path: string, body?: unknown): Promise<Response> {
    return this.fetchLike(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  session(id: string): Promise<SessionInfo> {
    return this.get(`/sessions/${id}`).then((r) => unwrap<SessionInfo>(r));
  }

  model(id: string): Promise<ModelDocument> {
    return this.get(`/models/${id}`).then((r) => unwrap<ModelDocument>(r));
  }

  putWeights(id: string, weights: WeightsBody): Promise<WeightsBody> {
    return this.send("PUT", `/sessions/${id}/weights`, weights).then((r) => unwrap<WeightsBody>(r));
  }

  postFact(id: string, fact: FactInput): Promise<Fact> {
    return this.send("POST", `/sessions/${id}/facts`, fact).then((r) => unwrap<Fact>(r));
  }

  deleteFact(id: string, factId: string): Promise<{ removed: string }> {
    return this.send("DELETE", `/sessions/${id}/facts/${factId}`).then((r) =>
      unwrap<{ removed: string }>(r),
    );
  }

  recompute(id: string, scope: Scope): Promise<IterationSummary> {
    return this.send("POST", `/sessions/${id}/recompute?scope=${scope}`).then((r) =>
      unwrap<IterationSummary>(r),
    );
  }

  matrix(id: string): Promise<Matrix> {
    return this.get(`/sessions/${id}/matrix`).then((r) => unwrap<Matrix>(r));
  }

  assumptions(id: string): Promise<AssumptionList> {
    return this.get(`/sessions/${id}/assumptions`).then((r) => unwrap<AssumptionList>(r));
  }

  mergePlan(id: string): Promise<PlanResponse> {
    return this.get(`/sessions/${id}/merge-plan`).then((r) => unwrap<PlanResponse>(r));
  }

  postAnnotations(id: string, annotations: AnnotationInput[]): Promise<PlanResponse> {
    return this.send("POST", `/sessions/${id}/merge-plan`, { annotations }).then((r) =>
      unwrap<PlanResponse>(r),
    );
  }

  postDecision(id: string, decision: DecisionInput): Promise<PlanResponse> {
    return this.send("POST", `/sessions/${id}/merge-plan`, { decision }).then((r) =>
      unwrap<PlanResponse>(r),
    );
  }

  buildReference(id: string): Promise<BuildResult> {
    return this.send("POST", `/sessions/${id}/reference-model`).then((r) =>
      unwrap<BuildResult>(r),
    );
  }
}
