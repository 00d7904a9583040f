"""HTTP service exposing models, comparison sessions, and merge planning.

All request and response bodies use the same JSON shapes as the file
formats. Domain failures surface as structured errors with a stable
``code`` field; the HTTP status is derived from that code.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import DomainError, InvalidArgument, PlanError
from .facts import Fact
from .model import model_from_data, model_to_data
from .reference import (
    Accept,
    Annotation,
    Reassign,
    accounting,
    build_reference_model,
    decide,
    plan_from_data,
    plan_to_data,
    propose_plan,
    reference_to_data,
)
from .rules import Weights
from .session import (
    IterationRecord,
    Session,
    assumptions,
    commonality_table,
    create_session,
    establish_fact,
    expectation_report,
    recompute,
    retract_fact,
    set_weights,
)
from .store import SessionStore

_STATUS_BY_CODE = {
    "unknown_model": 404,
    "unknown_session": 404,
    "unknown_entity": 404,
    "unknown_fact": 404,
    "no_matrix": 404,
    "duplicate_model": 409,
    "duplicate_fact": 409,
    "merge_conflict": 409,
    "unaccounted_processes": 409,
    "store_corrupt": 500,
}


class WeightsBody(BaseModel):
    w_pds: float = Field(description="weight of the product-structure rule")
    w_pcs: float = Field(description="weight of the sub-process-structure rule")
    w_pch: float = Field(description="weight of the hierarchy rule")

    def to_weights(self) -> Weights:
        return Weights(self.w_pds, self.w_pcs, self.w_pch)


class SessionCreate(BaseModel):
    left_model: str
    right_model: str
    weights: WeightsBody | None = None
    name_threshold: float = 0.9


class FactCreate(BaseModel):
    left: str
    right: str
    kind: str = "process"
    verdict: str
    rationale: str = ""


class AnnotationBody(BaseModel):
    process: str
    source: str | None = None
    skipped_but_important: bool = False
    purpose: str = ""
    exclude: bool = False
    note: str = ""


class DecisionBody(BaseModel):
    action: str  # accept | reassign
    process: str | None = None
    source: str | None = None
    to: str | None = None
    group: str | None = None
    counterpart: str | None = None
    reason: str | None = None
    nested: bool = False


class PlanRequest(BaseModel):
    annotations: list[AnnotationBody] | None = None
    decision: DecisionBody | None = None


def _weights_out(weights: Weights) -> dict:
    return {
        "w_pds": weights.product_structure,
        "w_pcs": weights.subprocess_structure,
        "w_pch": weights.hierarchy,
    }


def _fact_out(fact: Fact) -> dict:
    return {
        "id": fact.id,
        "kind": fact.kind,
        "left": fact.left_id,
        "right": fact.right_id,
        "verdict": fact.verdict,
        "rationale": fact.rationale,
        "created_at": fact.created_at,
    }


def _iteration_out(record: IterationRecord) -> dict:
    return {
        "index": record.index,
        "scope": record.scope,
        "created_at": record.created_at,
        "fact_digest": record.fact_digest,
        "weights": _weights_out(record.matrix.weights),
        "left_count": len(record.matrix.left_ids),
        "right_count": len(record.matrix.right_ids),
    }


def _session_out(session: Session) -> dict:
    return {
        "id": session.id,
        "created_at": session.created_at,
        "left_model": session.left_model.id,
        "right_model": session.right_model.id,
        "weights": _weights_out(session.weights),
        "name_threshold": session.name_threshold,
        "facts": [_fact_out(f) for f in session.facts.facts()],
        "iterations": [_iteration_out(r) for r in session.iterations],
        "has_merge_plan": session.merge_plan_data is not None,
    }


def create_app(store: SessionStore | str | Path) -> FastAPI:
    if not isinstance(store, SessionStore):
        store = SessionStore(store)
    app = FastAPI(title="procompare", version="0.1.0")
    app.state.store = store

    @app.exception_handler(DomainError)
    def domain_error(request: Request, exc: DomainError) -> JSONResponse:
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, 422),
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.post("/models", status_code=201)
    def post_model(document: dict = Body(...)) -> dict:
        model = model_from_data(document)
        with store.lock:
            store.add_model(model)
        return {"id": model.id}

    @app.get("/models/{model_id}")
    def get_model(model_id: str) -> dict:
        return model_to_data(store.model(model_id))

    @app.get("/models")
    def list_models() -> dict:
        return {"models": store.model_ids()}

    @app.post("/sessions", status_code=201)
    def post_session(body: SessionCreate) -> dict:
        with store.lock:
            left = store.model(body.left_model)
            right = store.model(body.right_model)
            weights = body.weights.to_weights() if body.weights else None
            session = create_session(
                left,
                right,
                weights=weights,
                name_threshold=body.name_threshold,
                session_id=store.next_session_id(),
            )
            store.add_session(session)
        return _session_out(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        with store.lock:
            return _session_out(store.session(session_id))

    @app.put("/sessions/{session_id}/weights")
    def put_weights(session_id: str, body: WeightsBody) -> dict:
        with store.lock:
            session = store.session(session_id)
            set_weights(session, body.to_weights())
            store.save_session(session)
            return {"id": session.id, "weights": _weights_out(session.weights)}

    @app.post("/sessions/{session_id}/facts", status_code=201)
    def post_fact(session_id: str, body: FactCreate) -> dict:
        with store.lock:
            session = store.session(session_id)
            fact = establish_fact(session, body.kind, body.left, body.right, body.verdict, body.rationale)
            store.save_session(session)
            return _fact_out(fact)

    @app.delete("/sessions/{session_id}/facts/{fact_id}")
    def delete_fact(session_id: str, fact_id: str) -> dict:
        with store.lock:
            session = store.session(session_id)
            fact = retract_fact(session, fact_id)
            store.save_session(session)
            return {"removed": fact.id}

    @app.post("/sessions/{session_id}/recompute")
    def post_recompute(session_id: str, scope: str = Query("processes")) -> dict:
        with store.lock:
            session = store.session(session_id)
            record = recompute(session, scope)
            store.save_session(session)
            return _iteration_out(record)

    @app.get("/sessions/{session_id}/matrix")
    def get_matrix(session_id: str) -> dict:
        with store.lock:
            session = store.session(session_id)
            record = session.latest()
            data = record.matrix.to_json_data()
            data["iteration"] = record.index
            data["scope"] = record.scope
            data["fact_digest"] = record.fact_digest
            return data

    @app.get("/sessions/{session_id}/assumptions")
    def get_assumptions(session_id: str) -> dict:
        with store.lock:
            session = store.session(session_id)
            record = session.latest()
            ranked = assumptions(session)
        return {
            "session": session_id,
            "iteration": record.index,
            "assumptions": [
                {"rank": i + 1, "left": a.left_id, "right": a.right_id, "score": a.score}
                for i, a in enumerate(ranked)
            ],
        }

    @app.get("/sessions/{session_id}/commonality-table")
    def get_commonality_table(session_id: str) -> dict:
        with store.lock:
            table = commonality_table(store.session(session_id))
        return {
            "left_model": table.left_model_id,
            "right_model": table.right_model_id,
            "scope": table.scope,
            "rows": [
                {
                    "category": row.category,
                    "left": row.left_id,
                    "right": row.right_id,
                    "facts": list(row.fact_ids),
                }
                for row in table.rows
            ],
            "pending_left": list(table.pending_left),
            "pending_right": list(table.pending_right),
        }

    @app.get("/sessions/{session_id}/expectation-report")
    def get_expectation_report(
        session_id: str,
        low: float = Query(0.3),
        high: float = Query(0.7),
        pairs: str | None = Query(None, description="comma-separated left:right pairs"),
    ) -> dict:
        expected = None
        if pairs is not None:
            expected = []
            for chunk in pairs.split(","):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if ":" not in chunk:
                    raise InvalidArgument(
                        f"expected pair must look like left:right, got {chunk!r}",
                        details={"pair": chunk},
                    )
                left, _, right = chunk.partition(":")
                expected.append((left.strip(), right.strip()))
        with store.lock:
            report = expectation_report(store.session(session_id), expected, low, high)
        return {
            "expected": [[l, r] for l, r in report.expected],
            "low": report.low,
            "high": report.high,
            "weak_expected": [
                {"left": p.left_id, "right": p.right_id, "score": p.score}
                for p in report.weak_expected
            ],
            "strong_unexpected": [
                {"left": p.left_id, "right": p.right_id, "score": p.score}
                for p in report.strong_unexpected
            ],
        }

    @app.get("/sessions/{session_id}/merge-plan")
    def get_merge_plan(session_id: str) -> dict:
        with store.lock:
            session = store.session(session_id)
            if session.merge_plan_data is not None:
                return {"stored": True, "plan": session.merge_plan_data}
            plan = propose_plan(session)
            return {"stored": False, "plan": plan_to_data(plan)}

    @app.post("/sessions/{session_id}/merge-plan")
    def post_merge_plan(session_id: str, body: PlanRequest) -> dict:
        if (body.annotations is None) == (body.decision is None):
            raise InvalidArgument("provide either annotations or a decision, not both or neither")
        with store.lock:
            session = store.session(session_id)
            if body.annotations is not None:
                plan = propose_plan(
                    session,
                    [
                        Annotation(
                            process_id=a.process,
                            source=a.source,
                            skipped_but_important=a.skipped_but_important,
                            purpose=a.purpose,
                            exclude=a.exclude,
                            note=a.note,
                        )
                        for a in body.annotations
                    ],
                )
            else:
                if session.merge_plan_data is None:
                    raise PlanError(
                        "no merge plan proposed yet; post annotations first",
                        details={"session": session_id},
                    )
                plan = plan_from_data(session.merge_plan_data)
                decision = body.decision
                if decision.action == "accept":
                    decide_input: Accept | Reassign = Accept()
                elif decision.action == "reassign":
                    if decision.process is None or decision.to is None:
                        raise InvalidArgument("a reassignment needs process and to fields")
                    decide_input = Reassign(
                        process_id=decision.process,
                        to=decision.to,
                        source=decision.source,
                        group_id=decision.group,
                        counterpart=decision.counterpart,
                        reason=decision.reason,
                        nested=decision.nested,
                    )
                else:
                    raise InvalidArgument(
                        f"unknown decision action {decision.action!r}",
                        details={"action": decision.action},
                    )
                plan = decide(plan, decide_input)
            session.merge_plan_data = plan_to_data(plan)
            store.save_session(session)
            return {"stored": True, "plan": session.merge_plan_data}

    @app.post("/sessions/{session_id}/reference-model")
    def post_reference_model(session_id: str) -> dict:
        with store.lock:
            session = store.session(session_id)
            if session.merge_plan_data is None:
                raise PlanError(
                    "no merge plan proposed yet; post annotations first",
                    details={"session": session_id},
                )
            plan = plan_from_data(session.merge_plan_data)
            ref = build_reference_model(session, plan)
        return {"reference": reference_to_data(ref), "accounting": accounting(ref)}

    return app
