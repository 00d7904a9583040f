"""Comparison sessions: iterative similarity analysis between two models.

A session owns the two models under comparison, the engineer's facts,
the current weights, and an append-only history of computed similarity
matrices. The intended loop: compute a matrix, read off the highest
ranked assumptions, confirm or reject some of them as facts, recompute,
and stop when the open assumptions are no longer interesting.

Sessions are mutable and single-writer; concurrent mutation is not
supported.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import CrossKindFact, InvalidArgument, NoMatrix, ScopeInvalid, UnknownEntity
from .facts import FACT_KINDS, Fact, FactSet, VERDICTS
from .model import ProcessModel, model_from_data, model_to_data
from .rules import MatchPolicy, SimilarityMatrix, Weights, compute_matrix

SCOPES = ("phases", "processes")
DEFAULT_LOW = 0.3
DEFAULT_HIGH = 0.7


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def phase_scope(model: ProcessModel) -> tuple[str, ...]:
    """Top-level processes in their chronological order."""
    return tuple(model.root_processes)


def process_scope(model: ProcessModel) -> tuple[str, ...]:
    """Direct children of the top-level processes, phase by phase."""
    return tuple(
        child for root in model.root_processes for child in model.processes[root].sub_processes
    )


def scope_ids(model: ProcessModel, scope: str) -> tuple[str, ...]:
    if scope == "phases":
        return phase_scope(model)
    if scope == "processes":
        return process_scope(model)
    raise ScopeInvalid(
        f"unknown scope {scope!r}, expected one of {', '.join(SCOPES)}", details={"scope": scope}
    )


@dataclass(frozen=True)
class IterationRecord:
    index: int
    scope: str
    created_at: str
    fact_digest: str
    matrix: SimilarityMatrix


@dataclass(frozen=True)
class Assumption:
    """A fact-free pair, still open for the engineer to confirm or reject."""

    left_id: str
    right_id: str
    score: float


@dataclass(frozen=True)
class PairScore:
    left_id: str
    right_id: str
    score: float


@dataclass(frozen=True)
class ExpectationReport:
    """Where the scores disagree with the engineer's expected alignment."""

    expected: tuple[tuple[str, str], ...]
    low: float
    high: float
    weak_expected: tuple[PairScore, ...]
    strong_unexpected: tuple[PairScore, ...]


@dataclass(frozen=True)
class TableRow:
    category: str  # similar | different | unmatched-left | unmatched-right
    left_id: str | None
    right_id: str | None
    fact_ids: tuple[str, ...]


@dataclass(frozen=True)
class CommonalityTable:
    """Fact-backed classification of the scoped processes."""

    left_model_id: str
    right_model_id: str
    scope: str
    rows: tuple[TableRow, ...]
    pending_left: tuple[str, ...]
    pending_right: tuple[str, ...]


@dataclass
class Session:
    id: str
    left_model: ProcessModel
    right_model: ProcessModel
    weights: Weights = field(default_factory=Weights)
    name_threshold: float = 0.9
    facts: FactSet = field(default_factory=FactSet)
    iterations: list[IterationRecord] = field(default_factory=list)
    fact_counter: int = 0
    created_at: str = field(default_factory=_now)
    merge_plan_data: dict | None = None

    def policy(self) -> MatchPolicy:
        return MatchPolicy(name_threshold=self.name_threshold, facts=self.facts)

    def latest(self) -> IterationRecord:
        if not self.iterations:
            raise NoMatrix(
                f"session {self.id!r} has no computed matrix yet", details={"session": self.id}
            )
        return self.iterations[-1]


def create_session(
    left_model: ProcessModel,
    right_model: ProcessModel,
    weights: Weights | None = None,
    name_threshold: float = 0.9,
    session_id: str = "session",
) -> Session:
    # MatchPolicy carries threshold validation; build one to fail fast.
    MatchPolicy(name_threshold=name_threshold)
    return Session(
        id=session_id,
        left_model=left_model,
        right_model=right_model,
        weights=weights if weights is not None else Weights(),
        name_threshold=name_threshold,
    )


def _entity_names(model: ProcessModel, kind: str) -> dict:
    return model.processes if kind == "process" else model.products


def establish_fact(
    session: Session,
    kind: str,
    left_id: str,
    right_id: str,
    verdict: str,
    rationale: str = "",
) -> Fact:
    """Record a verdict on a pair; both sides must be entities of the stated kind."""
    if kind not in FACT_KINDS:
        raise CrossKindFact(f"unknown fact kind {kind!r}", details={"kind": kind})
    if verdict not in VERDICTS:
        raise InvalidArgument(f"unknown verdict {verdict!r}", details={"verdict": verdict})
    for model, entity_id, side in (
        (session.left_model, left_id, "left"),
        (session.right_model, right_id, "right"),
    ):
        actual = model.entity_kind(entity_id)
        if actual is None:
            raise UnknownEntity(
                f"{side} model {model.id!r} has no entity {entity_id!r}",
                details={"model": model.id, "entity": entity_id},
            )
        if actual != kind:
            raise CrossKindFact(
                f"fact kind is {kind!r} but {side} entity {entity_id!r} is a {actual}",
                details={"kind": kind, "entity": entity_id, "actual": actual},
            )
    session.fact_counter += 1
    fact = Fact(
        id=f"f-{session.fact_counter}",
        kind=kind,
        left_id=left_id,
        right_id=right_id,
        verdict=verdict,
        rationale=rationale,
        created_at=_now(),
    )
    session.facts.add(fact)
    return fact


def retract_fact(session: Session, fact_id: str) -> Fact:
    return session.facts.remove(fact_id)


def set_weights(session: Session, weights: Weights) -> None:
    session.weights = weights


def recompute(session: Session, scope: str = "processes") -> IterationRecord:
    """Score the scoped pairs under the current weights and facts.

    Appends to the iteration history and returns the new record.
    """
    matrix = compute_matrix(
        session.left_model,
        session.right_model,
        left_ids=scope_ids(session.left_model, scope),
        right_ids=scope_ids(session.right_model, scope),
        weights=session.weights,
        policy=session.policy(),
    )
    record = IterationRecord(
        index=len(session.iterations) + 1,
        scope=scope,
        created_at=_now(),
        fact_digest=session.facts.digest(),
        matrix=matrix,
    )
    session.iterations.append(record)
    return record


def assumptions(session: Session) -> list[Assumption]:
    """Open pairs of the latest matrix, most similar first.

    Ties break on the pair ids so the ranking is reproducible.
    """
    matrix = session.latest().matrix
    out = [
        Assumption(lid, rid, matrix.cells[(lid, rid)].combined)
        for lid in matrix.left_ids
        for rid in matrix.right_ids
        if session.facts.verdict("process", lid, rid) is None
    ]
    out.sort(key=lambda a: (-a.score, a.left_id, a.right_id))
    return out


def commonality_table(session: Session) -> CommonalityTable:
    """Classify scoped processes by the facts gathered so far.

    Equal facts yield similar rows. A process that was rejected against
    every counterpart becomes an unmatched row, absorbing its rejections;
    the remaining rejections show as different rows. Processes without
    any scoped fact stay pending.
    """
    record = session.latest()
    matrix = record.matrix
    lefts = matrix.left_ids
    rights = matrix.right_ids
    right_set = set(rights)

    scoped = [
        f
        for f in session.facts.facts("process")
        if f.left_id in set(lefts) and f.right_id in right_set
    ]
    equal = [f for f in scoped if f.verdict == "equal"]
    different = [f for f in scoped if f.verdict == "different"]

    has_equal_left = {f.left_id for f in equal}
    has_equal_right = {f.right_id for f in equal}
    diff_by_left: dict[str, list[Fact]] = {}
    diff_by_right: dict[str, list[Fact]] = {}
    for f in different:
        diff_by_left.setdefault(f.left_id, []).append(f)
        diff_by_right.setdefault(f.right_id, []).append(f)

    exhausted_left = {
        lid
        for lid in lefts
        if lid not in has_equal_left
        and len({f.right_id for f in diff_by_left.get(lid, [])}) == len(rights) > 0
    }
    exhausted_right = {
        rid
        for rid in rights
        if rid not in has_equal_right
        and len({f.left_id for f in diff_by_right.get(rid, [])}) == len(lefts) > 0
    }

    rows: list[TableRow] = []
    for f in sorted(equal, key=lambda f: (f.left_id, f.right_id)):
        rows.append(TableRow("similar", f.left_id, f.right_id, (f.id,)))
    for f in sorted(different, key=lambda f: (f.left_id, f.right_id)):
        if f.left_id in exhausted_left or f.right_id in exhausted_right:
            continue  # absorbed by an unmatched row below
        rows.append(TableRow("different", f.left_id, f.right_id, (f.id,)))
    for lid in lefts:
        if lid in exhausted_left:
            backing = tuple(f.id for f in sorted(diff_by_left[lid], key=lambda f: f.right_id))
            rows.append(TableRow("unmatched-left", lid, None, backing))
    for rid in rights:
        if rid in exhausted_right:
            backing = tuple(f.id for f in sorted(diff_by_right[rid], key=lambda f: f.left_id))
            rows.append(TableRow("unmatched-right", None, rid, backing))

    touched_left = {f.left_id for f in scoped}
    touched_right = {f.right_id for f in scoped}
    return CommonalityTable(
        left_model_id=matrix.left_model_id,
        right_model_id=matrix.right_model_id,
        scope=record.scope,
        rows=tuple(rows),
        pending_left=tuple(lid for lid in lefts if lid not in touched_left),
        pending_right=tuple(rid for rid in rights if rid not in touched_right),
    )


def expectation_report(
    session: Session,
    expected: list[tuple[str, str]] | None = None,
    low: float = DEFAULT_LOW,
    high: float = DEFAULT_HIGH,
) -> ExpectationReport:
    """Flag expected pairs that score weakly and unexpected pairs that score strongly.

    Without an explicit expectation the positional diagonal of the latest
    matrix is used, which suits models listing their phases in
    chronological order.
    """
    if not 0.0 <= low <= high <= 1.0:
        raise InvalidArgument(
            f"thresholds must satisfy 0 <= low <= high <= 1, got low={low!r} high={high!r}",
            details={"low": low, "high": high},
        )
    matrix = session.latest().matrix
    if expected is None:
        pairs = tuple(zip(matrix.left_ids, matrix.right_ids))
    else:
        pairs = tuple((l, r) for l, r in expected)
    expected_set = set(pairs)
    for lid, rid in pairs:
        matrix.cell(lid, rid)  # out-of-scope pairs are a caller error

    weak = [
        PairScore(lid, rid, matrix.cells[(lid, rid)].combined)
        for lid, rid in pairs
        if matrix.cells[(lid, rid)].combined < low
    ]
    strong = [
        PairScore(lid, rid, matrix.cells[(lid, rid)].combined)
        for lid in matrix.left_ids
        for rid in matrix.right_ids
        if (lid, rid) not in expected_set and matrix.cells[(lid, rid)].combined > high
    ]
    strong.sort(key=lambda p: (-p.score, p.left_id, p.right_id))
    return ExpectationReport(
        expected=pairs,
        low=low,
        high=high,
        weak_expected=tuple(weak),
        strong_unexpected=tuple(strong),
    )


def export_heatmap(matrix: SimilarityMatrix) -> str:
    """CSV rendering of a matrix: header row of right names, one row per
    left process, cells formatted to four decimals."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([""] + list(matrix.right_names))
    for lid, lname in zip(matrix.left_ids, matrix.left_names):
        writer.writerow(
            [lname] + [f"{matrix.cells[(lid, rid)].combined:.4f}" for rid in matrix.right_ids]
        )
    return buffer.getvalue()


# --- persistence -----------------------------------------------------------


def session_to_data(session: Session) -> dict:
    w = session.weights
    return {
        "id": session.id,
        "created_at": session.created_at,
        "left_model": model_to_data(session.left_model),
        "right_model": model_to_data(session.right_model),
        "weights": {
            "product_structure": w.product_structure,
            "subprocess_structure": w.subprocess_structure,
            "hierarchy": w.hierarchy,
        },
        "name_threshold": session.name_threshold,
        "fact_counter": session.fact_counter,
        "facts": [
            {
                "id": f.id,
                "kind": f.kind,
                "left": f.left_id,
                "right": f.right_id,
                "verdict": f.verdict,
                "rationale": f.rationale,
                "created_at": f.created_at,
            }
            for f in session.facts.facts()
        ],
        "iterations": [
            {
                "index": record.index,
                "scope": record.scope,
                "created_at": record.created_at,
                "fact_digest": record.fact_digest,
                "matrix": record.matrix.to_json_data(),
            }
            for record in session.iterations
        ],
        "merge_plan": session.merge_plan_data,
    }


def session_from_data(data: dict) -> Session:
    w = data["weights"]
    facts = FactSet()
    for record in data["facts"]:
        facts.add(
            Fact(
                id=record["id"],
                kind=record["kind"],
                left_id=record["left"],
                right_id=record["right"],
                verdict=record["verdict"],
                rationale=record.get("rationale", ""),
                created_at=record.get("created_at", ""),
            )
        )
    return Session(
        id=data["id"],
        left_model=model_from_data(data["left_model"]),
        right_model=model_from_data(data["right_model"]),
        weights=Weights(w["product_structure"], w["subprocess_structure"], w["hierarchy"]),
        name_threshold=data["name_threshold"],
        facts=facts,
        iterations=[
            IterationRecord(
                index=record["index"],
                scope=record["scope"],
                created_at=record["created_at"],
                fact_digest=record["fact_digest"],
                matrix=SimilarityMatrix.from_json_data(record["matrix"]),
            )
            for record in data["iterations"]
        ],
        fact_counter=data["fact_counter"],
        created_at=data["created_at"],
        merge_plan_data=data.get("merge_plan"),
    )
