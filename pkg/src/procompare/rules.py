"""Similarity rules for comparing processes across two models.

The rules combine a lexical signal (edit distance over normalized names)
with three structural signals: overlap of the accessed product sets,
overlap of the direct sub-process sets, and the best name match among
deeper descendants. A weighted sum aggregates the structural rules into
one score per process pair; engineer facts override everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InvalidArgument, PolicyInvalid, WeightsInvalid
from .facts import FactSet
from .model import ProcessModel, accessed_products, descendants, normalize_name

WEIGHT_TOLERANCE = 1e-9
HIERARCHY_DEPTH = 3


def levenshtein(left: str, right: str) -> int:
    """Minimum number of single-character insertions, deletions, and
    substitutions turning one string into the other."""
    if left == right:
        return 0
    if len(left) < len(right):
        left, right = right, left
    if not right:
        return len(left)
    previous = list(range(len(right) + 1))
    for i, ch_left in enumerate(left, start=1):
        current = [i]
        for j, ch_right in enumerate(right, start=1):
            cost = 0 if ch_left == ch_right else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def name_similarity(left: str, right: str) -> float:
    """Edit distance scaled into [0, 1]; names are normalized first.

    Two empty names are considered identical.
    """
    a = normalize_name(left)
    b = normalize_name(right)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


@dataclass(frozen=True)
class Weights:
    """Relative importance of the three structural rules; must sum to one."""

    product_structure: float = 1.0 / 3.0
    subprocess_structure: float = 1.0 / 3.0
    hierarchy: float = 1.0 / 3.0

    def __post_init__(self):
        parts = (self.product_structure, self.subprocess_structure, self.hierarchy)
        for value in parts:
            if not isinstance(value, (int, float)) or value != value or value < 0:
                raise WeightsInvalid(
                    f"weights must be non-negative numbers, got {parts}",
                    details={"weights": list(parts)},
                )
        total = sum(parts)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise WeightsInvalid(
                f"weights must sum to 1.0 within {WEIGHT_TOLERANCE}, got {total!r}",
                details={"weights": list(parts), "sum": total},
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.product_structure, self.subprocess_structure, self.hierarchy)


@dataclass
class MatchPolicy:
    """Controls when two entities count as matchable during set comparison.

    Facts take precedence: an equal fact makes a pair matchable and a
    different fact forbids it, whatever the names say. Without a fact,
    a pair is matchable when its name similarity reaches the threshold.
    """

    name_threshold: float = 0.9
    facts: FactSet = field(default_factory=FactSet)

    def __post_init__(self):
        t = self.name_threshold
        if not isinstance(t, (int, float)) or t != t or not 0.0 <= t <= 1.0:
            raise PolicyInvalid(
                f"name threshold must lie in [0, 1], got {t!r}", details={"name_threshold": t}
            )

    def matchable(self, kind: str, left_id: str, right_id: str, left_name: str, right_name: str) -> bool:
        verdict = self.facts.verdict(kind, left_id, right_id)
        if verdict == "equal":
            return True
        if verdict == "different":
            return False
        return name_similarity(left_name, right_name) >= self.name_threshold


def max_matching_size(adjacency: list[list[int]], right_count: int) -> int:
    """Size of a maximum bipartite matching, via augmenting paths."""
    match_right = [-1] * right_count

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    size = 0
    for u in range(len(adjacency)):
        if augment(u, [False] * right_count):
            size += 1
    return size


def structure_compatibility(
    left_ids,
    right_ids,
    left_names: dict[str, str],
    right_names: dict[str, str],
    kind: str,
    policy: MatchPolicy,
) -> float:
    """Share of entities that can be matched one-to-one across the two sets.

    The denominator is the larger set, so unmatched surplus on either
    side lowers the score. Two empty sets are fully compatible; one
    empty set against a non-empty one is fully incompatible.
    """
    lefts = sorted(set(left_ids))
    rights = sorted(set(right_ids))
    n = max(len(lefts), len(rights))
    if n == 0:
        return 1.0
    if not lefts or not rights:
        return 0.0
    adjacency = [
        [
            j
            for j, rid in enumerate(rights)
            if policy.matchable(kind, lid, rid, left_names[lid], right_names[rid])
        ]
        for lid in lefts
    ]
    return max_matching_size(adjacency, len(rights)) / n


def product_structure_similarity(
    left_model: ProcessModel,
    right_model: ProcessModel,
    left_pid: str,
    right_pid: str,
    policy: MatchPolicy,
) -> float:
    """Structure compatibility of the product sets the two processes access.

    Access modes are ignored: touching a product in any way puts it in
    the set.
    """
    return structure_compatibility(
        accessed_products(left_model, left_pid),
        accessed_products(right_model, right_pid),
        left_model.product_names(),
        right_model.product_names(),
        "product",
        policy,
    )


def subprocess_structure_similarity(
    left_model: ProcessModel,
    right_model: ProcessModel,
    left_pid: str,
    right_pid: str,
    policy: MatchPolicy,
) -> float:
    """Structure compatibility of the direct sub-process sets."""
    return structure_compatibility(
        left_model.process(left_pid).sub_processes,
        right_model.process(right_pid).sub_processes,
        left_model.process_names(),
        right_model.process_names(),
        "process",
        policy,
    )


def hierarchy_similarity(
    left_model: ProcessModel,
    right_model: ProcessModel,
    left_pid: str,
    right_pid: str,
    depth: int = HIERARCHY_DEPTH,
) -> float:
    """Best name similarity between any two descendants of the compared pair.

    Descendants are gathered down to the given depth, excluding the
    compared processes themselves. Two leaf processes fall back to the
    similarity of their own names; a leaf against a non-leaf scores zero.
    """
    left_subs = descendants(left_model, left_pid, depth)
    right_subs = descendants(right_model, right_pid, depth)
    if not left_subs and not right_subs:
        return name_similarity(left_model.process(left_pid).name, right_model.process(right_pid).name)
    if not left_subs or not right_subs:
        return 0.0
    left_names = left_model.process_names()
    right_names = right_model.process_names()
    return max(
        name_similarity(left_names[a], right_names[b]) for a in left_subs for b in right_subs
    )


@dataclass(frozen=True)
class CellScore:
    """All rule outcomes for one process pair."""

    left_id: str
    right_id: str
    name_score: float
    product_structure: float
    subprocess_structure: float
    hierarchy: float
    effective_weights: tuple[float, float, float]
    combined: float
    pinned: str | None = None  # verdict of a pinning fact, if any


def combined_similarity(
    left_model: ProcessModel,
    right_model: ProcessModel,
    left_pid: str,
    right_pid: str,
    weights: Weights | None = None,
    policy: MatchPolicy | None = None,
) -> CellScore:
    """Weighted combination of the structural rules for one process pair.

    A rule whose underlying sets are empty on both sides carries no
    signal; its weight is redistributed proportionally across the rules
    that do. When no rule applies the processes are compared by name
    alone, and an engineer fact for the pair pins the combined score to
    one or zero outright.
    """
    weights = weights if weights is not None else Weights()
    policy = policy if policy is not None else MatchPolicy()
    left = left_model.process(left_pid)
    right = right_model.process(right_pid)

    pds_value = product_structure_similarity(left_model, right_model, left_pid, right_pid, policy)
    pcs_value = subprocess_structure_similarity(left_model, right_model, left_pid, right_pid, policy)
    pch_value = hierarchy_similarity(left_model, right_model, left_pid, right_pid)
    name_score = name_similarity(left.name, right.name)

    active = (
        bool(accessed_products(left_model, left_pid) or accessed_products(right_model, right_pid)),
        bool(left.sub_processes or right.sub_processes),
        bool(
            descendants(left_model, left_pid, HIERARCHY_DEPTH)
            or descendants(right_model, right_pid, HIERARCHY_DEPTH)
        ),
    )
    raw = weights.as_tuple()
    values = (pds_value, pcs_value, pch_value)

    if not any(active):
        combined = name_score
        effective = (0.0, 0.0, 0.0)
    else:
        active_total = sum(w for w, on in zip(raw, active) if on)
        if active_total <= 0.0:
            # All weight sat on silent rules; fall back to an even split.
            share = 1.0 / sum(active)
            effective = tuple(share if on else 0.0 for on in active)
        else:
            effective = tuple(w / active_total if on else 0.0 for w, on in zip(raw, active))
        combined = sum(w * v for w, v in zip(effective, values))

    verdict = policy.facts.verdict("process", left_pid, right_pid)
    if verdict == "equal":
        combined = 1.0
    elif verdict == "different":
        combined = 0.0

    return CellScore(
        left_id=left_pid,
        right_id=right_pid,
        name_score=name_score,
        product_structure=pds_value,
        subprocess_structure=pcs_value,
        hierarchy=pch_value,
        effective_weights=effective,
        combined=combined,
        pinned=verdict,
    )


@dataclass(frozen=True)
class SimilarityMatrix:
    """Combined scores for every pair in a left scope crossed with a right scope."""

    left_model_id: str
    right_model_id: str
    left_ids: tuple[str, ...]
    right_ids: tuple[str, ...]
    left_names: tuple[str, ...]
    right_names: tuple[str, ...]
    cells: dict[tuple[str, str], CellScore]
    weights: Weights
    name_threshold: float

    def cell(self, left_id: str, right_id: str) -> CellScore:
        try:
            return self.cells[(left_id, right_id)]
        except KeyError:
            raise InvalidArgument(
                f"pair ({left_id!r}, {right_id!r}) is outside the matrix scope",
                details={"left": left_id, "right": right_id},
            ) from None

    def rows(self) -> list[list[CellScore]]:
        return [[self.cells[(lid, rid)] for rid in self.right_ids] for lid in self.left_ids]

    def to_json_data(self) -> dict:
        w = self.weights
        return {
            "left_model": self.left_model_id,
            "right_model": self.right_model_id,
            "weights": {
                "product_structure": w.product_structure,
                "subprocess_structure": w.subprocess_structure,
                "hierarchy": w.hierarchy,
            },
            "name_threshold": self.name_threshold,
            "left": [{"id": i, "name": n} for i, n in zip(self.left_ids, self.left_names)],
            "right": [{"id": i, "name": n} for i, n in zip(self.right_ids, self.right_names)],
            "cells": [
                {
                    "left": c.left_id,
                    "right": c.right_id,
                    "name": c.name_score,
                    "product_structure": c.product_structure,
                    "subprocess_structure": c.subprocess_structure,
                    "hierarchy": c.hierarchy,
                    "effective_weights": list(c.effective_weights),
                    "combined": c.combined,
                    "pinned": c.pinned,
                }
                for lid in self.left_ids
                for c in (self.cells[(lid, rid)] for rid in self.right_ids)
            ],
        }

    @staticmethod
    def from_json_data(data: dict) -> "SimilarityMatrix":
        w = data["weights"]
        cells = {}
        for record in data["cells"]:
            score = CellScore(
                left_id=record["left"],
                right_id=record["right"],
                name_score=record["name"],
                product_structure=record["product_structure"],
                subprocess_structure=record["subprocess_structure"],
                hierarchy=record["hierarchy"],
                effective_weights=tuple(record["effective_weights"]),
                combined=record["combined"],
                pinned=record["pinned"],
            )
            cells[(score.left_id, score.right_id)] = score
        return SimilarityMatrix(
            left_model_id=data["left_model"],
            right_model_id=data["right_model"],
            left_ids=tuple(item["id"] for item in data["left"]),
            right_ids=tuple(item["id"] for item in data["right"]),
            left_names=tuple(item["name"] for item in data["left"]),
            right_names=tuple(item["name"] for item in data["right"]),
            cells=cells,
            weights=Weights(w["product_structure"], w["subprocess_structure"], w["hierarchy"]),
            name_threshold=data["name_threshold"],
        )


def _scope(model: ProcessModel, ids, side: str) -> tuple[str, ...]:
    chosen = tuple(ids) if ids is not None else tuple(model.root_processes)
    if len(set(chosen)) != len(chosen):
        raise InvalidArgument(f"{side} scope repeats a process id", details={"scope": list(chosen)})
    for pid in chosen:
        model.process(pid)
    return chosen


def compute_matrix(
    left_model: ProcessModel,
    right_model: ProcessModel,
    left_ids=None,
    right_ids=None,
    weights: Weights | None = None,
    policy: MatchPolicy | None = None,
) -> SimilarityMatrix:
    """Score every scoped pair; scopes default to the models' root processes."""
    weights = weights if weights is not None else Weights()
    policy = policy if policy is not None else MatchPolicy()
    lefts = _scope(left_model, left_ids, "left")
    rights = _scope(right_model, right_ids, "right")
    cells = {
        (lid, rid): combined_similarity(left_model, right_model, lid, rid, weights, policy)
        for lid in lefts
        for rid in rights
    }
    return SimilarityMatrix(
        left_model_id=left_model.id,
        right_model_id=right_model.id,
        left_ids=lefts,
        right_ids=rights,
        left_names=tuple(left_model.process(pid).name for pid in lefts),
        right_names=tuple(right_model.process(pid).name for pid in rights),
        cells=cells,
        weights=weights,
        name_threshold=policy.name_threshold,
    )
