"""Merge planning and reference-model construction.

After a comparison session has gathered enough facts, the engineer turns
it into a reference process model in three steps: propose a merge plan
from the facts plus a few annotations, adjust the plan (accept, or
reassign entries), and build. The built model merges equal processes
into common entities and keeps the rest visible inside optional (OPT)
and alternative (ALT) boxes, each box carrying variation reasons drafted
from the differing context attributes of the source projects.

Plans are mutable and single-writer, like sessions; built reference
models are immutable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import (
    MergeConflict,
    ParseError,
    PlanError,
    UnaccountedProcesses,
    UnknownEntity,
)
from .model import (
    CharacterizationVector,
    ProcessEntity,
    ProcessModel,
    ProductAccess,
    ensure_valid,
    model_from_data,
    model_to_data,
    normalize_name,
    slugify,
)
from .session import Session

OPTIONAL_REASONS = ("no-counterpart", "skipped-but-important")


@dataclass(frozen=True)
class Annotation:
    """Engineer input to plan proposal, attached to one source process."""

    process_id: str
    source: str  # left | right
    skipped_but_important: bool = False
    purpose: str = ""
    exclude: bool = False
    note: str = ""


@dataclass(frozen=True)
class CommonGroup:
    left_id: str
    right_id: str
    name: str  # left name wins; the right name stays visible via provenance
    fact_id: str


@dataclass(frozen=True)
class OptionalCandidate:
    process_id: str
    source: str
    reason: str
    nested_in: str | None = None  # alternative group hosting this as a nested OPT box


@dataclass(frozen=True)
class AlternativeGroup:
    id: str
    purpose: str
    left_members: tuple[str, ...]
    right_members: tuple[str, ...]


@dataclass(frozen=True)
class Exclusion:
    process_id: str
    source: str
    note: str = ""


@dataclass
class MergePlan:
    left_model_id: str
    right_model_id: str
    common_groups: list[CommonGroup] = field(default_factory=list)
    optional_candidates: list[OptionalCandidate] = field(default_factory=list)
    alternative_groups: list[AlternativeGroup] = field(default_factory=list)
    exclusions: list[Exclusion] = field(default_factory=list)
    # Snapshots taken at proposal time so the plan can be checked offline.
    equal_facts: dict[tuple[str, str], str] = field(default_factory=dict)
    left_process_ids: tuple[str, ...] = ()
    right_process_ids: tuple[str, ...] = ()
    final: bool = False

    def assignments(self, side: str) -> dict[str, str]:
        """Map each planned process id on one side to its entry kind."""
        out: dict[str, str] = {}

        def put(pid: str, kind: str) -> None:
            if pid in out:
                raise PlanError(
                    f"process {pid!r} appears in more than one plan entry",
                    details={"process": pid, "side": side},
                )
            out[pid] = kind

        for group in self.common_groups:
            put(group.left_id if side == "left" else group.right_id, "common")
        for group in self.alternative_groups:
            members = group.left_members if side == "left" else group.right_members
            for pid in members:
                put(pid, "alternative")
        for candidate in self.optional_candidates:
            if candidate.source == side:
                put(candidate.process_id, "optional")
        for exclusion in self.exclusions:
            if exclusion.source == side:
                put(exclusion.process_id, "excluded")
        return out

    def group(self, group_id: str) -> AlternativeGroup:
        for group in self.alternative_groups:
            if group.id == group_id:
                return group
        raise PlanError(f"no alternative group {group_id!r}", details={"group": group_id})


@dataclass(frozen=True)
class Accept:
    pass


@dataclass(frozen=True)
class Reassign:
    process_id: str
    to: str  # common | optional | alternative | excluded
    source: str | None = None  # required when the id exists in both models
    group_id: str | None = None  # target for to=alternative
    counterpart: str | None = None  # other-side id for to=common
    reason: str | None = None  # optional reason / exclusion note
    nested: bool = False  # to=alternative: keep optional, render inside the group


@dataclass(frozen=True)
class VariationReason:
    factor: str
    characteristic: str
    left_value: str
    right_value: str
    note: str = ""


@dataclass(frozen=True)
class VariationBox:
    id: str
    kind: str  # OPT | ALT
    member_process_ids: tuple[str, ...] = ()
    nested_boxes: tuple["VariationBox", ...] = ()
    variation_reasons: tuple[VariationReason, ...] = ()
    purpose: str = ""


@dataclass(frozen=True)
class ReferenceProcessModel:
    base: ProcessModel
    boxes: tuple[VariationBox, ...]
    provenance: dict
    context_pair: tuple[CharacterizationVector, CharacterizationVector]
    exclusions: tuple[Exclusion, ...]
    left_model_id: str
    right_model_id: str
    source_counts: tuple[int, int]


def _resolve_side(session: Session, process_id: str, source: str | None) -> str:
    in_left = process_id in session.left_model.processes
    in_right = process_id in session.right_model.processes
    if source is not None:
        if source not in ("left", "right"):
            raise PlanError(f"source must be left or right, got {source!r}", details={"source": source})
        if (source == "left" and not in_left) or (source == "right" and not in_right):
            raise UnknownEntity(
                f"{source} model has no process {process_id!r}",
                details={"process": process_id, "source": source},
            )
        return source
    if in_left and in_right:
        raise PlanError(
            f"process id {process_id!r} exists in both models; specify a source",
            details={"process": process_id},
        )
    if in_left:
        return "left"
    if in_right:
        return "right"
    raise UnknownEntity(f"no model has a process {process_id!r}", details={"process": process_id})


def _exhausted(session: Session, side: str) -> set[str]:
    """Processes rejected against every counterpart in the latest scope."""
    matrix = session.latest().matrix
    own_ids = session.left_model.processes if side == "left" else session.right_model.processes
    counterparts = matrix.right_ids if side == "left" else matrix.left_ids
    if not counterparts:
        return set()
    out = set()
    for pid in own_ids:
        verdicts = [
            session.facts.verdict("process", pid, other)
            if side == "left"
            else session.facts.verdict("process", other, pid)
            for other in counterparts
        ]
        if "equal" not in verdicts and all(v == "different" for v in verdicts):
            out.add(pid)
    return out


def propose_plan(session: Session, annotations: list[Annotation] | None = None) -> MergePlan:
    """Derive a merge plan from the session's facts and the annotations.

    Equal-fact pairs become common groups. Pairs rejected by a fact but
    sharing an annotated purpose become alternative groups: similar goal,
    different means. Processes rejected against every counterpart in the
    latest scope, or flagged as skipped but important, become optional
    candidates; annotated exclusions fill the exclusion bucket. Anything
    left is simply not in the plan yet and will block the build.

    Proposal is deterministic: the same facts and annotations always
    yield the same plan.
    """
    session.latest()  # a completed iteration is required
    notes: dict[tuple[str, str], Annotation] = {}
    for raw in annotations or []:
        side = _resolve_side(session, raw.process_id, raw.source)
        resolved = replace(raw, source=side)
        key = (side, raw.process_id)
        if key in notes:
            raise PlanError(
                f"process {raw.process_id!r} is annotated twice", details={"process": raw.process_id}
            )
        notes[key] = resolved

    plan = MergePlan(
        left_model_id=session.left_model.id,
        right_model_id=session.right_model.id,
        left_process_ids=tuple(sorted(session.left_model.processes)),
        right_process_ids=tuple(sorted(session.right_model.processes)),
    )
    taken_left: set[str] = set()
    taken_right: set[str] = set()

    process_facts = session.facts.facts("process")
    plan.equal_facts = {
        (f.left_id, f.right_id): f.id for f in process_facts if f.verdict == "equal"
    }

    # Equal facts first; a process joins at most one common group, so
    # many-to-many verdicts resolve greedily in id order.
    for fact in process_facts:
        if fact.verdict != "equal":
            continue
        if fact.left_id in taken_left or fact.right_id in taken_right:
            continue
        plan.common_groups.append(
            CommonGroup(
                left_id=fact.left_id,
                right_id=fact.right_id,
                name=session.left_model.process(fact.left_id).name,
                fact_id=fact.id,
            )
        )
        taken_left.add(fact.left_id)
        taken_right.add(fact.right_id)

    # Rejected pairs with a shared purpose note turn into alternatives.
    groups: dict[str, tuple[list[str], list[str], str]] = {}
    for fact in process_facts:
        if fact.verdict != "different":
            continue
        if fact.left_id in taken_left or fact.right_id in taken_right:
            continue
        left_note = notes.get(("left", fact.left_id))
        right_note = notes.get(("right", fact.right_id))
        if not left_note or not right_note:
            continue
        purpose = left_note.purpose.strip()
        if not purpose or purpose != right_note.purpose.strip():
            continue
        gid = "alt-" + slugify(purpose)
        lefts, rights, _ = groups.setdefault(gid, ([], [], purpose))
        if fact.left_id not in lefts:
            lefts.append(fact.left_id)
        if fact.right_id not in rights:
            rights.append(fact.right_id)
        taken_left.add(fact.left_id)
        taken_right.add(fact.right_id)
    for gid in sorted(groups):
        lefts, rights, purpose = groups[gid]
        plan.alternative_groups.append(
            AlternativeGroup(gid, purpose, tuple(sorted(lefts)), tuple(sorted(rights)))
        )

    for side, model, taken in (
        ("left", session.left_model, taken_left),
        ("right", session.right_model, taken_right),
    ):
        exhausted = _exhausted(session, side)
        for pid in sorted(model.processes):
            if pid in taken:
                continue
            note = notes.get((side, pid))
            if note and note.exclude:
                plan.exclusions.append(Exclusion(pid, side, note.note))
                taken.add(pid)
            elif pid in exhausted:
                plan.optional_candidates.append(OptionalCandidate(pid, side, "no-counterpart"))
                taken.add(pid)
            elif note and note.skipped_but_important:
                plan.optional_candidates.append(
                    OptionalCandidate(pid, side, "skipped-but-important")
                )
                taken.add(pid)

    return plan


def _remove_entry(plan: MergePlan, process_id: str, side: str) -> None:
    for i, group in enumerate(plan.common_groups):
        if (side == "left" and group.left_id == process_id) or (
            side == "right" and group.right_id == process_id
        ):
            # Dropping a common group frees its counterpart too.
            del plan.common_groups[i]
            return
    for i, group in enumerate(plan.alternative_groups):
        members = group.left_members if side == "left" else group.right_members
        if process_id in members:
            trimmed = tuple(pid for pid in members if pid != process_id)
            plan.alternative_groups[i] = (
                replace(group, left_members=trimmed)
                if side == "left"
                else replace(group, right_members=trimmed)
            )
            return
    for i, candidate in enumerate(plan.optional_candidates):
        if candidate.process_id == process_id and candidate.source == side:
            del plan.optional_candidates[i]
            return
    for i, exclusion in enumerate(plan.exclusions):
        if exclusion.process_id == process_id and exclusion.source == side:
            del plan.exclusions[i]
            return


def decide(plan: MergePlan, decision: Accept | Reassign) -> MergePlan:
    """Apply one engineer decision to the plan.

    Accepting marks the plan final. A reassignment moves one process to a
    new classification, rechecking the plan invariants: one entry per
    process, and common groups only over equal-fact pairs. Reassigning a
    final plan reopens it.
    """
    if isinstance(decision, Accept):
        plan.final = True
        return plan
    if not isinstance(decision, Reassign):
        raise PlanError(f"unsupported decision {decision!r}")

    pid = decision.process_id
    in_left = pid in plan.left_process_ids
    in_right = pid in plan.right_process_ids
    if decision.source is not None:
        side = decision.source
        if side not in ("left", "right"):
            raise PlanError(f"source must be left or right, got {side!r}", details={"source": side})
        if (side == "left" and not in_left) or (side == "right" and not in_right):
            raise UnknownEntity(f"{side} model has no process {pid!r}", details={"process": pid})
    elif in_left and in_right:
        raise PlanError(f"process id {pid!r} exists in both models; specify a source", details={"process": pid})
    elif in_left or in_right:
        side = "left" if in_left else "right"
    else:
        raise UnknownEntity(f"no model has a process {pid!r}", details={"process": pid})

    _remove_entry(plan, pid, side)

    if decision.to == "common":
        other = decision.counterpart
        if other is None:
            raise PlanError("reassigning to common needs a counterpart process id")
        left_id, right_id = (pid, other) if side == "left" else (other, pid)
        fact_id = plan.equal_facts.get((left_id, right_id))
        if fact_id is None:
            raise PlanError(
                f"common groups require an equal fact; none recorded for ({left_id!r}, {right_id!r})",
                details={"left": left_id, "right": right_id},
            )
        other_side = "right" if side == "left" else "left"
        if other in plan.assignments(other_side):
            raise PlanError(
                f"counterpart {other!r} is already planned; free it first", details={"process": other}
            )
        plan.common_groups.append(CommonGroup(left_id, right_id, "", fact_id))
    elif decision.to == "optional":
        reason = decision.reason or "skipped-but-important"
        if reason not in OPTIONAL_REASONS:
            raise PlanError(
                f"optional reason must be one of {OPTIONAL_REASONS}, got {reason!r}",
                details={"reason": reason},
            )
        plan.optional_candidates.append(OptionalCandidate(pid, side, reason))
    elif decision.to == "alternative":
        if decision.group_id is None:
            raise PlanError("reassigning to alternative needs a group id")
        group = plan.group(decision.group_id)
        if decision.nested:
            plan.optional_candidates.append(
                OptionalCandidate(pid, side, decision.reason or "skipped-but-important", nested_in=group.id)
            )
        else:
            for i, existing in enumerate(plan.alternative_groups):
                if existing.id == group.id:
                    if side == "left":
                        plan.alternative_groups[i] = replace(
                            existing, left_members=existing.left_members + (pid,)
                        )
                    else:
                        plan.alternative_groups[i] = replace(
                            existing, right_members=existing.right_members + (pid,)
                        )
    elif decision.to == "excluded":
        plan.exclusions.append(Exclusion(pid, side, decision.reason or ""))
    else:
        raise PlanError(f"unknown classification {decision.to!r}", details={"to": decision.to})

    plan.assignments("left")  # recheck the one-entry invariant on both sides
    plan.assignments("right")
    plan.final = False
    return plan


def _merged_id(preferred: str, used: set[str], namespace: str) -> str:
    if preferred not in used:
        return preferred
    return f"{namespace}:{preferred}"


def _variation_reasons(left: CharacterizationVector, right: CharacterizationVector) -> tuple:
    """One reason per context attribute whose values differ between the models."""
    keys = sorted(
        {(e.factor, e.characteristic) for e in left.entries}
        | {(e.factor, e.characteristic) for e in right.entries}
    )
    reasons = []
    for factor, characteristic in keys:
        lv = left.value_of(factor, characteristic) or ""
        rv = right.value_of(factor, characteristic) or ""
        if lv != rv:
            reasons.append(VariationReason(factor, characteristic, lv, rv))
    return tuple(reasons)


def build_reference_model(session: Session, plan: MergePlan) -> ReferenceProcessModel:
    """Merge the two session models according to a final plan.

    Common pairs collapse into one process (left name and id win; product
    accesses are unioned through the equal product facts). Alternative and
    optional processes are copied into the base so the variation boxes
    reference real entities, optionals nested in an alternative group
    appear as OPT boxes inside that group's side, and every source
    process must be accounted for exactly once.
    """
    left_model = session.left_model
    right_model = session.right_model
    if not plan.final:
        raise PlanError("plan must be accepted before building", details={"final": False})
    if plan.left_model_id != left_model.id or plan.right_model_id != right_model.id:
        raise PlanError(
            "plan was proposed for different models",
            details={"plan": [plan.left_model_id, plan.right_model_id]},
        )

    seen_left: set[str] = set()
    seen_right: set[str] = set()
    for group in plan.common_groups:
        if group.left_id in seen_left or group.right_id in seen_right:
            raise MergeConflict(
                f"common groups overlap on ({group.left_id!r}, {group.right_id!r})",
                details={"left": group.left_id, "right": group.right_id},
            )
        seen_left.add(group.left_id)
        seen_right.add(group.right_id)
        if session.facts.verdict("process", group.left_id, group.right_id) != "equal":
            raise PlanError(
                f"common group ({group.left_id!r}, {group.right_id!r}) has no equal fact",
                details={"left": group.left_id, "right": group.right_id},
            )

    assigned = {"left": plan.assignments("left"), "right": plan.assignments("right")}
    missing = {
        side: sorted(set(model.processes) - set(assigned[side]))
        for side, model in (("left", left_model), ("right", right_model))
    }
    if missing["left"] or missing["right"]:
        raise UnaccountedProcesses(
            "the plan leaves processes unaccounted: "
            + ", ".join(
                f"{side}:{pid}" for side in ("left", "right") for pid in missing[side]
            ),
            details=missing,
        )
    for side, model in (("left", left_model), ("right", right_model)):
        unknown = sorted(set(assigned[side]) - set(model.processes))
        if unknown:
            raise PlanError(
                f"plan references processes missing from the {side} model: {', '.join(unknown)}",
                details={side: unknown},
            )

    used_ids: set[str] = set()
    for collection in (left_model.processes, left_model.products, left_model.roles, left_model.tools):
        used_ids.update(collection)

    # Products: equal product facts identify pairs; the left product keeps
    # its identity and absorbs the right one.
    product_map_right: dict[str, str] = {}
    product_provenance: dict[str, dict] = {}
    merged_products: dict[str, object] = dict(left_model.products)
    for pid, product in left_model.products.items():
        product_provenance[pid] = {
            "left": {"model": left_model.id, "id": pid, "name": product.name},
            "right": None,
        }
    for fact in session.facts.facts("product"):
        if fact.verdict != "equal":
            continue
        if fact.left_id in left_model.products and fact.right_id in right_model.products:
            if fact.right_id in product_map_right:
                continue  # first pairing in fact order wins
            product_map_right[fact.right_id] = fact.left_id
            product_provenance[fact.left_id]["right"] = {
                "model": right_model.id,
                "id": fact.right_id,
                "name": right_model.products[fact.right_id].name,
            }
    for pid in sorted(right_model.products):
        if pid in product_map_right:
            continue
        merged = _merged_id(pid, used_ids, right_model.id)
        used_ids.add(merged)
        product_map_right[pid] = merged
        merged_products[merged] = replace(right_model.products[pid], id=merged)
        product_provenance[merged] = {
            "left": None,
            "right": {"model": right_model.id, "id": pid, "name": right_model.products[pid].name},
        }

    merged_roles = dict(left_model.roles)
    role_map_right: dict[str, str] = {}
    for rid in sorted(right_model.roles):
        merged = _merged_id(rid, used_ids, right_model.id)
        used_ids.add(merged)
        role_map_right[rid] = merged
        merged_roles[merged] = replace(right_model.roles[rid], id=merged)
    merged_tools = dict(left_model.tools)
    tool_map_right: dict[str, str] = {}
    for tid in sorted(right_model.tools):
        merged = _merged_id(tid, used_ids, right_model.id)
        used_ids.add(merged)
        tool_map_right[tid] = merged
        merged_tools[merged] = replace(right_model.tools[tid], id=merged)

    # Process identity: commons keep the left id; variation copies keep
    # their own id, namespaced only on collision; exclusions vanish.
    left_map: dict[str, str | None] = {}
    right_map: dict[str, str | None] = {}
    for group in plan.common_groups:
        left_map[group.left_id] = group.left_id
        right_map[group.right_id] = group.left_id
    for pid, kind in assigned["left"].items():
        if kind == "excluded":
            left_map[pid] = None
        elif kind in ("alternative", "optional"):
            left_map[pid] = pid
    for pid in sorted(assigned["right"]):
        kind = assigned["right"][pid]
        if kind == "excluded":
            right_map[pid] = None
        elif kind in ("alternative", "optional"):
            merged = _merged_id(pid, used_ids, right_model.id)
            used_ids.add(merged)
            right_map[pid] = merged

    def map_accesses(accesses, product_map) -> tuple[ProductAccess, ...]:
        seen = set()
        out = []
        for access in accesses:
            mapped = (product_map.get(access.product_id, access.product_id), access.mode)
            if mapped not in seen:
                seen.add(mapped)
                out.append(ProductAccess(*mapped))
        return tuple(out)

    identity = {pid: pid for pid in left_model.products}
    merged_processes: dict[str, ProcessEntity] = {}
    process_provenance: dict[str, dict] = {}
    common_ids = {group.left_id for group in plan.common_groups}

    for group in plan.common_groups:
        left_proc = left_model.process(group.left_id)
        right_proc = right_model.process(group.right_id)
        children = []
        for child in left_proc.sub_processes:
            mapped = left_map.get(child)
            if mapped is not None and mapped not in children:
                children.append(mapped)
        for child in right_proc.sub_processes:
            mapped = right_map.get(child)
            if mapped is not None and mapped not in children:
                children.append(mapped)
        accesses = list(map_accesses(left_proc.product_accesses, identity))
        for access in map_accesses(right_proc.product_accesses, product_map_right):
            if (access.product_id, access.mode) not in {(a.product_id, a.mode) for a in accesses}:
                accesses.append(access)
        roles = list(left_proc.role_ids) + [
            role_map_right[r] for r in right_proc.role_ids if role_map_right[r] not in left_proc.role_ids
        ]
        tools = list(left_proc.tool_ids) + [
            tool_map_right[t] for t in right_proc.tool_ids if tool_map_right[t] not in left_proc.tool_ids
        ]
        merged_processes[group.left_id] = ProcessEntity(
            id=group.left_id,
            name=left_proc.name,
            description=left_proc.description or right_proc.description,
            sub_processes=tuple(children),
            product_accesses=tuple(accesses),
            role_ids=tuple(roles),
            tool_ids=tuple(tools),
        )
        process_provenance[group.left_id] = {
            "left": {"model": left_model.id, "id": group.left_id, "name": left_proc.name},
            "right": {"model": right_model.id, "id": group.right_id, "name": right_proc.name},
        }

    def copy_variation(pid: str, side: str) -> None:
        model = left_model if side == "left" else right_model
        process_map = left_map if side == "left" else right_map
        product_map = identity if side == "left" else product_map_right
        proc = model.process(pid)
        merged = process_map[pid]
        children = []
        for child in proc.sub_processes:
            mapped = process_map.get(child)
            # Edges into the merged common hierarchy are dropped: the
            # common process already has a parent there.
            if mapped is None or mapped in common_ids:
                continue
            if mapped not in children:
                children.append(mapped)
        roles = proc.role_ids if side == "left" else tuple(role_map_right[r] for r in proc.role_ids)
        tools = proc.tool_ids if side == "left" else tuple(tool_map_right[t] for t in proc.tool_ids)
        copy = ProcessEntity(
            id=merged,
            name=proc.name,
            description=proc.description,
            sub_processes=tuple(children),
            product_accesses=map_accesses(proc.product_accesses, product_map),
            role_ids=roles,
            tool_ids=tools,
        )
        merged_processes[merged] = copy
        record = {"model": model.id, "id": pid, "name": proc.name}
        process_provenance[merged] = (
            {"left": record, "right": None} if side == "left" else {"left": None, "right": record}
        )

    variation_ids: list[tuple[str, str]] = []  # (side, source pid)
    for pid in sorted(assigned["left"]):
        if assigned["left"][pid] in ("alternative", "optional"):
            variation_ids.append(("left", pid))
    for pid in sorted(assigned["right"]):
        if assigned["right"][pid] in ("alternative", "optional"):
            variation_ids.append(("right", pid))
    for side, pid in variation_ids:
        copy_variation(pid, side)

    child_ids = {child for proc in merged_processes.values() for child in proc.sub_processes}
    roots: list[str] = []
    for pid in left_model.root_processes:
        mapped = left_map.get(pid)
        if mapped is not None and mapped not in child_ids and mapped not in roots:
            roots.append(mapped)
    for pid in right_model.root_processes:
        mapped = right_map.get(pid)
        if mapped is not None and mapped not in child_ids and mapped not in roots:
            roots.append(mapped)
    for pid in sorted(merged_processes):
        if pid not in child_ids and pid not in roots:
            roots.append(pid)

    base = ProcessModel(
        id=f"ref-{left_model.id}-{right_model.id}",
        name=f"{left_model.name} / {right_model.name} reference",
        context=CharacterizationVector(),
        processes=merged_processes,
        products=merged_products,
        roles=merged_roles,
        tools=merged_tools,
        root_processes=tuple(roots),
    )
    ensure_valid(base)

    reasons = _variation_reasons(left_model.context, right_model.context)
    boxes: list[VariationBox] = []
    nested_by_group: dict[tuple[str, str], list[VariationBox]] = {}
    for candidate in plan.optional_candidates:
        process_map = left_map if candidate.source == "left" else right_map
        merged = process_map[candidate.process_id]
        box = VariationBox(
            id=f"opt-{merged}",
            kind="OPT",
            member_process_ids=(merged,),
            variation_reasons=() if candidate.nested_in else reasons,
        )
        if candidate.nested_in:
            plan.group(candidate.nested_in)  # must still exist
            nested_by_group.setdefault((candidate.nested_in, candidate.source), []).append(box)
        else:
            boxes.append(box)
    for group in plan.alternative_groups:
        for side, members, suffix in (
            ("left", group.left_members, "a"),
            ("right", group.right_members, "b"),
        ):
            process_map = left_map if side == "left" else right_map
            mapped = tuple(sorted(process_map[pid] for pid in members))
            nested = tuple(sorted(nested_by_group.get((group.id, side), []), key=lambda b: b.id))
            if not mapped and not nested:
                raise PlanError(
                    f"alternative group {group.id!r} has an empty {side} side",
                    details={"group": group.id, "side": side},
                )
            boxes.append(
                VariationBox(
                    id=f"{group.id}-{suffix}",
                    kind="ALT",
                    member_process_ids=mapped,
                    nested_boxes=nested,
                    variation_reasons=reasons,
                    purpose=group.purpose,
                )
            )
    boxes.sort(key=lambda b: b.id)

    def box_member_count(box: VariationBox) -> int:
        return len(box.member_process_ids) + sum(box_member_count(n) for n in box.nested_boxes)

    total = len(left_model.processes) + len(right_model.processes)
    accounted = (
        2 * len(plan.common_groups)
        + sum(box_member_count(b) for b in boxes)
        + len(plan.exclusions)
    )
    if total != accounted:
        raise PlanError(
            f"accounting mismatch: {total} source processes but {accounted} planned slots",
            details={"total": total, "accounted": accounted},
        )

    return ReferenceProcessModel(
        base=base,
        boxes=tuple(boxes),
        provenance={"processes": dict(sorted(process_provenance.items())),
                    "products": dict(sorted(product_provenance.items()))},
        context_pair=(left_model.context, right_model.context),
        exclusions=tuple(sorted(plan.exclusions, key=lambda e: (e.source, e.process_id))),
        left_model_id=left_model.id,
        right_model_id=right_model.id,
        source_counts=(len(left_model.processes), len(right_model.processes)),
    )


def accounting(ref: ReferenceProcessModel) -> dict:
    """Totality bookkeeping: every source process lands in exactly one bucket."""

    def box_member_count(box: VariationBox) -> int:
        return len(box.member_process_ids) + sum(box_member_count(n) for n in box.nested_boxes)

    common_pairs = sum(
        1
        for record in ref.provenance["processes"].values()
        if record["left"] is not None and record["right"] is not None
    )
    box_members = sum(box_member_count(b) for b in ref.boxes)
    return {
        "left_processes": ref.source_counts[0],
        "right_processes": ref.source_counts[1],
        "common_pairs": common_pairs,
        "box_members": box_members,
        "exclusions": len(ref.exclusions),
        "balanced": ref.source_counts[0] + ref.source_counts[1]
        == 2 * common_pairs + box_members + len(ref.exclusions),
    }


# --- plan and reference documents ------------------------------------------


def plan_to_data(plan: MergePlan) -> dict:
    return {
        "left_model": plan.left_model_id,
        "right_model": plan.right_model_id,
        "final": plan.final,
        "common_groups": [
            {"left": g.left_id, "right": g.right_id, "name": g.name, "fact": g.fact_id}
            for g in plan.common_groups
        ],
        "optional_candidates": [
            {"process": c.process_id, "source": c.source, "reason": c.reason, "nested_in": c.nested_in}
            for c in plan.optional_candidates
        ],
        "alternative_groups": [
            {
                "id": g.id,
                "purpose": g.purpose,
                "left_members": list(g.left_members),
                "right_members": list(g.right_members),
            }
            for g in plan.alternative_groups
        ],
        "exclusions": [
            {"process": e.process_id, "source": e.source, "note": e.note} for e in plan.exclusions
        ],
        "equal_facts": [
            {"left": left, "right": right, "fact": fact_id}
            for (left, right), fact_id in sorted(plan.equal_facts.items())
        ],
        "left_process_ids": list(plan.left_process_ids),
        "right_process_ids": list(plan.right_process_ids),
    }


def plan_from_data(data: dict) -> MergePlan:
    return MergePlan(
        left_model_id=data["left_model"],
        right_model_id=data["right_model"],
        common_groups=[
            CommonGroup(g["left"], g["right"], g.get("name", ""), g.get("fact", ""))
            for g in data["common_groups"]
        ],
        optional_candidates=[
            OptionalCandidate(c["process"], c["source"], c["reason"], c.get("nested_in"))
            for c in data["optional_candidates"]
        ],
        alternative_groups=[
            AlternativeGroup(
                g["id"], g["purpose"], tuple(g["left_members"]), tuple(g["right_members"])
            )
            for g in data["alternative_groups"]
        ],
        exclusions=[
            Exclusion(e["process"], e["source"], e.get("note", "")) for e in data["exclusions"]
        ],
        equal_facts={(e["left"], e["right"]): e["fact"] for e in data.get("equal_facts", [])},
        left_process_ids=tuple(data.get("left_process_ids", [])),
        right_process_ids=tuple(data.get("right_process_ids", [])),
        final=data["final"],
    )


def _box_to_data(box: VariationBox) -> dict:
    return {
        "id": box.id,
        "kind": box.kind,
        "purpose": box.purpose,
        "members": list(box.member_process_ids),
        "nested": [_box_to_data(n) for n in box.nested_boxes],
        "reasons": [
            {
                "factor": r.factor,
                "characteristic": r.characteristic,
                "left_value": r.left_value,
                "right_value": r.right_value,
                "note": r.note,
            }
            for r in box.variation_reasons
        ],
    }


def _box_from_data(data: dict) -> VariationBox:
    kind = data["kind"]
    if kind not in ("OPT", "ALT"):
        raise ParseError(f"unknown box kind {kind!r}")
    return VariationBox(
        id=data["id"],
        kind=kind,
        member_process_ids=tuple(data["members"]),
        nested_boxes=tuple(_box_from_data(n) for n in data["nested"]),
        variation_reasons=tuple(
            VariationReason(
                r["factor"], r["characteristic"], r["left_value"], r["right_value"], r.get("note", "")
            )
            for r in data["reasons"]
        ),
        purpose=data.get("purpose", ""),
    )


def _context_to_data(context: CharacterizationVector) -> list:
    return [
        {"factor": e.factor, "characteristic": e.characteristic, "value": e.value}
        for e in context.entries
    ]


def reference_to_data(ref: ReferenceProcessModel) -> dict:
    return {
        "base": model_to_data(ref.base),
        "boxes": [_box_to_data(b) for b in ref.boxes],
        "provenance": ref.provenance,
        "context_pair": {
            "left": _context_to_data(ref.context_pair[0]),
            "right": _context_to_data(ref.context_pair[1]),
        },
        "exclusions": [
            {"process": e.process_id, "source": e.source, "note": e.note} for e in ref.exclusions
        ],
        "left_model": ref.left_model_id,
        "right_model": ref.right_model_id,
        "source_counts": {"left": ref.source_counts[0], "right": ref.source_counts[1]},
    }


def _validate_reference(ref: ReferenceProcessModel) -> None:
    ensure_valid(ref.base)

    def check_box(box: VariationBox) -> None:
        if box.kind not in ("OPT", "ALT"):
            raise PlanError(f"box {box.id!r} has unknown kind {box.kind!r}")
        if not box.member_process_ids and not box.nested_boxes:
            raise PlanError(f"box {box.id!r} is empty", details={"box": box.id})
        for pid in box.member_process_ids:
            if pid not in ref.base.processes:
                raise PlanError(
                    f"box {box.id!r} references unknown process {pid!r}",
                    details={"box": box.id, "process": pid},
                )
        for nested in box.nested_boxes:
            check_box(nested)

    for box in ref.boxes:
        check_box(box)


def reference_from_data(data: dict) -> ReferenceProcessModel:
    context = data["context_pair"]

    def vector(entries) -> CharacterizationVector:
        from .model import CharacterizationEntry

        return CharacterizationVector(
            tuple(
                CharacterizationEntry(e["factor"], e["characteristic"], e["value"]) for e in entries
            )
        )

    ref = ReferenceProcessModel(
        base=model_from_data(data["base"]),
        boxes=tuple(_box_from_data(b) for b in data["boxes"]),
        provenance=data["provenance"],
        context_pair=(vector(context["left"]), vector(context["right"])),
        exclusions=tuple(
            Exclusion(e["process"], e["source"], e.get("note", "")) for e in data["exclusions"]
        ),
        left_model_id=data["left_model"],
        right_model_id=data["right_model"],
        source_counts=(data["source_counts"]["left"], data["source_counts"]["right"]),
    )
    _validate_reference(ref)
    return ref


def serialize_reference_model(ref: ReferenceProcessModel) -> str:
    """Deterministic reference-document text; round-trips through the parser."""
    _validate_reference(ref)
    return json.dumps(reference_to_data(ref), indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def parse_reference_document(text: str) -> ReferenceProcessModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"reference document is not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from None
    return reference_from_data(data)
