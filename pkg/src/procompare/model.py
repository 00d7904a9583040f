"""Domain types, parsing, validation, and serialization for descriptive process models.

A process model bundles the processes, products, roles, and tools elicited
from one project together with the characterization vector describing the
project context. Models are immutable value objects: every operation here
either inspects a model or builds a new one, so models can be shared freely
between threads.

The interchange format is a UTF-8 JSON document with top-level keys
``id`` (optional, defaults to a slug of the name), ``name``, ``context``,
``products``, ``roles``, ``tools``, ``processes``, and ``root_processes``
(optional, derived from document order when absent). Entity lists are
emitted sorted by id; the explicit root list preserves the chronological
ordering of top-level processes across that sort.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    CyclicHierarchy,
    DanglingReference,
    DuplicateId,
    InvalidArgument,
    ModelInvalid,
    ParseError,
    UnknownEntity,
)

ACCESS_MODES = ("produce", "consume", "modify")

_MODEL_KEYS = {"id", "name", "context", "products", "roles", "tools", "processes", "root_processes"}
_PROCESS_KEYS = {"id", "name", "description", "subprocesses", "accesses", "roles", "tools"}
_ENTITY_KEYS = {"id", "name", "description"}
_CONTEXT_KEYS = {"factor", "characteristic", "value"}
_ACCESS_KEYS = {"product", "mode"}


def normalize_name(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs to one space."""
    return " ".join(text.split()).lower()


def slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "model"


@dataclass(frozen=True)
class CharacterizationEntry:
    factor: str
    characteristic: str
    value: str


@dataclass(frozen=True)
class CharacterizationVector:
    """Context attributes of the project a model was elicited from."""

    entries: tuple[CharacterizationEntry, ...] = ()

    def value_of(self, factor: str, characteristic: str) -> str | None:
        for entry in self.entries:
            if entry.factor == factor and entry.characteristic == characteristic:
                return entry.value
        return None


@dataclass(frozen=True)
class ProductAccess:
    product_id: str
    mode: str


@dataclass(frozen=True)
class ProcessEntity:
    id: str
    name: str
    description: str = ""
    sub_processes: tuple[str, ...] = ()
    product_accesses: tuple[ProductAccess, ...] = ()
    role_ids: tuple[str, ...] = ()
    tool_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProductEntity:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class NamedEntity:
    """Role or tool: displayed alongside processes but never scored."""

    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class Violation:
    entity_id: str
    rule: str
    message: str


@dataclass(frozen=True)
class ProcessModel:
    id: str
    name: str
    context: CharacterizationVector = CharacterizationVector()
    processes: dict[str, ProcessEntity] = field(default_factory=dict)
    products: dict[str, ProductEntity] = field(default_factory=dict)
    roles: dict[str, NamedEntity] = field(default_factory=dict)
    tools: dict[str, NamedEntity] = field(default_factory=dict)
    root_processes: tuple[str, ...] = ()

    def process(self, process_id: str) -> ProcessEntity:
        try:
            return self.processes[process_id]
        except KeyError:
            raise UnknownEntity(
                f"model {self.id!r} has no process {process_id!r}",
                details={"model": self.id, "entity": process_id},
            ) from None

    def entity_kind(self, entity_id: str) -> str | None:
        """Kind of the entity owning this id, or None if the id is unknown."""
        if entity_id in self.processes:
            return "process"
        if entity_id in self.products:
            return "product"
        if entity_id in self.roles:
            return "role"
        if entity_id in self.tools:
            return "tool"
        return None

    def process_names(self) -> dict[str, str]:
        """Normalized display names for all processes, keyed by id."""
        return {pid: normalize_name(p.name) for pid, p in self.processes.items()}

    def product_names(self) -> dict[str, str]:
        return {pid: normalize_name(p.name) for pid, p in self.products.items()}


def parent_map(model: ProcessModel) -> dict[str, list[str]]:
    """Map each process id to the ids of processes listing it as a child."""
    parents: dict[str, list[str]] = {pid: [] for pid in model.processes}
    for pid, proc in model.processes.items():
        for child in proc.sub_processes:
            if child in parents:
                parents[child].append(pid)
    return parents


def validate_model(model: ProcessModel) -> list[Violation]:
    """Check every construction invariant; an empty list means the model is sound."""
    violations: list[Violation] = []

    collections = (
        ("process", model.processes),
        ("product", model.products),
        ("role", model.roles),
        ("tool", model.tools),
    )
    seen_ids: dict[str, str] = {}
    for kind, entities in collections:
        for key, entity in entities.items():
            if key != entity.id:
                violations.append(
                    Violation(entity.id, "id-key-mismatch", f"{kind} {entity.id!r} stored under key {key!r}")
                )
            if entity.id in seen_ids:
                violations.append(
                    Violation(entity.id, "duplicate-id", f"id {entity.id!r} used by both {seen_ids[entity.id]} and {kind}")
                )
            else:
                seen_ids[entity.id] = kind
            if not normalize_name(entity.name):
                violations.append(Violation(entity.id, "empty-name", f"{kind} {entity.id!r} has an empty name"))

    seen_context: set[tuple[str, str]] = set()
    for entry in model.context.entries:
        pair = (entry.factor, entry.characteristic)
        if pair in seen_context:
            violations.append(
                Violation(model.id, "duplicate-context-entry", f"context entry {pair!r} appears twice")
            )
        seen_context.add(pair)

    for pid, proc in model.processes.items():
        for child in proc.sub_processes:
            if child not in model.processes:
                violations.append(
                    Violation(pid, "dangling-reference", f"process {pid!r} lists unknown sub-process {child!r}")
                )
        seen_access: set[tuple[str, str]] = set()
        for access in proc.product_accesses:
            if access.product_id not in model.products:
                violations.append(
                    Violation(pid, "dangling-reference", f"process {pid!r} accesses unknown product {access.product_id!r}")
                )
            if access.mode not in ACCESS_MODES:
                violations.append(
                    Violation(pid, "invalid-access-mode", f"process {pid!r} uses unknown access mode {access.mode!r}")
                )
            pair = (access.product_id, access.mode)
            if pair in seen_access:
                violations.append(
                    Violation(pid, "duplicate-access", f"process {pid!r} repeats access {pair!r}")
                )
            seen_access.add(pair)
        for rid in proc.role_ids:
            if rid not in model.roles:
                violations.append(
                    Violation(pid, "dangling-reference", f"process {pid!r} references unknown role {rid!r}")
                )
        for tid in proc.tool_ids:
            if tid not in model.tools:
                violations.append(
                    Violation(pid, "dangling-reference", f"process {pid!r} references unknown tool {tid!r}")
                )

    parents = parent_map(model)
    for pid, parent_ids in parents.items():
        if len(parent_ids) > 1:
            violations.append(
                Violation(pid, "multiple-parents", f"process {pid!r} is a sub-process of {sorted(parent_ids)}")
            )

    # Cycle check over sub-process edges; tolerates models that already
    # violate the single-parent rule.
    color: dict[str, int] = {}

    def visit(pid: str) -> None:
        color[pid] = 1
        for child in model.processes[pid].sub_processes:
            if child not in model.processes:
                continue
            state = color.get(child, 0)
            if state == 1:
                violations.append(
                    Violation(child, "cycle", f"process {child!r} is part of a sub-process cycle")
                )
            elif state == 0:
                visit(child)
        color[pid] = 2

    for pid in model.processes:
        if color.get(pid, 0) == 0:
            visit(pid)

    parentless = {pid for pid, parent_ids in parents.items() if not parent_ids}
    roots = list(model.root_processes)
    for rid in roots:
        if rid not in model.processes:
            violations.append(
                Violation(rid, "dangling-reference", f"root list references unknown process {rid!r}")
            )
    if len(set(roots)) != len(roots):
        violations.append(Violation(model.id, "root-mismatch", "root list repeats a process"))
    elif set(roots) != parentless:
        violations.append(
            Violation(
                model.id,
                "root-mismatch",
                f"root list {sorted(roots)} does not match parentless processes {sorted(parentless)}",
            )
        )

    return violations


def ensure_valid(model: ProcessModel) -> ProcessModel:
    """Raise ModelInvalid when the model violates an invariant."""
    violations = validate_model(model)
    if violations:
        first = violations[0]
        raise ModelInvalid(
            f"model {model.id!r} is invalid: {first.message}",
            details={
                "model": model.id,
                "violations": [
                    {"entity": v.entity_id, "rule": v.rule, "message": v.message} for v in violations
                ],
            },
        )
    return model


def descendants(model: ProcessModel, process_id: str, max_depth: int) -> set[str]:
    """Processes reachable through 1..max_depth sub-process edges, excluding the start."""
    if max_depth < 1:
        raise InvalidArgument(f"max_depth must be at least 1, got {max_depth}")
    model.process(process_id)
    found: set[str] = set()
    frontier = deque([(process_id, 0)])
    while frontier:
        pid, depth = frontier.popleft()
        if depth == max_depth:
            continue
        for child in model.processes[pid].sub_processes:
            if child in model.processes and child not in found and child != process_id:
                found.add(child)
                frontier.append((child, depth + 1))
    return found


def accessed_products(model: ProcessModel, process_id: str) -> set[str]:
    """Union of product ids a process touches in any access mode."""
    proc = model.process(process_id)
    return {access.product_id for access in proc.product_accesses}


# --- interchange format ----------------------------------------------------


def _expect_object(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be an object, got {type(value).__name__}")
    return value


def _expect_string(value, where: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{where} must be a string, got {type(value).__name__}")
    return value


def _expect_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where} must be a list, got {type(value).__name__}")
    return value


def _check_keys(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ParseError(f"{where} has unknown keys: {', '.join(unknown)}")


def _string_list(value, where: str) -> tuple[str, ...]:
    return tuple(_expect_string(item, f"{where}[{i}]") for i, item in enumerate(_expect_list(value, where)))


def _parse_simple_entity(data, where: str, cls):
    record = _expect_object(data, where)
    _check_keys(record, _ENTITY_KEYS, where)
    if "id" not in record or "name" not in record:
        raise ParseError(f"{where} needs both an id and a name")
    return cls(
        id=_expect_string(record["id"], f"{where}.id"),
        name=_expect_string(record["name"], f"{where}.name"),
        description=_expect_string(record.get("description", ""), f"{where}.description"),
    )


def _parse_process(data, where: str) -> ProcessEntity:
    record = _expect_object(data, where)
    _check_keys(record, _PROCESS_KEYS, where)
    if "id" not in record or "name" not in record:
        raise ParseError(f"{where} needs both an id and a name")
    accesses = []
    for i, item in enumerate(_expect_list(record.get("accesses", []), f"{where}.accesses")):
        access = _expect_object(item, f"{where}.accesses[{i}]")
        _check_keys(access, _ACCESS_KEYS, f"{where}.accesses[{i}]")
        if "product" not in access or "mode" not in access:
            raise ParseError(f"{where}.accesses[{i}] needs both product and mode")
        mode = _expect_string(access["mode"], f"{where}.accesses[{i}].mode")
        if mode not in ACCESS_MODES:
            raise ParseError(f"{where}.accesses[{i}] has unknown mode {mode!r}")
        accesses.append(ProductAccess(_expect_string(access["product"], f"{where}.accesses[{i}].product"), mode))
    return ProcessEntity(
        id=_expect_string(record["id"], f"{where}.id"),
        name=_expect_string(record["name"], f"{where}.name"),
        description=_expect_string(record.get("description", ""), f"{where}.description"),
        sub_processes=_string_list(record.get("subprocesses", []), f"{where}.subprocesses"),
        product_accesses=tuple(accesses),
        role_ids=_string_list(record.get("roles", []), f"{where}.roles"),
        tool_ids=_string_list(record.get("tools", []), f"{where}.tools"),
    )


def _raise_for_violations(model: ProcessModel) -> ProcessModel:
    violations = validate_model(model)
    if not violations:
        return model
    first = violations[0]
    detail = {"entity": first.entity_id, "rule": first.rule}
    if first.rule == "dangling-reference":
        raise DanglingReference(first.message, details=detail)
    if first.rule == "duplicate-id":
        raise DuplicateId(first.message, details=detail)
    if first.rule in ("cycle", "multiple-parents"):
        raise CyclicHierarchy(first.message, details=detail)
    raise ModelInvalid(
        f"model {model.id!r} is invalid: {first.message}",
        details={
            "model": model.id,
            "violations": [
                {"entity": v.entity_id, "rule": v.rule, "message": v.message} for v in violations
            ],
        },
    )


def structure_from_data(data) -> ProcessModel:
    """Build a model from decoded document data without invariant checks.

    Structural problems (wrong shapes, unknown keys, in-list duplicate
    ids) still raise; referential invariants are left to validate_model
    so callers can report every violation at once.
    """
    document = _expect_object(data, "model document")
    _check_keys(document, _MODEL_KEYS, "model document")
    if "name" not in document:
        raise ParseError("model document is missing the name key")
    name = _expect_string(document["name"], "name")
    if not normalize_name(name):
        raise ParseError("model name must not be empty")
    model_id = _expect_string(document.get("id", slugify(name)), "id")
    if not model_id:
        raise ParseError("model id must not be empty")

    entries = []
    for i, item in enumerate(_expect_list(document.get("context", []), "context")):
        record = _expect_object(item, f"context[{i}]")
        _check_keys(record, _CONTEXT_KEYS, f"context[{i}]")
        missing = _CONTEXT_KEYS - set(record)
        if missing:
            raise ParseError(f"context[{i}] is missing keys: {', '.join(sorted(missing))}")
        entries.append(
            CharacterizationEntry(
                factor=_expect_string(record["factor"], f"context[{i}].factor"),
                characteristic=_expect_string(record["characteristic"], f"context[{i}].characteristic"),
                value=_expect_string(record["value"], f"context[{i}].value"),
            )
        )

    def collect(key: str, parse, kind: str) -> dict:
        out: dict[str, object] = {}
        for i, item in enumerate(_expect_list(document.get(key, []), key)):
            entity = parse(item, f"{key}[{i}]")
            if entity.id in out:
                raise DuplicateId(
                    f"{kind} id {entity.id!r} appears twice", details={"entity": entity.id, "rule": "duplicate-id"}
                )
            out[entity.id] = entity
        return out

    products = collect("products", lambda d, w: _parse_simple_entity(d, w, ProductEntity), "product")
    roles = collect("roles", lambda d, w: _parse_simple_entity(d, w, NamedEntity), "role")
    tools = collect("tools", lambda d, w: _parse_simple_entity(d, w, NamedEntity), "tool")
    processes = collect("processes", _parse_process, "process")

    if "root_processes" in document:
        roots = _string_list(document["root_processes"], "root_processes")
    else:
        listed_as_child = {child for proc in processes.values() for child in proc.sub_processes}
        roots = tuple(pid for pid in processes if pid not in listed_as_child)

    return ProcessModel(
        id=model_id,
        name=name,
        context=CharacterizationVector(tuple(entries)),
        processes=processes,
        products=products,
        roles=roles,
        tools=tools,
        root_processes=roots,
    )


def model_from_data(data) -> ProcessModel:
    """Build and validate a model from already-decoded document data."""
    return _raise_for_violations(structure_from_data(data))


def parse_model(document: str) -> ProcessModel:
    """Parse a model document, raising on syntax or invariant violations."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"model document is not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from None
    return model_from_data(data)


def model_to_data(model: ProcessModel) -> dict:
    """Plain-data form of a model; entity lists sorted by id."""
    return {
        "id": model.id,
        "name": model.name,
        "context": [
            {"factor": e.factor, "characteristic": e.characteristic, "value": e.value}
            for e in model.context.entries
        ],
        "products": [
            {"id": p.id, "name": p.name, "description": p.description}
            for p in sorted(model.products.values(), key=lambda p: p.id)
        ],
        "roles": [
            {"id": r.id, "name": r.name, "description": r.description}
            for r in sorted(model.roles.values(), key=lambda r: r.id)
        ],
        "tools": [
            {"id": t.id, "name": t.name, "description": t.description}
            for t in sorted(model.tools.values(), key=lambda t: t.id)
        ],
        "processes": [
            {
                "id": p.id,
                "name": p.name,
                "description": p.description,
                "subprocesses": list(p.sub_processes),
                "accesses": [{"product": a.product_id, "mode": a.mode} for a in p.product_accesses],
                "roles": list(p.role_ids),
                "tools": list(p.tool_ids),
            }
            for p in sorted(model.processes.values(), key=lambda p: p.id)
        ],
        "root_processes": list(model.root_processes),
    }


def serialize_model(model: ProcessModel) -> str:
    """Deterministic document text; rejects invalid models."""
    ensure_valid(model)
    return json.dumps(model_to_data(model), indent=2, ensure_ascii=False) + "\n"
