"""Engineer-established facts about entity pairs.

A fact records a verdict from the engineer driving a comparison session:
two entities are the same ("equal") or definitely not the same
("different"). Facts pin similarity cells, constrain the structural
matching, and eventually justify the merge plan. They are kind-scoped:
a fact always relates two processes or two products, never a mix.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import CrossKindFact, DuplicateFact, InvalidArgument, UnknownFact

FACT_KINDS = ("process", "product")
VERDICTS = ("equal", "different")


@dataclass(frozen=True)
class Fact:
    id: str
    kind: str
    left_id: str
    right_id: str
    verdict: str
    rationale: str = ""
    created_at: str = ""

    def key(self) -> tuple[str, str, str]:
        return (self.kind, self.left_id, self.right_id)


@dataclass
class FactSet:
    """Mutable collection of facts, at most one per (kind, left, right) pair."""

    _by_key: dict[tuple[str, str, str], Fact] = field(default_factory=dict)
    _by_id: dict[str, Fact] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self._by_id)

    def add(self, fact: Fact) -> None:
        if fact.kind not in FACT_KINDS:
            raise CrossKindFact(f"unknown fact kind {fact.kind!r}", details={"kind": fact.kind})
        if fact.verdict not in VERDICTS:
            raise InvalidArgument(f"unknown verdict {fact.verdict!r}", details={"verdict": fact.verdict})
        if fact.key() in self._by_key:
            existing = self._by_key[fact.key()]
            raise DuplicateFact(
                f"a fact for {fact.kind} pair ({fact.left_id!r}, {fact.right_id!r}) already exists",
                details={"existing": existing.id, "kind": fact.kind, "left": fact.left_id, "right": fact.right_id},
            )
        if fact.id in self._by_id:
            raise DuplicateFact(f"fact id {fact.id!r} already exists", details={"existing": fact.id})
        self._by_key[fact.key()] = fact
        self._by_id[fact.id] = fact

    def remove(self, fact_id: str) -> Fact:
        fact = self._by_id.pop(fact_id, None)
        if fact is None:
            raise UnknownFact(f"no fact with id {fact_id!r}", details={"fact": fact_id})
        del self._by_key[fact.key()]
        return fact

    def get(self, fact_id: str) -> Fact:
        fact = self._by_id.get(fact_id)
        if fact is None:
            raise UnknownFact(f"no fact with id {fact_id!r}", details={"fact": fact_id})
        return fact

    def verdict(self, kind: str, left_id: str, right_id: str) -> str | None:
        fact = self._by_key.get((kind, left_id, right_id))
        return fact.verdict if fact else None

    def facts(self, kind: str | None = None) -> list[Fact]:
        """Facts sorted by (kind, left, right) for stable iteration."""
        out = [f for f in self._by_id.values() if kind is None or f.kind == kind]
        out.sort(key=Fact.key)
        return out

    def digest(self) -> str:
        """Content hash over the semantic fields; ids and timestamps are excluded
        so replaying the same verdicts yields the same digest."""
        hasher = hashlib.sha256()
        for fact in self.facts():
            line = "\x1f".join((fact.kind, fact.left_id, fact.right_id, fact.verdict))
            hasher.update(line.encode("utf-8"))
            hasher.update(b"\x1e")
        return hasher.hexdigest()

    def copy(self) -> "FactSet":
        clone = FactSet()
        clone._by_key = dict(self._by_key)
        clone._by_id = dict(self._by_id)
        return clone
