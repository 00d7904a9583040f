"""Exception hierarchy shared by every module.

Each error carries a stable machine-readable ``code`` so the HTTP service
and the CLI can map failures without string matching.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all expected failures."""

    code = "domain_error"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ParseError(DomainError):
    code = "parse_error"


class DanglingReference(DomainError):
    code = "dangling_reference"


class DuplicateId(DomainError):
    code = "duplicate_id"


class CyclicHierarchy(DomainError):
    code = "cyclic_hierarchy"


class ModelInvalid(DomainError):
    code = "model_invalid"


class UnknownEntity(DomainError):
    code = "unknown_entity"


class WeightsInvalid(DomainError):
    code = "weights_invalid"


class PolicyInvalid(DomainError):
    code = "policy_invalid"


class ScopeInvalid(DomainError):
    code = "scope_invalid"


class InvalidArgument(DomainError):
    code = "invalid_argument"


class DuplicateFact(DomainError):
    code = "duplicate_fact"


class CrossKindFact(DomainError):
    code = "cross_kind_fact"


class UnknownFact(DomainError):
    code = "unknown_fact"


class NoMatrix(DomainError):
    code = "no_matrix"


class PlanError(DomainError):
    code = "plan_invalid"


class MergeConflict(DomainError):
    code = "merge_conflict"


class UnaccountedProcesses(DomainError):
    code = "unaccounted_processes"


class UnknownModel(DomainError):
    code = "unknown_model"


class UnknownSession(DomainError):
    code = "unknown_session"


class DuplicateModel(DomainError):
    code = "duplicate_model"


class StoreCorrupt(DomainError):
    code = "store_corrupt"
