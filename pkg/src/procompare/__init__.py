"""Workbench for comparing descriptive software process models.

The core loop: load two elicited models, score every scoped process pair
with weighted structural rules, let the engineer confirm or reject the
ranked assumptions as facts, recompute until stable, then merge the
models into a reference process model with optional and alternative
variation boxes.
"""

from .errors import DomainError
from .facts import Fact, FactSet
from .model import (
    CharacterizationEntry,
    CharacterizationVector,
    NamedEntity,
    ProcessEntity,
    ProcessModel,
    ProductAccess,
    ProductEntity,
    accessed_products,
    descendants,
    model_from_data,
    model_to_data,
    normalize_name,
    parse_model,
    serialize_model,
    validate_model,
)
from .reference import (
    Accept,
    Annotation,
    MergePlan,
    Reassign,
    ReferenceProcessModel,
    VariationBox,
    accounting,
    build_reference_model,
    decide,
    parse_reference_document,
    propose_plan,
    serialize_reference_model,
)
from .rules import (
    CellScore,
    MatchPolicy,
    SimilarityMatrix,
    Weights,
    combined_similarity,
    compute_matrix,
    hierarchy_similarity,
    levenshtein,
    name_similarity,
    product_structure_similarity,
    structure_compatibility,
    subprocess_structure_similarity,
)
from .session import (
    Session,
    assumptions,
    commonality_table,
    create_session,
    establish_fact,
    expectation_report,
    export_heatmap,
    recompute,
    retract_fact,
    set_weights,
)

__version__ = "0.1.0"

__all__ = [
    "Accept",
    "Annotation",
    "CellScore",
    "CharacterizationEntry",
    "CharacterizationVector",
    "DomainError",
    "Fact",
    "FactSet",
    "MatchPolicy",
    "MergePlan",
    "NamedEntity",
    "ProcessEntity",
    "ProcessModel",
    "ProductAccess",
    "ProductEntity",
    "Reassign",
    "ReferenceProcessModel",
    "Session",
    "SimilarityMatrix",
    "VariationBox",
    "Weights",
    "accessed_products",
    "accounting",
    "assumptions",
    "build_reference_model",
    "combined_similarity",
    "commonality_table",
    "compute_matrix",
    "create_session",
    "decide",
    "descendants",
    "establish_fact",
    "expectation_report",
    "export_heatmap",
    "hierarchy_similarity",
    "levenshtein",
    "model_from_data",
    "model_to_data",
    "name_similarity",
    "normalize_name",
    "parse_model",
    "parse_reference_document",
    "product_structure_similarity",
    "propose_plan",
    "recompute",
    "retract_fact",
    "serialize_model",
    "serialize_reference_model",
    "set_weights",
    "structure_compatibility",
    "subprocess_structure_similarity",
    "validate_model",
]
