"""The three construction stages: dependency evaluation, schema definition, triple extraction."""

from .dependency import (
    access_sequence,
    compute_orders,
    order_children,
    summarize_directories,
    summarize_leaves,
    walk_and_summarize,
)
from .models import (
    AccessOrder,
    EntitySchema,
    ExtractedEntity,
    ExtractionStats,
    KnowledgeGraph,
    SummaryPhase,
    SummaryRecord,
    Triple,
    TypedMention,
)
from .schema import build_schema, canonicalize_cluster, cluster_types, extract_entity_types, filter_singletons
from .triples import DocumentExtraction, assemble_graph, extract_entities, extract_graph, extract_relations

__all__ = [
    "AccessOrder",
    "DocumentExtraction",
    "EntitySchema",
    "ExtractedEntity",
    "ExtractionStats",
    "KnowledgeGraph",
    "SummaryPhase",
    "SummaryRecord",
    "Triple",
    "TypedMention",
    "access_sequence",
    "assemble_graph",
    "build_schema",
    "canonicalize_cluster",
    "cluster_types",
    "compute_orders",
    "extract_entities",
    "extract_entity_types",
    "extract_graph",
    "extract_relations",
    "filter_singletons",
    "order_children",
    "summarize_directories",
    "summarize_leaves",
    "walk_and_summarize",
]
