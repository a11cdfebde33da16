"""Triple extraction: schema-valid entities per document, then relations among them."""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Mapping, Sequence
from functools import partial

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..corpus.models import CorpusTree, DocumentNode
from ..diagnostics import Diagnostics
from ..embedding.providers import Embedder, embed_one
from ..embedding.store import cosine_distance
from ..errors import DocGraphError
from ..llm.gateway import ChatGateway
from ..llm.parsing import parse_name_map, parse_triples
from ..llm.prompts import PromptKit
from ..llm.repair import complete_parsed
from .models import EntitySchema, ExtractedEntity, ExtractionStats, KnowledgeGraph, SummaryRecord, Triple

DEFAULT_SCHEMA_CHAR_BUDGET = 16000


class DocumentExtraction(BaseModel):
    """Stage-3 output for one document; also the per-document checkpoint record."""

    model_config = ConfigDict(frozen=True)

    source_path: str
    entities: tuple[ExtractedEntity, ...] = ()
    triples: tuple[Triple, ...] = ()
    stats: ExtractionStats = Field(default_factory=ExtractionStats)


def _schema_line(name: str, definition: str) -> str:
    return f'"{name}": {definition}'


def render_schema(
    schema: EntitySchema,
    *,
    char_budget: int = DEFAULT_SCHEMA_CHAR_BUDGET,
    embedder: Embedder | None = None,
    summary_text: str | None = None,
) -> str:
    """Schema as ``{"Type": definition, ...}``.

    When the full rendering exceeds `char_budget` and an embedder and summary are
    given, the types closest to the summary are kept (at least one).
    """
    names = list(schema.entries)
    full = "{" + ", ".join(_schema_line(n, schema.entries[n]) for n in names) + "}"
    if len(full) <= char_budget or embedder is None or not summary_text:
        return full

    query = embed_one(embedder, summary_text)
    vectors = embedder.embed([schema.entries[n] for n in names])
    distances = [cosine_distance(query, v) for v in vectors]
    ranked = sorted(range(len(names)), key=lambda i: (distances[i], i))

    chosen: set[int] = set()
    size = 2
    for i in ranked:
        line = len(_schema_line(names[i], schema.entries[names[i]])) + (2 if chosen else 0)
        if chosen and size + line > char_budget:
            break
        chosen.add(i)
        size += line
    logger.debug(f"Schema truncated to {len(chosen)}/{len(names)} types to fit {char_budget} chars")
    return "{" + ", ".join(_schema_line(names[i], schema.entries[names[i]]) for i in sorted(chosen)) + "}"


def _entity_names(value: str | list[str]) -> list[str]:
    items = value if isinstance(value, list) else value.split(",")
    names = (item.strip().strip("\"'").strip() for item in items)
    return [name for name in names if name]


async def extract_entities(
    doc: DocumentNode,
    schema: EntitySchema,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    schema_text: str | None = None,
) -> tuple[list[ExtractedEntity], ExtractionStats]:
    """Entities of schema types found in `doc`; entities of unknown types are counted as off-schema."""
    request = prompts.request("entity_extraction", text=doc.text or "", schema=schema_text or render_schema(schema))
    try:
        parse = partial(parse_name_map, known_names=schema.entries)
        reply = await complete_parsed(gateway, request, parse, retries=prompts.retries)
    except DocGraphError as e:
        diagnostics.warn(f"{doc.path}: entity extraction failed, document contributes no entities ({e})")
        return [], ExtractionStats(documents_failed=1)

    entities: list[ExtractedEntity] = []
    seen: set[tuple[str, str]] = set()
    parsed = off_schema = 0
    for claimed, value in reply.items():
        names = _entity_names(value)
        parsed += len(names)
        entity_type = schema.lookup(claimed)
        if entity_type is None:
            off_schema += len(names)
            continue
        for name in names:
            key = (name.casefold(), entity_type)
            if key not in seen:
                seen.add(key)
                entities.append(ExtractedEntity(name=name, entity_type=entity_type, source_path=doc.path))

    if off_schema:
        diagnostics.warn(f"{doc.path}: dropped {off_schema} entities of types outside the schema")
    return entities, ExtractionStats(entities_parsed=parsed, off_schema=off_schema)


def _group_entities(entities: Sequence[ExtractedEntity]) -> str:
    groups: dict[str, list[str]] = {}
    for entity in entities:
        groups.setdefault(entity.entity_type, []).append(entity.name)
    return "{" + ", ".join(f"{t}:[{', '.join(names)}]" for t, names in groups.items()) + "}"


async def extract_relations(
    doc: DocumentNode,
    entities: Sequence[ExtractedEntity],
    schema: EntitySchema,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    schema_text: str | None = None,
) -> tuple[list[Triple], ExtractionStats]:
    """Triples among the document's entities.

    Triples with an endpoint that is not one of the document's entities are
    dropped as dangling; repeated triples are dropped as duplicates.
    """
    if len(entities) < 2:
        return [], ExtractionStats()

    request = prompts.request(
        "relation_extraction",
        text=doc.text or "",
        entities=_group_entities(entities),
        schema=schema_text or render_schema(schema),
    )
    try:
        parsed = await complete_parsed(gateway, request, parse_triples, retries=prompts.retries)
    except DocGraphError as e:
        diagnostics.warn(f"{doc.path}: relation extraction failed, document contributes no triples ({e})")
        return [], ExtractionStats(documents_failed=1)

    known = {entity.name.casefold() for entity in entities}
    triples: list[Triple] = []
    seen: set[tuple[str, str, str, str]] = set()
    dangling = duplicates = 0
    for subject, predicate, obj in parsed.triples:
        if subject.casefold() not in known or obj.casefold() not in known:
            dangling += 1
            continue
        triple = Triple(subject=subject, predicate=predicate.strip(), object=obj, source_path=doc.path)
        if triple.key() in seen:
            duplicates += 1
            continue
        seen.add(triple.key())
        triples.append(triple)

    if dangling or parsed.malformed:
        diagnostics.warn(f"{doc.path}: dropped {dangling} dangling and {parsed.malformed} malformed triples")
    stats = ExtractionStats(
        triples_parsed=len(parsed.triples),
        malformed=parsed.malformed,
        dangling=dangling,
        duplicates=duplicates,
    )
    return triples, stats


async def extract_document(
    doc: DocumentNode,
    schema: EntitySchema,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    embedder: Embedder | None = None,
    summary: SummaryRecord | None = None,
    schema_char_budget: int = DEFAULT_SCHEMA_CHAR_BUDGET,
) -> DocumentExtraction:
    schema_text = render_schema(
        schema,
        char_budget=schema_char_budget,
        embedder=embedder,
        summary_text=summary.text if summary is not None else None,
    )
    entities, entity_stats = await extract_entities(doc, schema, gateway, prompts, diagnostics, schema_text=schema_text)
    triples, triple_stats = await extract_relations(
        doc, entities, schema, gateway, prompts, diagnostics, schema_text=schema_text
    )
    return DocumentExtraction(
        source_path=doc.path,
        entities=tuple(entities),
        triples=tuple(triples),
        stats=entity_stats.merge(triple_stats),
    )


def assemble_graph(
    per_doc_entities: Sequence[Sequence[ExtractedEntity]],
    per_doc_triples: Sequence[Sequence[Triple]],
    schema: EntitySchema,
) -> KnowledgeGraph:
    """Concatenate per-document results, deduplicate, and type each triple's endpoints."""
    entities: list[ExtractedEntity] = []
    entity_keys: set[tuple[str, str, str]] = set()
    types_by_name: dict[tuple[str, str], str] = {}
    for doc_entities in per_doc_entities:
        for entity in doc_entities:
            key = (entity.source_path, entity.name.casefold(), entity.entity_type)
            if key in entity_keys:
                continue
            entity_keys.add(key)
            entities.append(entity)
            types_by_name.setdefault((entity.source_path, entity.name.casefold()), entity.entity_type)

    triples: list[Triple] = []
    triple_keys: set[tuple[str, str, str, str]] = set()
    for doc_triples in per_doc_triples:
        for triple in doc_triples:
            subject_type = types_by_name.get((triple.source_path, triple.subject.casefold()))
            object_type = types_by_name.get((triple.source_path, triple.object.casefold()))
            if subject_type is None or object_type is None:
                logger.warning(f"{triple.source_path}: triple {triple.spo()} has an unresolved endpoint")
                continue
            if triple.key() in triple_keys:
                continue
            triple_keys.add(triple.key())
            triples.append(triple.model_copy(update={"subject_type": subject_type, "object_type": object_type}))

    return KnowledgeGraph(triples=tuple(triples), entities=tuple(entities), entity_schema=schema)


async def extract_graph(
    tree: CorpusTree,
    schema: EntitySchema,
    summaries: Mapping[str, SummaryRecord],
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    embedder: Embedder | None = None,
    schema_char_budget: int = DEFAULT_SCHEMA_CHAR_BUDGET,
    existing: Mapping[str, DocumentExtraction] | None = None,
    on_record: Callable[[DocumentExtraction], None] | None = None,
) -> tuple[KnowledgeGraph, ExtractionStats]:
    """Run both extraction passes over every document and assemble the graph."""
    done = dict(existing or {})

    async def one(leaf: DocumentNode) -> DocumentExtraction:
        if leaf.path in done:
            return done[leaf.path]
        result = await extract_document(
            leaf,
            schema,
            gateway,
            prompts,
            diagnostics,
            embedder=embedder,
            summary=summaries.get(leaf.path),
            schema_char_budget=schema_char_budget,
        )
        if on_record is not None:
            on_record(result)
        return result

    results = await asyncio.gather(*(one(leaf) for leaf in tree.leaves()))
    stats = ExtractionStats()
    for result in results:
        stats = stats.merge(result.stats)
    graph = assemble_graph([r.entities for r in results], [r.triples for r in results], schema)
    logger.info(f"Knowledge graph: {len(graph.entities)} entities, {len(graph.triples)} triples")
    return graph, stats
