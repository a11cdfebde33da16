"""Schema definition: entity types per document, clustered and defined."""

from __future__ import annotations

import asyncio
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
import functools
import re

from loguru import logger
import numpy as np

from ..clustering import default_sweep, select_k
from ..corpus.models import CorpusTree, DocumentNode
from ..diagnostics import Diagnostics
from ..embedding.providers import Embedder, embed_one
from ..embedding.store import VectorStore, cosine_distance
from ..errors import DocGraphError, EmptySchema, ParseError
from ..llm.gateway import ChatGateway
from ..llm.parsing import parse_name_map, parse_string_list
from ..llm.prompts import PromptKit, format_reference
from ..llm.repair import complete_parsed
from .models import EntitySchema, SummaryRecord, TypedMention

_SENTENCE_END = re.compile(r"[.!?](?=\s|$)")


@dataclass(frozen=True)
class PartialSchema:
    """Definitions and member names produced for one cluster."""

    entries: dict[str, str]
    provenance: dict[str, list[str]]


def first_sentence(text: str) -> str:
    text = " ".join(text.split())
    match = _SENTENCE_END.search(text)
    return text[: match.end()] if match else text


async def extract_entity_types(
    doc: DocumentNode,
    summary: SummaryRecord,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> list[TypedMention]:
    """Entity types named by the model for one document, deduplicated case-insensitively.

    A document whose reply cannot be obtained or parsed is skipped with a warning.
    """
    request = prompts.request("entity_types", text=doc.text or "", summary=summary.text)
    try:
        names = await complete_parsed(gateway, request, parse_string_list, retries=prompts.retries)
    except DocGraphError as e:
        diagnostics.warn(f"{doc.path}: entity type extraction skipped ({e})")
        return []

    seen: set[str] = set()
    mentions: list[TypedMention] = []
    for name in names:
        folded = name.casefold()
        if folded not in seen:
            seen.add(folded)
            mentions.append(TypedMention(type_name=name, source_path=doc.path))
    return mentions


def filter_singletons(mentions: Sequence[TypedMention]) -> list[TypedMention]:
    """Drop mentions whose type (case-folded) occurs only once in the corpus."""
    counts = Counter(m.type_name.casefold() for m in mentions)
    return [m for m in mentions if counts[m.type_name.casefold()] >= 2]


def distinct_names(mentions: Sequence[TypedMention]) -> list[str]:
    """Distinct type names, first-seen spelling per case-folded form."""
    names: dict[str, str] = {}
    for m in mentions:
        names.setdefault(m.type_name.casefold(), m.type_name)
    return list(names.values())


def cluster_types(
    mentions: Sequence[TypedMention],
    embedder: Embedder,
    *,
    seed: int = 0,
    restarts: int = 10,
    sweep: tuple[int, int] | None = None,
) -> list[list[str]]:
    """Group distinct type names by embedding similarity.

    With fewer than three distinct names a single cluster is returned without
    clustering. Clusters are sorted by their smallest member (case-insensitive),
    and members are sorted within each cluster.
    """
    names = distinct_names(mentions)
    if not names:
        return []
    if len(names) < 3:
        return [sorted(names, key=str.casefold)]

    k_min, k_max = sweep if sweep is not None else default_sweep(len(names))
    k_max = min(k_max, len(names) - 1)
    k_min = min(k_min, k_max)
    selection = select_k(np.vstack(embedder.embed(names)), k_min, k_max, seed=seed, restarts=restarts)
    logger.info(f"Clustered {len(names)} entity types into {selection.best_k} groups")
    clusters = [sorted((names[i] for i in members), key=str.casefold) for members in selection.partition.clusters()]
    return sorted(clusters, key=lambda c: c[0].casefold())


def _identity(cluster: Sequence[str]) -> PartialSchema:
    return PartialSchema(
        entries={name: f"An entity of type {name}." for name in cluster},
        provenance={name: [name] for name in cluster},
    )


def _definitions(reply: Mapping[str, str | list[str]]) -> dict[str, str]:
    entries: dict[str, str] = {}
    folded: set[str] = set()
    for name, value in reply.items():
        definition = first_sentence(", ".join(value) if isinstance(value, list) else value)
        if not name or not definition or name.casefold() in folded:
            continue
        folded.add(name.casefold())
        entries[name] = definition
    return entries


async def canonicalize_cluster(
    cluster: Sequence[str],
    store: VectorStore,
    embedder: Embedder,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    k: int = 10,
) -> PartialSchema:
    """Merge synonymous types of one cluster and define each merged type in one sentence.

    Each input name is assigned to the canonical name it equals case-insensitively,
    otherwise to the canonical name with the nearest embedding. Canonical names
    that receive no member are dropped. When the reply is unusable every name is
    kept as its own type with a placeholder definition.
    """
    joined = ", ".join(cluster)
    try:
        hits = store.top_k(embed_one(embedder, joined), k) if len(store) else []
        request = prompts.request(
            "type_definition",
            entity_types=f"[{joined}]",
            reference=format_reference([(hit.id, hit.value) for hit in hits]),
        )
        parse = functools.partial(parse_name_map, known_names=cluster)
        reply = await complete_parsed(gateway, request, parse, retries=prompts.retries)
        entries = _definitions(reply)
        if not entries:
            raise ParseError("definition reply holds no usable type")
    except DocGraphError as e:
        diagnostics.warn(f"types [{joined}]: definitions unavailable, keeping names as-is ({e})")
        return _identity(cluster)

    canonical = list(entries)
    by_fold = {name.casefold(): name for name in canonical}
    canonical_vectors = embedder.embed(canonical)
    provenance: dict[str, list[str]] = {}
    for name in cluster:
        target = by_fold.get(name.casefold())
        if target is None:
            vector = embed_one(embedder, name)
            distances = [cosine_distance(vector, c) for c in canonical_vectors]
            target = canonical[min(range(len(canonical)), key=lambda i: (distances[i], i))]
        provenance.setdefault(target, []).append(name)

    return PartialSchema(
        entries={name: entries[name] for name in canonical if name in provenance},
        provenance=provenance,
    )


def merge_partials(partials: Sequence[PartialSchema], raw_spellings: Mapping[str, Sequence[str]]) -> EntitySchema:
    """Fold cluster results into one schema; the first definition of a name wins.

    `raw_spellings` maps a case-folded type name to every spelling seen in the
    corpus, so provenance lists all merged raw names.
    """
    entries: dict[str, str] = {}
    provenance: dict[str, set[str]] = {}
    by_fold: dict[str, str] = {}
    for partial in partials:
        for name, definition in partial.entries.items():
            canonical = by_fold.setdefault(name.casefold(), name)
            entries.setdefault(canonical, definition)
            members = provenance.setdefault(canonical, set())
            for member in partial.provenance.get(name, []):
                members.update(raw_spellings.get(member.casefold(), [member]))

    order = sorted(entries, key=lambda n: (n.casefold(), n))
    return EntitySchema(
        entries={name: entries[name] for name in order},
        provenance={name: sorted(provenance[name], key=lambda n: (n.casefold(), n)) for name in order},
    )


async def build_schema(
    tree: CorpusTree,
    summaries: Mapping[str, SummaryRecord],
    store: VectorStore,
    embedder: Embedder,
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
    *,
    retrieval_k: int = 10,
    seed: int = 0,
    restarts: int = 10,
    sweep: tuple[int, int] | None = None,
) -> EntitySchema:
    """Entity schema for the corpus from its context-enhanced summaries.

    Raises:
        EmptySchema: If no entity type occurs in at least two documents
    """
    leaves = tree.leaves()
    per_doc = await asyncio.gather(
        *(extract_entity_types(leaf, summaries[leaf.path], gateway, prompts, diagnostics) for leaf in leaves)
    )
    mentions = [m for doc_mentions in per_doc for m in doc_mentions]
    kept = filter_singletons(mentions)
    logger.info(f"{len(mentions)} entity type mentions, {len(kept)} survive singleton filtering")
    if not kept:
        raise EmptySchema("no entity type occurs in more than one document")

    spellings: dict[str, list[str]] = {}
    for m in kept:
        variants = spellings.setdefault(m.type_name.casefold(), [])
        if m.type_name not in variants:
            variants.append(m.type_name)

    clusters = cluster_types(kept, embedder, seed=seed, restarts=restarts, sweep=sweep)
    partials = await asyncio.gather(
        *(
            canonicalize_cluster(cluster, store, embedder, gateway, prompts, diagnostics, k=retrieval_k)
            for cluster in clusters
        )
    )
    schema = merge_partials(partials, spellings)
    if not schema.entries:
        raise EmptySchema("no entity type survived canonicalization")
    logger.info(f"Entity schema has {len(schema.entries)} types")
    return schema
