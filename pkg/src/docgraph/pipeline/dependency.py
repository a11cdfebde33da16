"""Dependency evaluation: bottom-up summaries, top-down ordering, autoregressive summaries."""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Mapping, Sequence
import re

from loguru import logger

from ..corpus.models import CorpusTree, DocumentNode
from ..diagnostics import Diagnostics
from ..embedding.providers import Embedder, embed_one
from ..embedding.store import VectorStore
from ..errors import ContextOverflow, DocGraphError, NodeError, ParseError
from ..llm.gateway import ChatGateway
from ..llm.parsing import parse_string_list
from ..llm.prompts import PromptKit, format_reference
from ..llm.repair import complete_parsed
from .models import AccessOrder, SummaryPhase, SummaryRecord

DEFAULT_RETRIEVAL_K = 10
DEFAULT_CONTEXT_CHAR_BUDGET = 24000

RecordSink = Callable[[SummaryRecord], None]


async def _summarize(gateway: ChatGateway, prompts: PromptKit, node_path: str, template: str, **values: str) -> str:
    try:
        response = await gateway.complete(prompts.request(template, **values))
    except DocGraphError as e:
        raise NodeError(node_path, f"summary request failed: {e}") from e
    text = response.text.strip()
    if not text:
        raise NodeError(node_path, "model returned an empty summary")
    return text


async def summarize_leaves(
    tree: CorpusTree,
    gateway: ChatGateway,
    prompts: PromptKit,
    *,
    existing: Mapping[str, SummaryRecord] | None = None,
    on_record: RecordSink | None = None,
) -> list[SummaryRecord]:
    """One Initial summary per leaf, from the document text alone, in tree leaf order."""
    done = dict(existing or {})

    async def one(leaf: DocumentNode) -> SummaryRecord:
        if leaf.path in done:
            return done[leaf.path]
        text = await _summarize(gateway, prompts, leaf.path, "summary_initial", text=leaf.text or "")
        record = SummaryRecord(node_path=leaf.path, phase=SummaryPhase.INITIAL, text=text)
        if on_record is not None:
            on_record(record)
        return record

    records = await asyncio.gather(*(one(leaf) for leaf in tree.leaves()))
    logger.info(f"Initial summaries ready for {len(records)} documents")
    return list(records)


def _height(node: DocumentNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(_height(child) for child in node.children)


def _child_lines(node: DocumentNode, summaries: Mapping[str, str], *, numbered: bool) -> str:
    lines = []
    for i, child in enumerate(node.children, start=1):
        prefix = f"{i}." if numbered else "-"
        lines.append(f"{prefix} {child.name}: {summaries[child.path]}")
    return "\n".join(lines)


async def summarize_directories(
    tree: CorpusTree,
    leaf_summaries: Mapping[str, SummaryRecord],
    gateway: ChatGateway,
    prompts: PromptKit,
    *,
    existing: Mapping[str, SummaryRecord] | None = None,
    on_record: RecordSink | None = None,
) -> list[SummaryRecord]:
    """One Directory summary per directory, built from its children's summaries.

    Directories of equal height are summarized concurrently; a directory is only
    summarized once all of its descendants are. Records are returned in postorder.
    """
    missing = [leaf.path for leaf in tree.leaves() if leaf.path not in leaf_summaries]
    if missing:
        raise NodeError(missing[0], "leaf has no initial summary")

    texts: dict[str, str] = {path: record.text for path, record in leaf_summaries.items()}
    done = dict(existing or {})
    for path, record in done.items():
        texts[path] = record.text

    directories = tree.directories()
    by_height: dict[int, list[DocumentNode]] = {}
    for directory in directories:
        by_height.setdefault(_height(directory), []).append(directory)

    async def one(directory: DocumentNode) -> SummaryRecord:
        if directory.path in done:
            return done[directory.path]
        text = await _summarize(
            gateway,
            prompts,
            directory.path,
            "summary_directory",
            name=directory.path,
            children=_child_lines(directory, texts, numbered=False),
        )
        record = SummaryRecord(node_path=directory.path, phase=SummaryPhase.DIRECTORY, text=text)
        if on_record is not None:
            on_record(record)
        return record

    produced: dict[str, SummaryRecord] = {}
    for height in sorted(by_height):
        for record in await asyncio.gather(*(one(d) for d in by_height[height])):
            produced[record.node_path] = record
            texts[record.node_path] = record.text

    logger.info(f"Directory summaries ready for {len(produced)} directories")
    return [produced[d.path] for d in directories]


_INDEX_RE = re.compile(r"\d+")


def _parse_indices(text: str) -> list[int]:
    items = parse_string_list(text)
    indices = [int(item) for item in items if _INDEX_RE.fullmatch(item)]
    if items and not indices:
        raise ParseError(f"ordering reply holds no item numbers: {items[:5]}")
    return indices


def repair_permutation(indices: Sequence[int], size: int) -> list[int]:
    """Turn 1-based `indices` into a permutation of 1..size.

    Duplicates and out-of-range numbers are dropped (first occurrence kept), then
    missing numbers are appended in ascending order.
    """
    seen: set[int] = set()
    order: list[int] = []
    for index in indices:
        if 1 <= index <= size and index not in seen:
            seen.add(index)
            order.append(index)
    order.extend(i for i in range(1, size + 1) if i not in seen)
    return order


async def order_children(
    parent: DocumentNode,
    child_summaries: Mapping[str, str],
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> tuple[str, ...]:
    """Reading order of `parent`'s children, as a permutation of their paths.

    Never fails: an unusable reply after the repair loop keeps the original order
    and records a warning.
    """
    children = parent.children
    if len(children) <= 1:
        return tuple(child.path for child in children)

    request = prompts.request(
        "order_children",
        name=parent.path,
        children=_child_lines(parent, child_summaries, numbered=True),
    )
    try:
        indices = await complete_parsed(gateway, request, _parse_indices, retries=prompts.retries)
    except ParseError as e:
        diagnostics.warn(f"{parent.path}: could not parse reading order, keeping original order ({e})")
        indices = []
    except DocGraphError as e:
        diagnostics.warn(f"{parent.path}: ordering request failed, keeping original order ({e})")
        indices = []

    order = repair_permutation(indices, len(children))
    return tuple(children[i - 1].path for i in order)


async def compute_orders(
    tree: CorpusTree,
    summaries: Mapping[str, SummaryRecord],
    gateway: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> dict[str, tuple[str, ...]]:
    """Per-directory child orders, decided top-down from the root."""
    texts = {path: record.text for path, record in summaries.items()}
    index = tree.index()
    orders: dict[str, tuple[str, ...]] = {}

    async def visit(node: DocumentNode) -> None:
        order = await order_children(node, texts, gateway, prompts, diagnostics)
        orders[node.path] = order
        for path in order:
            child = index[path]
            if not child.is_leaf:
                await visit(child)

    await visit(tree.root)
    return orders


def access_sequence(tree: CorpusTree, orders: Mapping[str, Sequence[str]]) -> tuple[str, ...]:
    """Depth-first leaf sequence under the given per-directory orders."""
    index = tree.index()
    sequence: list[str] = []

    def visit(node: DocumentNode) -> None:
        if node.is_leaf:
            sequence.append(node.path)
            return
        expected = sorted(child.path for child in node.children)
        order = list(orders.get(node.path, ()))
        if sorted(order) != expected:
            raise NodeError(node.path, "order is not a permutation of the directory's children")
        for path in order:
            visit(index[path])

    visit(tree.root)
    return tuple(sequence)


def select_context(
    prior: Sequence[SummaryRecord],
    query_text: str,
    embedder: Embedder,
    store: VectorStore,
    k: int,
    context_char_budget: int,
) -> list[tuple[str, str]]:
    """All prior summaries if they fit the budget, else the k nearest to `query_text`."""
    if not prior:
        return []
    if sum(len(record.text) for record in prior) <= context_char_budget:
        return [(record.node_path, record.text) for record in prior]
    return retrieve_context(query_text, embedder, store, k)


def retrieve_context(query_text: str, embedder: Embedder, store: VectorStore, k: int) -> list[tuple[str, str]]:
    hits = store.top_k(embed_one(embedder, query_text), k)
    return [(hit.id, hit.value) for hit in hits]


async def walk_and_summarize(
    tree: CorpusTree,
    orders: Mapping[str, Sequence[str]],
    initial: Mapping[str, SummaryRecord],
    gateway: ChatGateway,
    prompts: PromptKit,
    embedder: Embedder,
    store: VectorStore,
    *,
    k: int = DEFAULT_RETRIEVAL_K,
    context_char_budget: int = DEFAULT_CONTEXT_CHAR_BUDGET,
    existing: Sequence[SummaryRecord] = (),
    on_record: RecordSink | None = None,
) -> tuple[AccessOrder, list[SummaryRecord]]:
    """Context-enhanced summaries in access order, each stored before the next is written.

    `existing` holds records from an interrupted run; they must form a prefix of
    the access order. A prompt rejected as too long while it carries every prior
    summary is sent once more with only the k nearest.
    """
    sequence = access_sequence(tree, orders)
    index = tree.index()
    records: list[SummaryRecord] = []

    for position, path in enumerate(sequence):
        if position < len(existing):
            record = existing[position]
            if record.node_path != path:
                raise NodeError(path, f"checkpoint holds {record.node_path!r} at this position")
        else:
            query = initial[path].text
            try:
                context = select_context(records, query, embedder, store, k, context_char_budget)
            except DocGraphError as e:
                raise NodeError(path, f"context retrieval failed: {e}") from e
            document_text = index[path].text or ""
            try:
                text = await _summarize(
                    gateway, prompts, path, "summary_context", reference=format_reference(context), text=document_text
                )
            except NodeError as e:
                # Only a prompt carrying more than k summaries can shrink by retrieval.
                if not isinstance(e.__cause__, ContextOverflow) or len(context) <= k:
                    raise
                logger.warning(f"{path}: {len(context)} prior summaries overflow the prompt; using the {k} nearest")
                try:
                    context = retrieve_context(query, embedder, store, k)
                except DocGraphError as retrieval_error:
                    raise NodeError(path, f"context retrieval failed: {retrieval_error}") from retrieval_error
                text = await _summarize(
                    gateway, prompts, path, "summary_context", reference=format_reference(context), text=document_text
                )
            record = SummaryRecord(
                node_path=path,
                phase=SummaryPhase.CONTEXT_ENHANCED,
                text=text,
                context_refs=tuple(ref for ref, _ in context),
            )
            if on_record is not None:
                on_record(record)

        if path not in store:
            try:
                store.insert(path, record.text, embed_one(embedder, record.text))
            except DocGraphError as e:
                raise NodeError(path, f"could not store summary: {e}") from e
        records.append(record)
        logger.debug(f"Context-enhanced summary {position + 1}/{len(sequence)}: {path}")

    order = AccessOrder(sequence=sequence, per_level_orders={p: tuple(o) for p, o in orders.items()})
    logger.info(f"Context-enhanced summaries ready for {len(records)} documents")
    return order, records
