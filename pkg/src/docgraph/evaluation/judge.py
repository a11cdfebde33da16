"""LLM-as-judge metrics: judged precision, recall number and gold-triple matching."""

from __future__ import annotations

import asyncio
from collections.abc import Sequence
import re

from loguru import logger

from ..corpus.models import CorpusTree
from ..diagnostics import Diagnostics
from ..errors import DocGraphError, ParseError
from ..llm.gateway import ChatGateway
from ..llm.parsing import parse_string_list
from ..llm.prompts import PromptKit
from ..llm.repair import complete_parsed
from ..pipeline.models import KnowledgeGraph, Triple
from .models import DocumentScore, EvalReport, GoldMetrics, GoldTriple, JudgedTriple, Verdict

F1_TOLERANCE = 0.1

_VERDICT_RE = re.compile(r"^\W*(true|false|yes|no)\b", re.IGNORECASE)
_MATCH_RE = re.compile(r"^\W*(true|false|yes|no)\b\W*(?:candidate\s*)?(\d+)?", re.IGNORECASE)
_TOKEN_RE = re.compile(r"\w+")


def parse_verdict(text: str) -> Verdict:
    """Verdict from the leading true/false/yes/no token, case-insensitively."""
    match = _VERDICT_RE.match(text)
    if match is None:
        return Verdict.UNPARSEABLE
    return Verdict.TRUE if match.group(1).lower() in ("true", "yes") else Verdict.FALSE


def _format_triple(triple: Triple | GoldTriple) -> str:
    return f"({triple.subject}, {triple.predicate}, {triple.object})"


def f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def check_reported_f1(
    precision: float,
    recall: float,
    reported: float,
    *,
    tolerance: float = F1_TOLERANCE,
    diagnostics: Diagnostics | None = None,
) -> tuple[float, bool]:
    """Recompute F1 from a published precision and recall (percent) and compare it with the published F1.

    Returns the recomputed value and whether it agrees within `tolerance`; a
    disagreement is logged (and recorded when `diagnostics` is given).
    """
    computed = f1(precision, recall)
    consistent = abs(computed - reported) <= tolerance + 1e-9
    if not consistent:
        message = f"F1 for P={precision} R={recall} is {computed:.2f}, reported value {reported} differs"
        if diagnostics is not None:
            diagnostics.warn(message)
        else:
            logger.warning(message)
    return computed, consistent


async def _judge_document(
    path: str,
    text: str,
    triples: Sequence[Triple],
    judge: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> list[JudgedTriple]:
    listing = "\n".join(f"{i}. {_format_triple(t)}" for i, t in enumerate(triples, start=1))
    request = prompts.request("judge_precision", text=text, triples=listing)
    try:
        items = await complete_parsed(judge, request, parse_string_list, retries=prompts.retries)
    except DocGraphError as e:
        diagnostics.warn(f"{path}: judge reply unusable, {len(triples)} triples unparseable ({e})")
        return [JudgedTriple(triple=t, verdict=Verdict.UNPARSEABLE, judge_raw=str(e)) for t in triples]

    judged: list[JudgedTriple] = []
    for i, triple in enumerate(triples):
        raw = items[i] if i < len(items) else ""
        judged.append(JudgedTriple(triple=triple, verdict=parse_verdict(raw), judge_raw=raw))
    unparseable = sum(1 for j in judged if j.verdict is Verdict.UNPARSEABLE)
    if unparseable:
        diagnostics.warn(f"{path}: {unparseable} of {len(triples)} judge verdicts unparseable")
    return judged


async def judge_precision(
    graph: KnowledgeGraph,
    tree: CorpusTree,
    judge: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> tuple[list[JudgedTriple], EvalReport]:
    """Ask the judge, one call per document, whether the document supports each of its triples.

    Unparseable verdicts are excluded from precision and reported separately.
    Every document counts towards the average recall number, including those
    without triples.
    """
    leaves = tree.leaves()
    leaf_paths = {leaf.path for leaf in leaves}
    by_doc: dict[str, list[Triple]] = {leaf.path: [] for leaf in leaves}
    for triple in graph.triples:
        if triple.source_path not in leaf_paths:
            raise DocGraphError(f"triple source {triple.source_path!r} is not a document of the corpus")
        by_doc[triple.source_path].append(triple)

    results = await asyncio.gather(
        *(
            _judge_document(leaf.path, leaf.text or "", by_doc[leaf.path], judge, prompts, diagnostics)
            for leaf in leaves
            if by_doc[leaf.path]
        )
    )
    judged = [j for doc_judged in results for j in doc_judged]

    per_document: dict[str, DocumentScore] = {}
    for leaf in leaves:
        verdicts = [j.verdict for j in judged if j.triple.source_path == leaf.path]
        true = verdicts.count(Verdict.TRUE)
        per_document[leaf.path] = DocumentScore(judged=true + verdicts.count(Verdict.FALSE), true=true)

    n_true = sum(score.true for score in per_document.values())
    n_false = sum(1 for j in judged if j.verdict is Verdict.FALSE)
    n_docs = len(leaves)
    report = EvalReport(
        precision=n_true / (n_true + n_false) if n_true + n_false else None,
        recall_number=n_true,
        average_recall_number=n_true / n_docs,
        judged_true=n_true,
        judged_false=n_false,
        unparseable=len(judged) - n_true - n_false,
        entity_count=len(graph.entities),
        average_entity_number=len(graph.entities) / n_docs,
        per_document=per_document,
    )
    logger.info(f"Judged {len(judged)} triples: {n_true} true, {n_false} false")
    return judged, report


def _tokens(*texts: str) -> set[str]:
    return {token.casefold() for text in texts for token in _TOKEN_RE.findall(text)}


def _casefold_spo(triple: Triple | GoldTriple) -> tuple[str, str, str]:
    return (triple.subject.casefold().strip(), triple.predicate.casefold().strip(), triple.object.casefold().strip())


async def match_gold(
    extracted: Sequence[Triple],
    gold: Sequence[GoldTriple],
    judge: ChatGateway,
    prompts: PromptKit,
    diagnostics: Diagnostics,
) -> GoldMetrics:
    """Greedy one-to-one matching of gold triples against extracted triples.

    Gold triples are taken in order. A case-insensitive exact match is taken
    without asking the judge; otherwise the judge picks among the unmatched
    extracted triples that share a word with the gold subject or object.
    """
    if not gold:
        raise ValueError("gold triples are required")

    matched_extracted: set[int] = set()
    matched = 0
    for g in gold:
        exact = next(
            (i for i, t in enumerate(extracted) if i not in matched_extracted and _casefold_spo(t) == _casefold_spo(g)),
            None,
        )
        if exact is not None:
            matched_extracted.add(exact)
            matched += 1
            continue

        gold_tokens = _tokens(g.subject, g.object)
        candidates = [
            i
            for i, t in enumerate(extracted)
            if i not in matched_extracted and gold_tokens & _tokens(t.subject, t.object)
        ]
        if not candidates:
            continue

        listing = "\n".join(f"{n}. {_format_triple(extracted[i])}" for n, i in enumerate(candidates, start=1))
        request = prompts.request("judge_equivalence", gold=_format_triple(g), candidates=listing)
        try:
            reply = (await judge.complete(request)).text
        except DocGraphError as e:
            diagnostics.warn(f"gold {_format_triple(g)}: judge failed, left unmatched ({e})")
            continue

        match = _MATCH_RE.match(reply)
        if match is None:
            diagnostics.warn(f"gold {_format_triple(g)}: unparseable judge reply {reply[:80]!r}, left unmatched")
            continue
        if match.group(1).lower() not in ("true", "yes"):
            continue
        choice = int(match.group(2)) if match.group(2) else 1
        if not 1 <= choice <= len(candidates):
            diagnostics.warn(f"gold {_format_triple(g)}: judge chose candidate {choice} of {len(candidates)}, left unmatched")
            continue
        matched_extracted.add(candidates[choice - 1])
        matched += 1

    precision = matched / len(extracted) if extracted else 0.0
    recall = matched / len(gold)
    logger.info(f"Matched {matched} of {len(gold)} gold triples against {len(extracted)} extracted")
    return GoldMetrics(
        precision=precision,
        recall=recall,
        f1=f1(precision, recall),
        matched=matched,
        extracted=len(extracted),
        gold=len(gold),
    )


def parse_gold_line(line: str) -> GoldTriple:
    try:
        return GoldTriple.model_validate_json(line)
    except ValueError as e:
        raise ParseError(f"invalid gold triple {line[:80]!r}: {e}") from e
