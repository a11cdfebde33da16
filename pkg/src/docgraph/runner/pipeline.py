"""Stage driver: runs, checkpoints and resumes the construction stages."""

from __future__ import annotations

from pathlib import Path

from loguru import logger

from ..config import RunConfig
from ..corpus.models import CorpusTree
from ..diagnostics import Diagnostics
from ..embedding.providers import Embedder
from ..embedding.store import VectorStore
from ..errors import ConfigError, DocGraphError, MissingArtifact, PrerequisiteMissing
from ..evaluation.judge import judge_precision, match_gold, parse_gold_line
from ..evaluation.models import GoldTriple
from ..evaluation.report import write_report
from ..llm.gateway import ChatGateway
from ..llm.prompts import PromptKit
from ..pipeline.dependency import compute_orders, summarize_directories, summarize_leaves, walk_and_summarize
from ..pipeline.models import (
    AccessOrder,
    EntitySchema,
    ExtractedEntity,
    KnowledgeGraph,
    SummaryPhase,
    SummaryRecord,
    Triple,
)
from ..pipeline.schema import build_schema
from ..pipeline.triples import DocumentExtraction, extract_graph
from ..utils.jsonl import append_jsonl, read_jsonl, write_json, write_jsonl
from .manifest import BUILD_STAGES, STAGE_ARTIFACTS, RunLock, RunManifest, Stage

SUMMARIES_PARTIAL = "summaries.partial.jsonl"
ORDERS_PARTIAL = "orders.partial.json"
EXTRACT_PARTIAL = "extract.partial.jsonl"
TSV_NAME = "triples.tsv"

PREREQUISITES: dict[Stage, tuple[Stage, ...]] = {
    Stage.ORDER: (),
    Stage.SCHEMA: (Stage.ORDER,),
    Stage.EXTRACT: (Stage.ORDER, Stage.SCHEMA),
}


def read_gold(path: Path) -> list[GoldTriple]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read gold file {path}: {e}") from e
    gold = [parse_gold_line(line) for line in lines if line.strip()]
    if not gold:
        raise ConfigError(f"gold file {path} holds no triples")
    return gold


def write_tsv(path: Path, triples: tuple[Triple, ...]) -> None:
    def clean(value: str) -> str:
        return " ".join(value.split())

    lines = [f"{clean(t.subject)}\t{clean(t.predicate)}\t{clean(t.object)}\n" for t in triples]
    path.write_text("".join(lines), encoding="utf-8", newline="\n")


class PipelineRun:
    """One run directory: its manifest, lock and the stages that fill it.

    Use it as a context manager: entering takes the run lock and loads the
    manifest. Every stage checkpoints as it goes; rerunning a stage reuses
    what an interrupted attempt already produced.
    """

    def __init__(
        self,
        config: RunConfig,
        tree: CorpusTree,
        gateway: ChatGateway,
        embedder: Embedder,
        prompts: PromptKit,
        *,
        judge: ChatGateway | None = None,
    ) -> None:
        self.config = config
        self.tree = tree
        self.gateway = gateway
        self.judge = judge or gateway
        self.embedder = embedder
        self.prompts = prompts
        self.run_dir = Path(config.run_dir)
        self.manifest = RunManifest()
        self._lock = RunLock(self.run_dir)

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def __enter__(self) -> PipelineRun:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self._lock.__enter__()
        try:
            self.manifest = RunManifest.load(self.run_dir)
            self.manifest.config = self.config.snapshot()
            self.manifest.save(self.run_dir)
        except BaseException:
            self._lock.__exit__(None, None, None)
            raise
        return self

    def __exit__(self, *exc_info: object) -> None:
        self._lock.__exit__(None, None, None)

    def is_done(self, stage: Stage) -> bool:
        return self.manifest.is_done(stage, self.run_dir)

    def check_prerequisites(self, stage: Stage) -> None:
        for prerequisite in PREREQUISITES[stage]:
            if not self.is_done(prerequisite):
                raise PrerequisiteMissing(f"stage {stage} needs stage {prerequisite} to be done first")

    async def run_stage(self, stage: Stage, gold_path: Path | None = None) -> None:
        """Run one stage and record its outcome in the manifest."""
        diagnostics = Diagnostics()
        logger.info(f"Stage {stage} starting in {self.run_dir}")
        try:
            if stage is Stage.ORDER:
                artifacts = await self._order(diagnostics)
            elif stage is Stage.SCHEMA:
                artifacts = await self._schema(diagnostics)
            elif stage is Stage.EXTRACT:
                artifacts = await self._extract(diagnostics)
            else:
                artifacts = await self._eval(diagnostics, gold_path)
        except Exception as e:
            logger.error(f"Stage {stage} failed: {e}")
            if isinstance(e, DocGraphError):
                e.stage = stage.value
            self.manifest.mark_failed(stage, e, diagnostics.messages)
            self.manifest.save(self.run_dir)
            raise
        self.manifest.mark_done(stage, self.run_dir, artifacts, diagnostics.messages)
        self.manifest.save(self.run_dir)
        logger.info(f"Stage {stage} done ({len(diagnostics)} warnings)")

    async def build(self) -> None:
        """Run the construction stages in order, skipping those already done."""
        for stage in BUILD_STAGES:
            if self.is_done(stage):
                logger.info(f"Stage {stage} already done; skipping")
                continue
            await self.run_stage(stage)

    # Stage 1

    def _load_summary_checkpoint(self) -> list[SummaryRecord]:
        path = self.path(SUMMARIES_PARTIAL)
        return list(read_jsonl(path, SummaryRecord)) if path.exists() else []

    async def _order(self, diagnostics: Diagnostics) -> list[str]:
        checkpoint = self._load_summary_checkpoint()
        partial = self.path(SUMMARIES_PARTIAL)

        def save(record: SummaryRecord) -> None:
            append_jsonl(partial, record)

        initial_done = {r.node_path: r for r in checkpoint if r.phase is SummaryPhase.INITIAL}
        directory_done = {r.node_path: r for r in checkpoint if r.phase is SummaryPhase.DIRECTORY}
        context_done = [r for r in checkpoint if r.phase is SummaryPhase.CONTEXT_ENHANCED]

        initial = await summarize_leaves(self.tree, self.gateway, self.prompts, existing=initial_done, on_record=save)
        initial_by_path = {r.node_path: r for r in initial}
        directories = await summarize_directories(
            self.tree, initial_by_path, self.gateway, self.prompts, existing=directory_done, on_record=save
        )

        orders_path = self.path(ORDERS_PARTIAL)
        if orders_path.exists():
            orders = AccessOrder.model_validate_json(orders_path.read_text(encoding="utf-8")).per_level_orders
        else:
            summaries = {**initial_by_path, **{r.node_path: r for r in directories}}
            orders = await compute_orders(self.tree, summaries, self.gateway, self.prompts, diagnostics)
            write_json(orders_path, AccessOrder(sequence=(), per_level_orders=orders))

        store = VectorStore(self.embedder.dimension)
        access_order, context = await walk_and_summarize(
            self.tree,
            orders,
            initial_by_path,
            self.gateway,
            self.prompts,
            self.embedder,
            store,
            k=self.config.retrieval_k,
            context_char_budget=self.config.context_char_budget,
            existing=context_done,
            on_record=save,
        )

        write_jsonl(self.path("summaries.jsonl"), [*initial, *directories, *context])
        write_json(self.path("order.json"), access_order)
        store.dump_jsonl(self.path("store.jsonl"))
        partial.unlink(missing_ok=True)
        orders_path.unlink(missing_ok=True)
        return list(STAGE_ARTIFACTS[Stage.ORDER])

    # Stage 2

    def _context_summaries(self) -> dict[str, SummaryRecord]:
        path = self.path("summaries.jsonl")
        if not path.exists():
            raise MissingArtifact(f"{path} is missing")
        return {r.node_path: r for r in read_jsonl(path, SummaryRecord) if r.phase is SummaryPhase.CONTEXT_ENHANCED}

    def _load_schema(self) -> EntitySchema:
        path = self.path("schema.json")
        if not path.exists():
            raise MissingArtifact(f"{path} is missing")
        return EntitySchema.model_validate_json(path.read_text(encoding="utf-8"))

    async def _schema(self, diagnostics: Diagnostics) -> list[str]:
        summaries = self._context_summaries()
        store_path = self.path("store.jsonl")
        if not store_path.exists():
            raise MissingArtifact(f"{store_path} is missing")
        store = VectorStore.load_jsonl(store_path, self.embedder.dimension)
        schema = await build_schema(
            self.tree,
            summaries,
            store,
            self.embedder,
            self.gateway,
            self.prompts,
            diagnostics,
            retrieval_k=self.config.retrieval_k,
            seed=self.config.kmeans_seed,
            restarts=self.config.kmeans_restarts,
            sweep=self.config.sweep,
        )
        write_json(self.path("schema.json"), schema)
        return list(STAGE_ARTIFACTS[Stage.SCHEMA])

    # Stage 3

    async def _extract(self, diagnostics: Diagnostics) -> list[str]:
        schema = self._load_schema()
        summaries = self._context_summaries()
        partial = self.path(EXTRACT_PARTIAL)
        existing = {r.source_path: r for r in read_jsonl(partial, DocumentExtraction)} if partial.exists() else {}

        graph, stats = await extract_graph(
            self.tree,
            schema,
            summaries,
            self.gateway,
            self.prompts,
            diagnostics,
            embedder=self.embedder,
            schema_char_budget=self.config.schema_char_budget,
            existing=existing,
            on_record=lambda record: append_jsonl(partial, record),
        )

        write_jsonl(self.path("entities.jsonl"), graph.entities)
        write_jsonl(self.path("triples.jsonl"), graph.triples)
        artifacts = list(STAGE_ARTIFACTS[Stage.EXTRACT])
        if self.config.export_tsv:
            write_tsv(self.path(TSV_NAME), graph.triples)
            artifacts.append(TSV_NAME)
        self.manifest.extraction = stats
        partial.unlink(missing_ok=True)
        return artifacts

    # Evaluation

    def load_graph(self) -> KnowledgeGraph:
        triples_path = self.path("triples.jsonl")
        if not triples_path.exists():
            raise MissingArtifact(f"{triples_path} is missing; run the build first")
        entities_path = self.path("entities.jsonl")
        entities = tuple(read_jsonl(entities_path, ExtractedEntity)) if entities_path.exists() else ()
        schema_path = self.path("schema.json")
        schema = self._load_schema() if schema_path.exists() else EntitySchema(entries={})
        return KnowledgeGraph(triples=tuple(read_jsonl(triples_path, Triple)), entities=entities, entity_schema=schema)

    async def _eval(self, diagnostics: Diagnostics, gold_path: Path | None) -> list[str]:
        graph = self.load_graph()
        gold = read_gold(gold_path) if gold_path is not None else None
        _, report = await judge_precision(graph, self.tree, self.judge, self.prompts, diagnostics)
        if gold is not None:
            metrics = await match_gold(graph.triples, gold, self.judge, self.prompts, diagnostics)
            report = report.model_copy(update={"gold_metrics": metrics})
        write_report(report, self.path("eval_report.json"))
        return list(STAGE_ARTIFACTS[Stage.EVAL])
