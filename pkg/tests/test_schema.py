"""Tests for entity-type extraction, clustering and schema canonicalization."""

import json

import pytest

from docgraph.embedding import HashingEmbedder, VectorStore
from docgraph.errors import EmptySchema
from docgraph.llm import ScriptedBackend
from docgraph.pipeline import (
    SummaryPhase,
    SummaryRecord,
    TypedMention,
    build_schema,
    canonicalize_cluster,
    cluster_types,
    extract_entity_types,
    filter_singletons,
)
from docgraph.pipeline.schema import PartialSchema, first_sentence, merge_partials

DEFINITION_MARKER = "merge types that have the same meaning"
TYPES_MARKER = "classify meaningful entities"


def mentions(*pairs: tuple[str, str]) -> list[TypedMention]:
    return [TypedMention(type_name=name, source_path=path) for name, path in pairs]


def summaries_for(tree) -> dict[str, SummaryRecord]:
    return {
        leaf.path: SummaryRecord(node_path=leaf.path, phase=SummaryPhase.CONTEXT_ENHANCED, text=f"Summary of {leaf.name}.")
        for leaf in tree.leaves()
    }


class TestEntityTypes:
    @pytest.mark.anyio
    async def test_deduplicates_case_insensitively(self, small_tree, prompts, diagnostics):
        doc = small_tree.leaves()[0]
        summary = summaries_for(small_tree)[doc.path]
        backend = ScriptedBackend(default_response="[Service, service , 'Installer', SERVICE]")

        found = await extract_entity_types(doc, summary, backend, prompts, diagnostics)

        assert [m.type_name for m in found] == ["Service", "Installer"]
        assert all(m.source_path == doc.path for m in found)
        assert "Summary of faq.md." in backend.call_log[0].user_prompt

    @pytest.mark.anyio
    async def test_unparseable_document_is_skipped(self, small_tree, prompts, diagnostics):
        doc = small_tree.leaves()[0]
        backend = ScriptedBackend(default_response="no list at all")

        found = await extract_entity_types(doc, summaries_for(small_tree)[doc.path], backend, prompts, diagnostics)

        assert found == []
        assert len(diagnostics.messages) == 1

    def test_filter_singletons(self):
        kept = filter_singletons(mentions(("Job", "a"), ("job", "b"), ("Alert", "a"), ("Target", "a"), ("Target", "c")))
        assert [m.type_name for m in kept] == ["Job", "job", "Target", "Target"]


class TestClusterTypes:
    def test_few_names_form_one_cluster(self, embedder):
        clusters = cluster_types(mentions(("target", "a"), ("Job", "b"), ("job", "c")), embedder)
        assert clusters == [["Job", "target"]]

    def test_no_names(self, embedder):
        assert cluster_types([], embedder) == []

    def test_recovers_planted_groups(self):
        names = [
            "histogram",
            "histograms",
            "histogramm",
            "configuration",
            "configurations",
            "configuratio",
            "exporter",
            "exporters",
            "exporterr",
        ]

        clusters = cluster_types(mentions(*((n, "doc") for n in names)), HashingEmbedder(1024), seed=0)

        assert clusters == [
            ["configuratio", "configuration", "configurations"],
            ["exporter", "exporterr", "exporters"],
            ["histogram", "histogramm", "histograms"],
        ]


class TestCanonicalize:
    @pytest.mark.anyio
    async def test_assigns_members_and_drops_unused_names(self, prompts, diagnostics, embedder):
        reply = json.dumps({"Metric": "A measurement. It has a name.", "Alert Rule": "A rule that fires alerts."})
        backend = ScriptedBackend(default_response=f"Here you go: {reply}")

        partial = await canonicalize_cluster(
            ["metric", "metrics"], VectorStore(embedder.dimension), embedder, backend, prompts, diagnostics
        )

        assert partial.entries == {"Metric": "A measurement."}
        assert partial.provenance == {"Metric": ["metric", "metrics"]}
        assert "Input entity types: [metric, metrics]" in backend.call_log[0].user_prompt
        assert "Reference Knowledge: (none)" in backend.call_log[0].user_prompt

    @pytest.mark.anyio
    async def test_reference_comes_from_the_store(self, prompts, diagnostics, embedder):
        store = VectorStore(embedder.dimension)
        store.insert("metrics.md", "Metrics are named measurements.", embedder.embed(["Metrics are named measurements."])[0])
        backend = ScriptedBackend(default_response='{"Metric": "A measurement."}')

        await canonicalize_cluster(["metric"], store, embedder, backend, prompts, diagnostics, k=1)

        assert '"metrics.md": Metrics are named measurements.' in backend.call_log[0].user_prompt

    @pytest.mark.anyio
    async def test_unusable_reply_keeps_names(self, prompts, diagnostics, embedder):
        backend = ScriptedBackend(default_response="I cannot help with that.")

        partial = await canonicalize_cluster(
            ["Job", "Instance"], VectorStore(embedder.dimension), embedder, backend, prompts, diagnostics
        )

        assert partial.entries == {"Job": "An entity of type Job.", "Instance": "An entity of type Instance."}
        assert partial.provenance == {"Job": ["Job"], "Instance": ["Instance"]}
        assert len(diagnostics.messages) == 1

    def test_first_sentence(self):
        assert first_sentence("A counter only goes up.  It resets on restart.") == "A counter only goes up."
        assert first_sentence("Configured in prometheus.yml files") == "Configured in prometheus.yml files"


class TestMergePartials:
    def test_first_definition_wins_and_output_is_sorted(self):
        partials = [
            PartialSchema(entries={"target": "An endpoint.", "Job": "A group."}, provenance={"target": ["target"], "Job": ["Job"]}),
            PartialSchema(entries={"Target": "Another definition."}, provenance={"Target": ["targets"]}),
        ]
        spellings = {"target": ["target", "Target"], "job": ["Job", "job"], "targets": ["targets"]}

        schema = merge_partials(partials, spellings)

        assert list(schema.entries) == ["Job", "target"]
        assert schema.entries["target"] == "An endpoint."
        assert schema.provenance == {"Job": ["Job", "job"], "target": ["Target", "target", "targets"]}


class TestBuildSchema:
    @pytest.mark.anyio
    async def test_builds_sorted_schema(self, small_tree, prompts, diagnostics, embedder):
        backend = ScriptedBackend(
            [
                ([TYPES_MARKER, "# FAQ"], "[Service, Installer, Question]"),
                ([TYPES_MARKER, "# Install"], "[Installer, service, Step]"),
                ([TYPES_MARKER, "# Usage"], "[Service, Step]"),
                (
                    [DEFINITION_MARKER],
                    json.dumps({"Service": "A running program.", "Installer": "A setup tool.", "Step": "One action."}),
                ),
            ]
        )

        schema = await build_schema(
            small_tree, summaries_for(small_tree), VectorStore(embedder.dimension), embedder, backend, prompts, diagnostics
        )

        assert schema.entries == {"Installer": "A setup tool.", "Service": "A running program.", "Step": "One action."}
        assert list(schema.entries) == ["Installer", "Service", "Step"]
        assert schema.provenance == {"Installer": ["Installer"], "Service": ["Service", "service"], "Step": ["Step"]}
        assert schema.lookup("SERVICE") == "Service"
        assert schema.lookup("Question") is None

    @pytest.mark.anyio
    async def test_all_singletons(self, small_tree, prompts, diagnostics, embedder):
        backend = ScriptedBackend(
            [
                ([TYPES_MARKER, "# FAQ"], "[Question]"),
                ([TYPES_MARKER, "# Install"], "[Installer]"),
                ([TYPES_MARKER, "# Usage"], "[Step]"),
            ]
        )

        with pytest.raises(EmptySchema):
            await build_schema(
                small_tree, summaries_for(small_tree), VectorStore(embedder.dimension), embedder, backend, prompts, diagnostics
            )
