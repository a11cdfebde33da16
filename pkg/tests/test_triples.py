"""Tests for schema-guided entity and relation extraction and graph assembly."""

import pytest

from docgraph.llm import ScriptedBackend
from docgraph.pipeline import (
    EntitySchema,
    ExtractedEntity,
    SummaryPhase,
    SummaryRecord,
    Triple,
    assemble_graph,
    extract_entities,
    extract_graph,
    extract_relations,
)
from docgraph.pipeline.triples import render_schema

ENTITY_MARKER = "extract meaningful entities and their types"
RELATION_MARKER = "clear and meaningful relationships"

SCHEMA = EntitySchema(
    entries={"Installer": "A setup tool.", "Service": "A running program.", "Step": "One action."},
    provenance={"Installer": ["Installer"], "Service": ["Service"], "Step": ["Step"]},
)


def entity(name: str, entity_type: str, path: str = "guide/install.md") -> ExtractedEntity:
    return ExtractedEntity(name=name, entity_type=entity_type, source_path=path)


class TestRenderSchema:
    def test_full(self):
        assert render_schema(SCHEMA) == (
            '{"Installer": A setup tool., "Service": A running program., "Step": One action.}'
        )

    def test_truncates_to_closest_types(self, embedder):
        text = render_schema(SCHEMA, char_budget=30, embedder=embedder, summary_text="A running program.")
        assert text == '{"Service": A running program.}'

    def test_keeps_at_least_one_type(self, embedder):
        text = render_schema(SCHEMA, char_budget=1, embedder=embedder, summary_text="One action.")
        assert text == '{"Step": One action.}'


class TestExtractEntities:
    @pytest.mark.anyio
    async def test_keeps_schema_types_only(self, small_tree, prompts, diagnostics):
        doc = small_tree.index()["guide/install.md"]
        backend = ScriptedBackend(
            default_response='{"service": ["api server", "API Server"], "Installer": "setup.sh, wizard", "Vendor": ["Acme"]}'
        )

        entities, stats = await extract_entities(doc, SCHEMA, backend, prompts, diagnostics)

        assert [(e.name, e.entity_type) for e in entities] == [
            ("api server", "Service"),
            ("setup.sh", "Installer"),
            ("wizard", "Installer"),
        ]
        assert stats.entities_parsed == 5
        assert stats.off_schema == 1
        assert len(diagnostics.messages) == 1
        prompt = backend.call_log[0].user_prompt
        assert "# Install" in prompt
        assert '"Service": A running program.' in prompt

    @pytest.mark.anyio
    async def test_failure_counts_the_document(self, small_tree, prompts, diagnostics):
        doc = small_tree.index()["faq.md"]

        entities, stats = await extract_entities(doc, SCHEMA, ScriptedBackend(default_response="none"), prompts, diagnostics)

        assert entities == []
        assert stats.documents_failed == 1


class TestExtractRelations:
    ENTITIES = [entity("installer", "Installer"), entity("api server", "Service"), entity("restart", "Step")]

    @pytest.mark.anyio
    async def test_drops_dangling_duplicates_and_malformed(self, small_tree, prompts, diagnostics):
        doc = small_tree.index()["guide/install.md"]
        backend = ScriptedBackend(
            default_response=(
                "[(Installer, deploys, api server), (installer, DEPLOYS, API server), "
                "(api server, needs, database), (restart, applies to), (restart, refreshes, api server)]"
            )
        )

        triples, stats = await extract_relations(doc, self.ENTITIES, SCHEMA, backend, prompts, diagnostics)

        assert [t.spo() for t in triples] == [("Installer", "deploys", "api server"), ("restart", "refreshes", "api server")]
        assert all(t.source_path == doc.path for t in triples)
        assert (stats.triples_parsed, stats.dangling, stats.duplicates, stats.malformed) == (4, 1, 1, 1)
        assert stats.triples_parsed - stats.dangling - stats.duplicates == len(triples)
        assert "Entities: {Installer:[installer], Service:[api server], Step:[restart]}" in backend.call_log[0].user_prompt

    @pytest.mark.anyio
    async def test_needs_two_entities(self, small_tree, prompts, diagnostics):
        backend = ScriptedBackend()
        triples, stats = await extract_relations(
            small_tree.index()["faq.md"], self.ENTITIES[:1], SCHEMA, backend, prompts, diagnostics
        )
        assert triples == []
        assert backend.call_log == []

    @pytest.mark.anyio
    async def test_explicit_empty_reply(self, small_tree, prompts, diagnostics):
        backend = ScriptedBackend(default_response="[]")
        triples, stats = await extract_relations(
            small_tree.index()["guide/install.md"], self.ENTITIES, SCHEMA, backend, prompts, diagnostics
        )
        assert triples == []
        assert stats.documents_failed == 0
        assert len(backend.call_log) == 1


class TestAssembleGraph:
    def test_types_endpoints_and_deduplicates(self):
        entities = [[entity("a", "Service"), entity("A", "Service"), entity("b", "Step")], [entity("a", "Step", "faq.md")]]
        triples = [
            [
                Triple(subject="A", predicate="runs", object="b", source_path="guide/install.md"),
                Triple(subject="a", predicate="RUNS", object="B", source_path="guide/install.md"),
            ],
            [Triple(subject="a", predicate="mentions", object="c", source_path="faq.md")],
        ]

        graph = assemble_graph(entities, triples, SCHEMA)

        assert [(e.name, e.source_path) for e in graph.entities] == [
            ("a", "guide/install.md"),
            ("b", "guide/install.md"),
            ("a", "faq.md"),
        ]
        (triple,) = graph.triples
        assert (triple.subject_type, triple.object_type) == ("Service", "Step")
        assert graph.entity_schema == SCHEMA


class TestExtractGraph:
    @pytest.mark.anyio
    async def test_closure_and_reconciliation(self, small_tree, prompts, diagnostics):
        backend = ScriptedBackend(
            [
                ([ENTITY_MARKER, "# Install"], '{"Installer": ["installer"], "Service": ["service"], "Tool": ["curl"]}'),
                ([ENTITY_MARKER, "# Usage"], '{"Service": ["service"], "Step": ["start"]}'),
                ([ENTITY_MARKER, "# FAQ"], "{}"),
                ([RELATION_MARKER, "# Install"], "[(installer, installs, service), (curl, fetches, installer)]"),
                ([RELATION_MARKER, "# Usage"], "[(start, launches, service), (start, launches, service)]"),
            ]
        )
        summaries = {
            leaf.path: SummaryRecord(node_path=leaf.path, phase=SummaryPhase.CONTEXT_ENHANCED, text="s")
            for leaf in small_tree.leaves()
        }
        written = []

        graph, stats = await extract_graph(
            small_tree, SCHEMA, summaries, backend, prompts, diagnostics, on_record=written.append
        )

        assert sorted(r.source_path for r in written) == ["faq.md", "guide/install.md", "guide/usage.md"]
        assert [t.spo() for t in graph.triples] == [("installer", "installs", "service"), ("start", "launches", "service")]
        entity_keys = {(e.source_path, e.name.casefold()): e.entity_type for e in graph.entities}
        for t in graph.triples:
            assert entity_keys[(t.source_path, t.subject.casefold())] == t.subject_type
            assert entity_keys[(t.source_path, t.object.casefold())] == t.object_type
            assert t.subject_type in SCHEMA.entries and t.object_type in SCHEMA.entries
        assert stats.triples_parsed - stats.dangling - stats.duplicates == len(graph.triples)
        assert (stats.entities_parsed, stats.off_schema, stats.dangling, stats.duplicates) == (5, 1, 1, 1)

    @pytest.mark.anyio
    async def test_reuses_checkpointed_documents(self, small_tree, prompts, diagnostics):
        from docgraph.pipeline import DocumentExtraction

        done = {
            path: DocumentExtraction(source_path=path)
            for path in ("faq.md", "guide/install.md", "guide/usage.md")
        }
        backend = ScriptedBackend()

        graph, _ = await extract_graph(small_tree, SCHEMA, {}, backend, prompts, diagnostics, existing=done)

        assert graph.triples == ()
        assert backend.call_log == []
