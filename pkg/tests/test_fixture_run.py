"""End-to-end runs over the packaged fixture corpus, compared byte for byte with its expected artifacts."""

import json
from pathlib import Path

import pytest

from docgraph.cli import EXIT_OK, cmd_build, cmd_eval, main
from docgraph.config import RunConfig
from docgraph.fixtures import generate_fixture
from docgraph.llm import ChatRequest, ChatResponse, ScriptedBackend
from docgraph.pipeline import SummaryPhase
from docgraph.runner import RunManifest
from docgraph.runner.manifest import StageStatus

pytestmark = pytest.mark.integration

BUILD_ARTIFACTS = ("summaries.jsonl", "order.json", "schema.json", "entities.jsonl", "triples.jsonl")


class Interrupted(Exception):
    pass


class InterruptingGateway:
    """Forwards to `inner` until `limit` calls were made or a prompt contains `stop_at`, then raises on every call."""

    def __init__(self, inner: ScriptedBackend, limit: int | None = None, stop_at: str | None = None) -> None:
        self.inner = inner
        self.limit = limit
        self.stop_at = stop_at
        self.calls = 0
        self.stopped = False

    async def complete(self, request: ChatRequest) -> ChatResponse:
        self.calls += 1
        if self.limit is not None and self.calls > self.limit:
            self.stopped = True
        if self.stop_at is not None and self.stop_at in request.user_prompt:
            self.stopped = True
        if self.stopped:
            raise Interrupted(f"call {self.calls}")
        return await self.inner.complete(request)


@pytest.fixture
def fixture_dir(tmp_path) -> Path:
    return generate_fixture(tmp_path / "fixture")


def load_config(fixture_dir: Path, run_dir: Path) -> RunConfig:
    return RunConfig.load(fixture_dir / "config.toml", corpus_path=fixture_dir / "corpus", run_dir=run_dir)


def backend(fixture_dir: Path) -> ScriptedBackend:
    return ScriptedBackend.from_yaml(fixture_dir / "script.yaml")


def assert_matches_expected(run_dir: Path, fixture_dir: Path, names=BUILD_ARTIFACTS) -> None:
    for name in names:
        assert (run_dir / name).read_bytes() == (fixture_dir / "expected" / name).read_bytes(), name


class TestFixtureRun:
    def test_fixture_layout(self, fixture_dir):
        corpus = fixture_dir / "corpus"
        assert sorted(p.relative_to(corpus).as_posix() for p in corpus.rglob("*.md")) == [
            "Best Practices/multi_target_exporter.md",
            "Concepts/data_model.md",
            "Concepts/jobs_instances.md",
            "Concepts/metric_types.md",
            "Introduction/first_steps.md",
            "Introduction/overview.md",
        ]
        assert len((fixture_dir / "gold.jsonl").read_text(encoding="utf-8").splitlines()) == 4

    def test_build_and_eval_reproduce_expected(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir, tmp_path / "run")
        scripted = backend(fixture_dir)

        assert cmd_build(config, gateway=scripted) == EXIT_OK
        assert cmd_eval(config, fixture_dir / "gold.jsonl", judge_gateway=scripted) == EXIT_OK

        assert_matches_expected(config.run_dir, fixture_dir, (*BUILD_ARTIFACTS, "eval_report.json"))
        manifest = RunManifest.load(config.run_dir)
        assert all(record.status is StageStatus.DONE for record in manifest.stages.values())
        stats = manifest.extraction
        assert (stats.entities_parsed, stats.off_schema) == (22, 1)
        assert (stats.triples_parsed, stats.malformed, stats.dangling, stats.duplicates) == (15, 1, 1, 1)
        assert stats.triples_parsed - stats.dangling - stats.duplicates == 13

    def test_call_counts(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir, tmp_path / "run")
        scripted = backend(fixture_dir)

        assert cmd_build(config, gateway=scripted) == EXIT_OK

        prompts = [call.user_prompt for call in scripted.call_log]
        assert sum("Summarize the document below" in p for p in prompts) == 6
        assert sum("Summarize the directory below" in p for p in prompts) == 4
        assert sum("Decide the order in which they should be read" in p for p in prompts) == 3
        assert sum("Summarize the current document" in p for p in prompts) == 6
        assert sum("classify meaningful entities" in p for p in prompts) == 6
        assert sum("extract meaningful entities and their types" in p for p in prompts) == 6
        assert sum("clear and meaningful relationships" in p for p in prompts) == 6

    def test_rerun_is_stable(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir, tmp_path / "run")
        assert cmd_build(config, gateway=backend(fixture_dir)) == EXIT_OK

        second = backend(fixture_dir)
        assert cmd_build(config, gateway=second) == EXIT_OK
        assert second.call_log == []

        fresh = load_config(fixture_dir, tmp_path / "fresh")
        assert cmd_build(fresh, gateway=backend(fixture_dir)) == EXIT_OK

        assert_matches_expected(config.run_dir, fixture_dir)
        assert_matches_expected(fresh.run_dir, fixture_dir)

    @pytest.mark.parametrize("limit", [3, 12, 17, 21, 30])
    def test_resume_after_interruption(self, fixture_dir, tmp_path, limit):
        config = load_config(fixture_dir, tmp_path / "run")

        with pytest.raises(Interrupted):
            cmd_build(config, gateway=InterruptingGateway(backend(fixture_dir), limit))

        manifest = RunManifest.load(config.run_dir)
        assert StageStatus.FAILED in {record.status for record in manifest.stages.values()}
        assert not (config.run_dir / "run.lock").exists()

        assert cmd_build(config, gateway=backend(fixture_dir)) == EXIT_OK
        assert_matches_expected(config.run_dir, fixture_dir)
        assert not list(config.run_dir.glob("*.partial*"))

    @pytest.mark.parametrize(
        ("stop_at", "finished", "earlier_markers"),
        [
            (
                "classify meaningful entities",
                ("order",),
                ("Summarize the document below", "Summarize the directory below", "Summarize the current document"),
            ),
            (
                "extract meaningful entities and their types",
                ("order", "schema"),
                ("Summarize the document below", "classify meaningful entities", "merge types that have the same meaning"),
            ),
        ],
    )
    def test_resume_skips_finished_stages(self, fixture_dir, tmp_path, stop_at, finished, earlier_markers):
        config = load_config(fixture_dir, tmp_path / "run")

        with pytest.raises(Interrupted):
            cmd_build(config, gateway=InterruptingGateway(backend(fixture_dir), stop_at=stop_at))
        manifest = RunManifest.load(config.run_dir)
        assert all(manifest.stages[stage].status is StageStatus.DONE for stage in finished)

        resumed = backend(fixture_dir)
        assert cmd_build(config, gateway=resumed) == EXIT_OK

        prompts = [call.user_prompt for call in resumed.call_log]
        assert not [p for p in prompts if any(marker in p for marker in earlier_markers)]
        assert_matches_expected(config.run_dir, fixture_dir)

    def test_context_is_causal(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir, tmp_path / "run")
        assert cmd_build(config, gateway=backend(fixture_dir)) == EXIT_OK

        sequence = json.loads((config.run_dir / "order.json").read_text(encoding="utf-8"))["sequence"]
        records = [json.loads(line) for line in (config.run_dir / "summaries.jsonl").read_text(encoding="utf-8").splitlines()]
        context = [r for r in records if r["phase"] == SummaryPhase.CONTEXT_ENHANCED.value]

        assert [r["node_path"] for r in context] == sequence
        assert context[0]["context_refs"] == []
        for position, record in enumerate(context):
            assert set(record["context_refs"]) <= set(sequence[:position])

    def test_graph_is_closed(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir, tmp_path / "run")
        assert cmd_build(config, gateway=backend(fixture_dir)) == EXIT_OK

        def read(name: str) -> list[dict]:
            return [json.loads(line) for line in (config.run_dir / name).read_text(encoding="utf-8").splitlines()]

        schema = json.loads((config.run_dir / "schema.json").read_text(encoding="utf-8"))["entries"]
        entities = {(e["source_path"], e["name"].casefold()): e["entity_type"] for e in read("entities.jsonl")}
        for triple in read("triples.jsonl"):
            for end, kind in (("subject", "subject_type"), ("object", "object_type")):
                assert entities[(triple["source_path"], triple[end].casefold())] == triple[kind]
                assert triple[kind] in schema
        assert {"Counter", "Gauge", "Histogram", "Summary"} <= set(schema)

    def test_command_line(self, tmp_path):
        out = tmp_path / "fixture"
        assert main(["fixture", str(out)]) == EXIT_OK

        common = [
            "--config",
            str(out / "config.toml"),
            "--corpus",
            str(out / "corpus"),
            "--run-dir",
            str(tmp_path / "run"),
            "--mock",
            str(out / "script.yaml"),
        ]
        assert main(["build", *common]) == EXIT_OK
        assert main(["eval", *common, "--gold", str(out / "gold.jsonl")]) == EXIT_OK

        assert_matches_expected(tmp_path / "run", out, (*BUILD_ARTIFACTS, "eval_report.json"))
