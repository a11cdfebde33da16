import argparse
import asyncio
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager
from pathlib import Path
import sys

from loguru import logger
from rich import print as rprint

from .config import EndpointConfig, RunConfig
from .corpus import CorpusTree, load_corpus
from .embedding import Embedder
from .errors import ConfigError, DocGraphError, MissingArtifact, PrerequisiteMissing
from .llm import ChatGateway, ScriptedBackend
from .runner import PipelineRun, Stage

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def configure_logging(verbose: bool = False) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def load_tree(config: RunConfig) -> CorpusTree:
    if config.corpus_path is None:
        raise ConfigError("no corpus path configured (use --corpus or corpus_path)")
    return load_corpus(config.corpus_path, config.include_extensions, config.chunk_chars)


@asynccontextmanager
async def open_gateway(
    config: RunConfig,
    endpoint: EndpointConfig,
    given: ChatGateway | None = None,
) -> AsyncIterator[ChatGateway]:
    """`given`, or a remote gateway for `endpoint` that is closed on exit."""
    if given is not None:
        yield given
        return
    async with config.build_gateway(endpoint) as remote:
        yield remote


async def run_build(
    config: RunConfig,
    *,
    gateway: ChatGateway | None = None,
    embedder: Embedder | None = None,
) -> None:
    """Stages order, schema and extract; stages already done are skipped."""
    tree = load_tree(config)
    prompts = config.prompt_kit()
    async with open_gateway(config, config.generator, gateway) as generator:
        with PipelineRun(config, tree, generator, embedder or config.build_embedder(), prompts) as run:
            await run.build()


async def run_stage(
    config: RunConfig,
    stage: Stage,
    *,
    gateway: ChatGateway | None = None,
    embedder: Embedder | None = None,
) -> None:
    """Exactly one construction stage, once its prerequisites are done."""
    if stage not in (Stage.ORDER, Stage.SCHEMA, Stage.EXTRACT):
        raise ConfigError(f"unknown stage {stage!r}")
    tree = load_tree(config)
    prompts = config.prompt_kit()
    async with open_gateway(config, config.generator, gateway) as generator:
        with PipelineRun(config, tree, generator, embedder or config.build_embedder(), prompts) as run:
            run.check_prerequisites(stage)
            await run.run_stage(stage)


async def run_eval(
    config: RunConfig,
    gold_path: Path | None = None,
    *,
    judge_gateway: ChatGateway | None = None,
    embedder: Embedder | None = None,
) -> None:
    """Judge the built graph and, with a gold file, match it against gold triples."""
    triples_path = Path(config.run_dir) / "triples.jsonl"
    if not triples_path.exists():
        raise MissingArtifact(f"{triples_path} is missing; run the build first")
    tree = load_tree(config)
    prompts = config.prompt_kit()
    async with open_gateway(config, config.judge, judge_gateway) as judge:
        with PipelineRun(config, tree, judge, embedder or config.build_embedder(), prompts, judge=judge) as run:
            await run.run_stage(Stage.EVAL, gold_path=gold_path)


def _exit_status(action: str, error: Exception) -> int:
    stage = getattr(error, "stage", None)
    if stage is not None and stage != action.removeprefix("stage "):
        action = f"{action} (stage {stage})"
    if isinstance(error, ConfigError):
        rprint(f"[red]{action}: configuration error:[/red] {error}")
        return EXIT_USAGE
    if isinstance(error, PrerequisiteMissing | MissingArtifact):
        rprint(f"[red]{action}:[/red] {error}")
        return EXIT_FAILURE
    rprint(f"[red]{action} failed:[/red] {error}")
    return EXIT_FAILURE


def cmd_build(config: RunConfig, *, gateway: ChatGateway | None = None, embedder: Embedder | None = None) -> int:
    try:
        asyncio.run(run_build(config, gateway=gateway, embedder=embedder))
    except DocGraphError as e:
        return _exit_status("build", e)
    rprint(f"[green]Build complete[/green] in {config.run_dir}")
    return EXIT_OK


def cmd_stage(
    config: RunConfig,
    stage: Stage | str,
    *,
    gateway: ChatGateway | None = None,
    embedder: Embedder | None = None,
) -> int:
    try:
        stage = Stage(stage)
    except ValueError:
        return _exit_status(f"stage {stage}", ConfigError(f"unknown stage {stage!r}"))
    try:
        asyncio.run(run_stage(config, stage, gateway=gateway, embedder=embedder))
    except DocGraphError as e:
        return _exit_status(f"stage {stage}", e)
    rprint(f"[green]Stage {stage} complete[/green] in {config.run_dir}")
    return EXIT_OK


def cmd_eval(
    config: RunConfig,
    gold_path: Path | None = None,
    *,
    judge_gateway: ChatGateway | None = None,
    embedder: Embedder | None = None,
) -> int:
    try:
        asyncio.run(run_eval(config, gold_path, judge_gateway=judge_gateway, embedder=embedder))
    except DocGraphError as e:
        return _exit_status("eval", e)
    return EXIT_OK


def cmd_fixture(out_dir: Path) -> int:
    from .fixtures import generate_fixture

    try:
        generate_fixture(out_dir)
    except OSError as e:
        rprint(f"[red]fixture failed:[/red] {e}")
        return EXIT_FAILURE
    rprint(f"[green]Fixture written[/green] to {out_dir}")
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML configuration file")
    common.add_argument("--corpus", type=Path, default=None, help="Corpus directory or flat text file")
    common.add_argument("--run-dir", type=Path, default=None, help="Run directory for artifacts")
    common.add_argument("--seed", type=int, default=None, help="k-means seed")
    common.add_argument("--mock", type=Path, default=None, help="Scripted backend YAML used instead of the endpoints")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def main(argv: list[str] | None = None) -> int:
    """
    Command-line interface (CLI) entry point for docgraph.
    """
    common = _common_options()
    parser = argparse.ArgumentParser(description="Knowledge graph construction from document repositories")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    subparsers.add_parser("build", parents=[common], help="Run all construction stages (resumes finished ones)")

    eval_parser = subparsers.add_parser("eval", parents=[common], help="Evaluate the built graph with the judge model")
    eval_parser.add_argument("--gold", type=Path, default=None, help="Gold triples (JSONL)")

    stage_parser = subparsers.add_parser("stage", parents=[common], help="Run one construction stage")
    stage_parser.add_argument("stage", choices=[s.value for s in (Stage.ORDER, Stage.SCHEMA, Stage.EXTRACT)])

    fixture_parser = subparsers.add_parser("fixture", help="Write the toy fixture corpus, script and goldens")
    fixture_parser.add_argument("out_dir", type=Path)

    args = parser.parse_args(argv)

    if args.command == "fixture":
        configure_logging()
        return cmd_fixture(args.out_dir)
    if args.command is None:
        parser.print_help()
        return EXIT_OK

    configure_logging(args.verbose)
    try:
        config = RunConfig.load(args.config, corpus_path=args.corpus, run_dir=args.run_dir, kmeans_seed=args.seed)
        scripted = ScriptedBackend.from_yaml(args.mock) if args.mock is not None else None
    except ConfigError as e:
        return _exit_status(args.command, e)

    if args.command == "build":
        return cmd_build(config, gateway=scripted)
    elif args.command == "stage":
        return cmd_stage(config, args.stage, gateway=scripted)
    elif args.command == "eval":
        return cmd_eval(config, args.gold, judge_gateway=scripted)
    parser.print_help()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
