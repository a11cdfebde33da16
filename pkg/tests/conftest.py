from pathlib import Path

import pytest

from docgraph.corpus import CorpusTree, ingest_directory
from docgraph.diagnostics import Diagnostics
from docgraph.embedding import HashingEmbedder
from docgraph.llm import PromptKit, TemplateSet


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture(scope="session")
def templates() -> TemplateSet:
    return TemplateSet.load()


@pytest.fixture
def prompts(templates) -> PromptKit:
    return PromptKit(templates=templates)


@pytest.fixture
def embedder() -> HashingEmbedder:
    return HashingEmbedder(256)


@pytest.fixture
def diagnostics() -> Diagnostics:
    return Diagnostics()


def write_tree(root: Path, files: dict[str, str]) -> Path:
    """Create `files` (relative path -> text) under `root`."""
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


@pytest.fixture
def small_tree(tmp_path) -> CorpusTree:
    """Two directories, three documents."""
    root = write_tree(
        tmp_path / "repo",
        {
            "guide/install.md": "# Install\n\nRun the installer.\n",
            "guide/usage.md": "# Usage\n\nStart the service after installing it.\n",
            "faq.md": "# FAQ\n\nAnswers to common questions.\n",
        },
    )
    return ingest_directory(root)
