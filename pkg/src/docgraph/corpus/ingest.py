"""Repository ingestion: directory trees and flat text."""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

from loguru import logger

from ..errors import DecodeError, EmptyCorpus, EmptyText, NotFound
from .models import ROOT_PATH, CorpusTree, DocumentNode, NodeKind, child_path

DEFAULT_EXTENSIONS = frozenset({"md", "txt"})
DEFAULT_CHUNK_CHARS = 4000


def _normalize_extensions(extensions: Iterable[str]) -> frozenset[str]:
    return frozenset(ext.lower().lstrip(".") for ext in extensions)


def _build_directory(directory: Path, node_path: str, extensions: frozenset[str], root: Path) -> DocumentNode | None:
    children: list[DocumentNode] = []
    for entry in sorted(directory.iterdir(), key=lambda p: p.name):
        if entry.name.startswith(".") or entry.is_symlink():
            continue
        path = child_path(node_path, entry.name)
        if entry.is_dir():
            sub = _build_directory(entry, path, extensions, root)
            if sub is not None:
                children.append(sub)
        elif entry.is_file() and entry.suffix.lower().lstrip(".") in extensions:
            try:
                text = entry.read_bytes().decode("utf-8")
            except UnicodeDecodeError as e:
                raise DecodeError(str(entry.relative_to(root)), str(e)) from e
            if not text.strip():
                logger.warning(f"Skipping empty document {path}")
                continue
            children.append(DocumentNode(path=path, kind=NodeKind.LEAF, text=text))

    if not children:
        return None
    return DocumentNode(path=node_path, kind=NodeKind.DIRECTORY, children=tuple(children))


def ingest_directory(root_path: str | Path, include_extensions: Iterable[str] = DEFAULT_EXTENSIONS) -> CorpusTree:
    """Mirror a directory of UTF-8 documents as a CorpusTree.

    Children are ordered lexically by name, empty directories are pruned, and
    hidden entries and symlinks are ignored.

    Args:
        root_path: Repository root directory
        include_extensions: File extensions (without dot) to ingest

    Returns:
        The corpus tree

    Raises:
        NotFound: If root_path does not exist
        EmptyCorpus: If no file with an included extension exists
        DecodeError: If a matching file is not valid UTF-8
    """
    root = Path(root_path)
    if not root.exists():
        raise NotFound(f"corpus path not found: {root}")
    if not root.is_dir():
        raise NotFound(f"corpus path is not a directory: {root}")

    extensions = _normalize_extensions(include_extensions)
    node = _build_directory(root, ROOT_PATH, extensions, root)
    if node is None:
        raise EmptyCorpus(f"no documents with extensions {sorted(extensions)} under {root}")

    tree = CorpusTree.from_root(node)
    logger.info(f"Ingested {tree.leaf_count} documents from {root}")
    return tree


def _split_points(text: str, chunk_chars: int) -> list[int]:
    cuts: list[int] = []
    pos = 0
    n = len(text)
    while n - pos > chunk_chars:
        window = text[pos : pos + chunk_chars]
        boundary = window.rfind("\n\n")
        # Separator stays with the preceding chunk so concatenation round-trips.
        cut = pos + boundary + 2 if boundary > 0 else pos + chunk_chars
        cuts.append(cut)
        pos = cut
    cuts.append(n)
    return cuts


def chunk_flat_text(text: str, chunk_chars: int = DEFAULT_CHUNK_CHARS) -> CorpusTree:
    """Split unstructured text into a single-layer tree of chunk documents.

    Chunks end at the last blank line at or before `chunk_chars`, or are cut
    hard when a paragraph is longer than that.
    """
    if not text:
        raise EmptyText("cannot chunk empty text")
    if chunk_chars < 1:
        raise ValueError("chunk_chars must be >= 1")

    leaves: list[DocumentNode] = []
    start = 0
    for index, end in enumerate(_split_points(text, chunk_chars), start=1):
        name = f"chunk-{index:04d}"
        leaves.append(DocumentNode(path=child_path(ROOT_PATH, name), kind=NodeKind.LEAF, text=text[start:end]))
        start = end

    root = DocumentNode(path=ROOT_PATH, kind=NodeKind.DIRECTORY, children=tuple(leaves))
    return CorpusTree.from_root(root)


def load_corpus(
    corpus_path: str | Path,
    include_extensions: Iterable[str] = DEFAULT_EXTENSIONS,
    chunk_chars: int = DEFAULT_CHUNK_CHARS,
) -> CorpusTree:
    """Ingest a directory, or chunk a single text file when there is no directory structure."""
    path = Path(corpus_path)
    if path.is_file():
        try:
            text = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(str(path), str(e)) from e
        logger.info(f"Chunking flat text {path} into {chunk_chars}-char documents")
        return chunk_flat_text(text, chunk_chars)
    return ingest_directory(path, include_extensions)
