"""Document repository ingestion."""

from .ingest import chunk_flat_text, ingest_directory, load_corpus
from .models import ROOT_PATH, CorpusTree, DocumentNode, NodeKind

__all__ = [
    "ROOT_PATH",
    "CorpusTree",
    "DocumentNode",
    "NodeKind",
    "chunk_flat_text",
    "ingest_directory",
    "load_corpus",
]
