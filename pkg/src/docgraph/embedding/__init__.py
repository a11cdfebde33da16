"""Embedding providers and the summary vector store."""

from .providers import (
    DEFAULT_FASTEMBED_MODEL,
    Embedder,
    Embedding,
    FastEmbedEmbedder,
    HashingEmbedder,
    embed_one,
)
from .store import SearchHit, StoreEntry, VectorStore, cosine_distance

__all__ = [
    "DEFAULT_FASTEMBED_MODEL",
    "Embedder",
    "Embedding",
    "FastEmbedEmbedder",
    "HashingEmbedder",
    "SearchHit",
    "StoreEntry",
    "VectorStore",
    "cosine_distance",
    "embed_one",
]
