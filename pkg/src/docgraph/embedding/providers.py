"""Text embedding providers."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any, Protocol, runtime_checkable

from loguru import logger
import numpy as np
from numpy.typing import NDArray
from sklearn.feature_extraction.text import HashingVectorizer

from ..errors import DimensionMismatch, ProviderError, ZeroVector

Embedding = NDArray[np.float64]

DEFAULT_FASTEMBED_MODEL = "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"


@runtime_checkable
class Embedder(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[Embedding]: ...


def _check_texts(texts: Sequence[str]) -> None:
    if not texts:
        raise ProviderError("embed() needs at least one text")
    for i, text in enumerate(texts):
        if not isinstance(text, str) or not text:
            raise ProviderError(f"text #{i} is empty")


class HashingEmbedder:
    """Deterministic embedder: character 1-3-grams hashed into `dimension` buckets, L2-normalized.

    Needs no model download, and the same text always maps to the same vector.
    """

    def __init__(self, dimension: int = 256) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self._vectorizer = HashingVectorizer(
            analyzer="char",
            ngram_range=(1, 3),
            n_features=dimension,
            alternate_sign=False,
            norm="l2",
            dtype=np.float64,
        )

    def embed(self, texts: Sequence[str]) -> list[Embedding]:
        _check_texts(texts)
        matrix = self._vectorizer.transform(list(texts)).toarray()
        vectors = [np.asarray(row, dtype=np.float64) for row in matrix]
        for text, vector in zip(texts, vectors):
            if not np.any(vector):
                raise ZeroVector(f"text {text[:40]!r} embeds to the zero vector")
        return vectors


class FastEmbedEmbedder:
    """Sentence-transformer embeddings through fastembed (optional ``embeddings`` extra)."""

    def __init__(self, model_name: str = DEFAULT_FASTEMBED_MODEL, dimension: int = 384) -> None:
        self.model_name = model_name
        self.dimension = dimension
        self._encoder: Any | None = None

    def _load(self) -> Any:
        if self._encoder is None:
            try:
                from fastembed import TextEmbedding
            except ImportError as e:
                raise ProviderError("fastembed is not installed; install the 'embeddings' extra") from e
            logger.info(f"Loading embedding model {self.model_name}")
            try:
                self._encoder = TextEmbedding(model_name=self.model_name)
            except Exception as e:
                raise ProviderError(f"cannot load embedding model {self.model_name}: {e}") from e
        return self._encoder

    def embed(self, texts: Sequence[str]) -> list[Embedding]:
        _check_texts(texts)
        encoder = self._load()
        try:
            raw = list(encoder.embed(list(texts)))
        except Exception as e:
            raise ProviderError(f"embedding failed: {e}") from e

        vectors: list[Embedding] = []
        for text, row in zip(texts, raw):
            vector = np.asarray(row, dtype=np.float64)
            if vector.shape != (self.dimension,):
                raise DimensionMismatch(f"{self.model_name} returned {vector.shape}, expected ({self.dimension},)")
            norm = float(np.linalg.norm(vector))
            if norm == 0.0:
                raise ZeroVector(f"text {text[:40]!r} embeds to the zero vector")
            vectors.append(vector / norm)
        return vectors


def embed_one(embedder: Embedder, text: str) -> Embedding:
    return embedder.embed([text])[0]
