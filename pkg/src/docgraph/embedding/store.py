"""Exact in-memory vector store with cosine-distance retrieval."""

from __future__ import annotations

from collections.abc import Sequence
import math
from pathlib import Path
import threading
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import DimensionMismatch, DuplicateId, ZeroVector
from ..utils.jsonl import read_jsonl, write_jsonl
from .providers import Embedding


class SearchHit(NamedTuple):
    id: str
    value: str
    distance: float


class StoreEntry(BaseModel):
    """One persisted line of a store dump."""

    model_config = ConfigDict(frozen=True)

    id: str
    value: str
    vector: list[float]


def cosine_distance(u: Embedding, v: Embedding) -> float:
    """1 - cos(u, v), clamped to [0, 2]."""
    similarity = float(np.dot(u, v)) / (float(np.linalg.norm(u)) * float(np.linalg.norm(v)))
    return min(2.0, max(0.0, 1.0 - similarity))


def _as_vector(key: Sequence[float] | Embedding, dimension: int) -> Embedding:
    vector = np.asarray(key, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != dimension:
        raise DimensionMismatch(f"expected a vector of dimension {dimension}, got shape {vector.shape}")
    norm = float(np.linalg.norm(vector))
    if norm == 0.0 or not math.isfinite(norm):
        raise ZeroVector("vector has zero (or non-finite) norm")
    return vector


class VectorStore:
    """Summaries keyed by their embeddings, searched by exhaustive linear scan.

    Inserts are serialized; searches see a consistent snapshot of the entries.
    Ties in distance are returned in insertion order.
    """

    def __init__(self, dimension: int) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self._ids: list[str] = []
        self._values: list[str] = []
        self._vectors: list[Embedding] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._ids)

    def __contains__(self, id_: object) -> bool:
        with self._lock:
            return id_ in self._ids

    @property
    def ids(self) -> list[str]:
        with self._lock:
            return list(self._ids)

    def insert(self, id_: str, value: str, key: Sequence[float] | Embedding) -> None:
        vector = _as_vector(key, self.dimension)
        with self._lock:
            if id_ in self._ids:
                raise DuplicateId(f"id {id_!r} is already stored")
            self._ids.append(id_)
            self._values.append(value)
            self._vectors.append(vector)

    def top_k(self, query: Sequence[float] | Embedding, k: int) -> list[SearchHit]:
        """The min(k, len) nearest entries by ascending cosine distance; an empty store yields []."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = _as_vector(query, self.dimension)
        with self._lock:
            ids, values, vectors = list(self._ids), list(self._values), list(self._vectors)
        distances = [cosine_distance(q, v) for v in vectors]
        ranked = sorted(range(len(ids)), key=lambda i: (distances[i], i))
        return [SearchHit(ids[i], values[i], distances[i]) for i in ranked[:k]]

    def entries(self) -> list[StoreEntry]:
        with self._lock:
            return [
                StoreEntry(id=i, value=v, vector=[float(x) for x in vec])
                for i, v, vec in zip(self._ids, self._values, self._vectors)
            ]

    def dump_jsonl(self, path: Path) -> None:
        write_jsonl(path, self.entries())

    @classmethod
    def load_jsonl(cls, path: Path, dimension: int) -> VectorStore:
        store = cls(dimension)
        for entry in read_jsonl(path, StoreEntry):
            store.insert(entry.id, entry.value, entry.vector)
        return store
