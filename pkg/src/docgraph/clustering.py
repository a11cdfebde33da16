"""k-means over embeddings and silhouette-based choice of k."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
import math
import warnings

from loguru import logger
import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import silhouette_samples

from .errors import BadK, BadRange, DimensionMismatch, SingleCluster

MAX_ITER = 300
DEFAULT_RESTARTS = 10


@dataclass(frozen=True)
class ClusterPartition:
    assignments: tuple[int, ...]
    centroids: NDArray[np.float64]
    objective: float
    k: int

    def clusters(self) -> list[list[int]]:
        """Member indices per cluster, in cluster-index order."""
        members: list[list[int]] = [[] for _ in range(self.k)]
        for i, label in enumerate(self.assignments):
            members[label].append(i)
        return members


@dataclass(frozen=True)
class SilhouetteReport:
    per_point: tuple[float, ...]
    mean: float
    k: int


@dataclass(frozen=True)
class KSelection:
    best_k: int
    partition: ClusterPartition
    report: SilhouetteReport
    scores: dict[int, float] = field(default_factory=dict)


def as_matrix(points: Sequence[ArrayLike] | NDArray[np.float64]) -> NDArray[np.float64]:
    """Stack points into an (N, D) float matrix, rejecting ragged input."""
    rows = [np.asarray(p, dtype=np.float64).ravel() for p in points]
    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    dims = {row.shape[0] for row in rows}
    if len(dims) != 1:
        raise DimensionMismatch(f"points have mixed dimensions {sorted(dims)}")
    return np.vstack(rows)


def sse(x: NDArray[np.float64], labels: NDArray[np.int_], k: int) -> tuple[NDArray[np.float64], float]:
    """Centroids and the sum of squared distances of points to their cluster centroid."""
    centroids = np.vstack([x[labels == j].mean(axis=0) for j in range(k)])
    return centroids, float(((x - centroids[labels]) ** 2).sum())


def _repair_empty(x: NDArray[np.float64], labels: NDArray[np.int_], k: int) -> NDArray[np.int_]:
    labels = labels.copy()
    while True:
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return labels
        centroids = np.vstack([x[labels == j].mean(axis=0) if counts[j] else np.zeros(x.shape[1]) for j in range(k)])
        dist = ((x - centroids[labels]) ** 2).sum(axis=1)
        dist[counts[labels] < 2] = -1.0
        donor = int(np.argmax(dist))
        labels[donor] = int(empty[0])


def _transfer_refine(x: NDArray[np.float64], labels: NDArray[np.int_], k: int) -> NDArray[np.int_]:
    """Move single points between clusters while that strictly lowers the objective."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    centroids = np.vstack([x[labels == j].mean(axis=0) for j in range(k)])
    improved = True
    while improved:
        improved = False
        for i in range(x.shape[0]):
            src = labels[i]
            if counts[src] < 2:
                continue
            d2 = ((centroids - x[i]) ** 2).sum(axis=1)
            removal = counts[src] / (counts[src] - 1) * d2[src]
            addition = counts / (counts + 1) * d2
            addition[src] = np.inf
            dst = int(np.argmin(addition))
            if addition[dst] < removal - 1e-12:
                centroids[src] = (centroids[src] * counts[src] - x[i]) / (counts[src] - 1)
                centroids[dst] = (centroids[dst] * counts[dst] + x[i]) / (counts[dst] + 1)
                counts[src] -= 1
                counts[dst] += 1
                labels[i] = dst
                improved = True
    return labels


def _canonical_labels(labels: NDArray[np.int_]) -> NDArray[np.int_]:
    """Renumber clusters in order of first appearance."""
    mapping: dict[int, int] = {}
    for label in labels:
        mapping.setdefault(int(label), len(mapping))
    return np.array([mapping[int(label)] for label in labels], dtype=np.int_)


def kmeans(
    points: Sequence[ArrayLike] | NDArray[np.float64],
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusterPartition:
    """Partition `points` into k clusters minimizing the within-cluster sum of squares.

    Runs Lloyd's algorithm from k-means++ seeds (best of `restarts`), repairs any
    empty cluster with the point farthest from its centroid, then applies
    single-point transfers until none lowers the objective.
    """
    x = as_matrix(points)
    n = x.shape[0]
    if k < 1 or k > n:
        raise BadK(f"k={k} is outside [1, {n}]")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    if k == n:
        labels = np.arange(n, dtype=np.int_)
    elif k == 1:
        labels = np.zeros(n, dtype=np.int_)
    else:
        model = KMeans(
            n_clusters=k,
            init="k-means++",
            n_init=restarts,
            max_iter=MAX_ITER,
            tol=0.0,
            random_state=seed,
            algorithm="lloyd",
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            labels = model.fit_predict(x).astype(np.int_)
        labels = _transfer_refine(x, _repair_empty(x, labels, k), k)

    labels = _canonical_labels(labels)
    centroids, objective = sse(x, labels, k)
    return ClusterPartition(assignments=tuple(int(v) for v in labels), centroids=centroids, objective=objective, k=k)


def silhouette(points: Sequence[ArrayLike] | NDArray[np.float64], assignments: Sequence[int]) -> SilhouetteReport:
    """Per-point silhouette coefficients on Euclidean distance; singletons score 0."""
    x = as_matrix(points)
    labels = np.asarray(assignments, dtype=np.int_)
    if labels.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"{labels.shape[0]} assignments for {x.shape[0]} points")
    k = len(set(labels.tolist()))
    if k < 2:
        raise SingleCluster("silhouette needs at least two clusters")

    if k == x.shape[0]:
        per_point = np.zeros(x.shape[0], dtype=np.float64)
    else:
        per_point = silhouette_samples(x, labels, metric="euclidean")
    values = tuple(float(v) for v in per_point)
    return SilhouetteReport(per_point=values, mean=float(np.mean(per_point)), k=k)


def default_sweep(n: int) -> tuple[int, int]:
    """k range [2, min(ceil(sqrt(n)) * 2, n - 1)]."""
    return 2, min(math.ceil(math.sqrt(n)) * 2, n - 1)


def select_k(
    points: Sequence[ArrayLike] | NDArray[np.float64],
    k_min: int,
    k_max: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> KSelection:
    """The k in [k_min, k_max] with the highest mean silhouette; ties go to the smaller k."""
    x = as_matrix(points)
    n = x.shape[0]
    if not 2 <= k_min <= k_max <= n - 1:
        raise BadRange(f"k range [{k_min}, {k_max}] is invalid for {n} points")

    best: tuple[ClusterPartition, SilhouetteReport] | None = None
    scores: dict[int, float] = {}
    for k in range(k_min, k_max + 1):
        partition = kmeans(x, k, seed=seed, restarts=restarts)
        report = silhouette(x, partition.assignments)
        scores[k] = report.mean
        logger.debug(f"k={k}: objective={partition.objective:.6f} silhouette={report.mean:.6f}")
        if best is None or report.mean > best[1].mean:
            best = (partition, report)

    assert best is not None
    return KSelection(best_k=best[0].k, partition=best[0], report=best[1], scores=scores)
