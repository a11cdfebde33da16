"""Tests for k-means, silhouette and k selection against brute-force oracles."""

import math

import numpy as np
import pytest

from docgraph import clustering
from docgraph.clustering import SilhouetteReport, default_sweep, kmeans, select_k, silhouette
from docgraph.errors import BadK, BadRange, DimensionMismatch, SingleCluster

FOUR_CORNERS = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])


def partitions(n: int, k: int):
    """Every partition of range(n) into exactly k nonempty blocks, as label lists."""

    def grow(labels: list[int], used: int):
        if len(labels) == n:
            if used == k:
                yield list(labels)
            return
        if k - used > n - len(labels):
            return
        for label in range(min(used + 1, k)):
            yield from grow([*labels, label], max(used, label + 1))

    yield from grow([], 0)


def objective(x: np.ndarray, labels: list[int], k: int) -> float:
    labels_arr = np.asarray(labels)
    total = 0.0
    for j in range(k):
        members = x[labels_arr == j]
        total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


def silhouette_by_definition(x: np.ndarray, labels: list[int]) -> list[float]:
    scores = []
    for i in range(len(x)):
        own = [j for j in range(len(x)) if labels[j] == labels[i] and j != i]
        if not own:
            scores.append(0.0)
            continue
        a = sum(math.dist(x[i], x[j]) for j in own) / len(own)
        b = min(
            sum(math.dist(x[i], x[j]) for j in range(len(x)) if labels[j] == c) / labels.count(c)
            for c in set(labels)
            if c != labels[i]
        )
        scores.append((b - a) / max(a, b))
    return scores


def blobs(seed: int, centers: list[tuple[float, float]], per_blob: int = 20, sigma: float = 0.05):
    rng = np.random.default_rng(seed)
    points = np.vstack([rng.normal(loc=c, scale=sigma, size=(per_blob, 2)) for c in centers])
    truth = [i for i in range(len(centers)) for _ in range(per_blob)]
    return points, truth


def same_partition(a, b) -> bool:
    return {frozenset(i for i, x in enumerate(a) if x == c) for c in set(a)} == {
        frozenset(i for i, x in enumerate(b) if x == c) for c in set(b)
    }


class TestKMeans:
    def test_four_corners(self):
        partition = kmeans(FOUR_CORNERS, 2, seed=0)

        assert partition.assignments == (0, 0, 1, 1)
        np.testing.assert_allclose(partition.centroids, [[0.0, 0.5], [10.0, 0.5]])
        assert partition.objective == pytest.approx(1.0)

    def test_k_equals_n(self):
        partition = kmeans(FOUR_CORNERS, 4)
        assert sorted(partition.assignments) == [0, 1, 2, 3]
        assert partition.objective == 0.0

    def test_k_equals_one(self):
        partition = kmeans(FOUR_CORNERS, 1)
        assert partition.assignments == (0, 0, 0, 0)
        np.testing.assert_allclose(partition.centroids[0], FOUR_CORNERS.mean(axis=0))

    @pytest.mark.parametrize("k", [0, 5])
    def test_bad_k(self, k):
        with pytest.raises(BadK):
            kmeans(FOUR_CORNERS, k)

    def test_ragged_points(self):
        with pytest.raises(DimensionMismatch):
            kmeans([[0.0, 1.0], [1.0]], 1)

    def test_matches_exhaustive_optimum(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(1, 4))
            k = int(rng.integers(1, min(3, n) + 1))
            x = rng.normal(size=(n, d))

            best = min(objective(x, labels, k) for labels in partitions(n, k))
            partition = kmeans(x, k, seed=int(rng.integers(0, 1000)), restarts=10)

            assert partition.objective == pytest.approx(best, rel=1e-9, abs=1e-12)
            assert partition.objective == pytest.approx(objective(x, list(partition.assignments), k), rel=1e-6)
            assert set(partition.assignments) == set(range(k))

    def test_is_deterministic(self):
        x, _ = blobs(3, [(0, 0), (5, 5), (10, 0)])
        assert kmeans(x, 3, seed=11).assignments == kmeans(x, 3, seed=11).assignments


class TestSilhouette:
    def test_four_corners(self):
        report = silhouette(FOUR_CORNERS, [0, 0, 1, 1])

        b = (10 + math.sqrt(101)) / 2
        expected = (b - 1) / b
        assert report.per_point == pytest.approx([expected] * 4, abs=1e-9)
        assert report.mean == pytest.approx(expected, abs=1e-9)
        assert report.k == 2

    def test_equidistant_point_scores_zero(self):
        x = np.array([[0.0], [2.0], [4.0]])
        report = silhouette(x, [0, 0, 1])
        # point 1 is 2 away from its own cluster and from the other one
        assert report.per_point[1] == pytest.approx(0.0)

    def test_all_singletons(self):
        report = silhouette(FOUR_CORNERS, [0, 1, 2, 3])
        assert report.per_point == (0.0, 0.0, 0.0, 0.0)
        assert report.mean == 0.0

    def test_single_cluster(self):
        with pytest.raises(SingleCluster):
            silhouette(FOUR_CORNERS, [0, 0, 0, 0])

    def test_matches_definition(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(3, 51))
            k = int(rng.integers(2, min(6, n) + 1))
            x = rng.normal(size=(n, int(rng.integers(1, 5))))
            labels = [int(v) for v in rng.integers(0, k, size=n)]
            if len(set(labels)) < 2:
                labels[0], labels[1] = 0, 1

            report = silhouette(x, labels)

            expected = silhouette_by_definition(x, labels)
            assert report.per_point == pytest.approx(expected, abs=1e-9)
            assert report.mean == pytest.approx(sum(expected) / n, abs=1e-9)
            assert all(-1.0 <= s <= 1.0 for s in report.per_point)


class TestSelectK:
    def test_four_corners_prefers_two(self):
        selection = select_k(FOUR_CORNERS, 2, 3, seed=0)

        assert selection.best_k == 2
        assert selection.scores[2] > selection.scores[3]

    def test_bad_range(self):
        with pytest.raises(BadRange):
            select_k(FOUR_CORNERS, 2, 1)
        with pytest.raises(BadRange):
            select_k(FOUR_CORNERS, 2, 4)

    def test_ties_go_to_smaller_k(self, monkeypatch):
        def flat(points, assignments):
            k = len(set(assignments))
            return SilhouetteReport(per_point=(0.5,) * len(assignments), mean=0.5, k=k)

        monkeypatch.setattr(clustering, "silhouette", flat)
        x, _ = blobs(0, [(0, 0), (6, 0), (0, 6)])

        selection = select_k(x, 3, 6)

        assert selection.best_k == 3
        assert set(selection.scores) == {3, 4, 5, 6}

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "centers",
        [
            [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)],
            [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0), (6.0, 6.0), (12.0, 0.0)],
        ],
    )
    def test_recovers_planted_blobs(self, centers):
        for seed in range(20):
            x, truth = blobs(seed, centers)

            selection = select_k(x, 2, 8, seed=seed)

            assert selection.best_k == len(centers)
            assert same_partition(selection.partition.assignments, truth)
            assert selection.scores[len(centers)] == max(selection.scores.values())

    def test_is_deterministic(self):
        x, _ = blobs(5, [(0, 0), (6, 0), (0, 6)])
        assert select_k(x, 2, 5, seed=3).scores == select_k(x, 2, 5, seed=3).scores


def test_default_sweep():
    assert default_sweep(13) == (2, 8)
    assert default_sweep(4) == (2, 3)
