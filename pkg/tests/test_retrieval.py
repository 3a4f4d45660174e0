import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tasterank import (
    EngineConfig,
    ItemRecord,
    UnknownItemError,
    build_training_pool,
    retrieve_neighbors,
    validate_catalog,
)
from tasterank.retrieval import RetrievalResult


def line_catalog():
    items = [
        ItemRecord(id="A", features=np.array([0.0])),
        ItemRecord(id="B", features=np.array([1.0])),
        ItemRecord(id="C", features=np.array([10.0])),
    ]
    return validate_catalog(items)


def random_catalog(n, dim, seed, prefix="r"):
    rng = np.random.default_rng(seed)
    items = [
        ItemRecord(id=f"{prefix}{i:03d}", features=rng.normal(size=dim))
        for i in range(n)
    ]
    return validate_catalog(items)


def brute_force_neighbors(catalog, favorite, metric, fanout):
    """Independent oracle: full sort of all pairwise distances."""
    query = catalog.features_of(favorite)
    rows = []
    for item in catalog.items:
        if item.id == favorite:
            continue
        if metric == "euclidean":
            dist = float(np.linalg.norm(item.features - query))
        else:
            denom = np.linalg.norm(item.features) * np.linalg.norm(query)
            sim = float(item.features @ query / denom) if denom > 0 else 0.0
            dist = 1.0 - sim
        rows.append((dist, item.id))
    rows.sort()
    return [item_id for _, item_id in rows[:fanout]]


class TestRetrieveNeighbors:
    def test_nearest_on_a_line(self):
        cfg = EngineConfig(m=1, neighbors_per_favorite=1)
        [result] = retrieve_neighbors(line_catalog(), ["A"], cfg)
        assert result.neighbor_ids == ("B",)

    def test_fanout_beyond_catalog_returns_all_others(self):
        cfg = EngineConfig(m=1, neighbors_per_favorite=50)
        [result] = retrieve_neighbors(line_catalog(), ["B"], cfg)
        assert set(result.neighbor_ids) == {"A", "C"}
        assert list(result.distances) == sorted(result.distances)

    @pytest.mark.parametrize("metric", ["euclidean", "cosine"])
    def test_matches_brute_force_sort(self, metric):
        catalog = random_catalog(50, 6, seed=11)
        cfg = EngineConfig(m=1, neighbors_per_favorite=7, distance_metric=metric)
        for favorite in ["r000", "r013", "r049"]:
            [result] = retrieve_neighbors(catalog, [favorite], cfg)
            expected = brute_force_neighbors(catalog, favorite, metric, 7)
            assert list(result.neighbor_ids) == expected

    def test_full_fanout_reproduces_complete_ranking(self):
        catalog = random_catalog(30, 4, seed=5)
        cfg = EngineConfig(m=1, neighbors_per_favorite=29)
        for favorite in catalog.ids():
            [result] = retrieve_neighbors(catalog, [favorite], cfg)
            assert list(result.neighbor_ids) == brute_force_neighbors(
                catalog, favorite, "euclidean", 29
            )

    def test_storage_order_is_irrelevant(self):
        from tasterank import Catalog

        catalog = random_catalog(40, 5, seed=3, prefix="x")
        cfg = EngineConfig(m=2, neighbors_per_favorite=6)
        baseline = retrieve_neighbors(catalog, ["x003", "x031"], cfg)
        shuffled = list(catalog.items)
        np.random.default_rng(3).shuffle(shuffled)
        permuted_catalog = Catalog(
            items=tuple(shuffled),
            dim=catalog.dim,
            attribute_vocabulary=catalog.attribute_vocabulary,
        )
        permuted = retrieve_neighbors(permuted_catalog, ["x003", "x031"], cfg)
        assert baseline == permuted

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_never_contains_own_favorite(self, seed):
        catalog = random_catalog(20, 3, seed=seed)
        cfg = EngineConfig(m=1, neighbors_per_favorite=19)
        favorite = catalog.ids()[seed % 20]
        [result] = retrieve_neighbors(catalog, [favorite], cfg)
        assert favorite not in result.neighbor_ids
        assert list(result.distances) == sorted(result.distances)

    def test_unknown_favorite(self):
        with pytest.raises(UnknownItemError, match="nope"):
            retrieve_neighbors(line_catalog(), ["nope"], EngineConfig(m=1))

    def test_catalog_too_small(self):
        catalog = validate_catalog([ItemRecord(id="solo", features=np.array([1.0]))])
        with pytest.raises(ValueError, match="at least 2"):
            retrieve_neighbors(catalog, ["solo"], EngineConfig(m=1))

    def test_duplicate_favorites_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            retrieve_neighbors(line_catalog(), ["A", "A"], EngineConfig(m=2))

    def test_candidate_restriction(self):
        catalog = line_catalog()
        cfg = EngineConfig(m=1, neighbors_per_favorite=2)
        [result] = retrieve_neighbors(catalog, ["A"], cfg, candidate_ids=["A", "C"])
        assert result.neighbor_ids == ("C",)


class TestBuildTrainingPool:
    def test_disjoint_union(self):
        results = [RetrievalResult("A", ("B", "C"), (0.1, 0.2))]
        assert build_training_pool(results, ["A"]) == ["A", "B", "C"]

    def test_dedup_keeps_first_occurrence(self):
        results = [
            RetrievalResult("A", ("B", "C"), (0.1, 0.2)),
            RetrievalResult("B", ("A", "C"), (0.1, 0.2)),
        ]
        assert build_training_pool(results, ["A", "B"]) == ["A", "B", "C"]

    def test_empty_results_rejected(self):
        with pytest.raises(ValueError):
            build_training_pool([], ["A"])

    def test_pool_size_against_set_union_oracle(self):
        catalog = random_catalog(100, 8, seed=23)
        favorites = ["r000", "r020", "r040", "r060", "r080"]
        cfg = EngineConfig(m=5, neighbors_per_favorite=5)
        results = retrieve_neighbors(catalog, favorites, cfg)
        pool = build_training_pool(results, favorites)
        oracle = set(favorites)
        for result in results:
            oracle |= set(result.neighbor_ids)
        assert set(pool) == oracle
        assert 5 <= len(pool) <= 30
        assert pool[:5] == favorites
