"""Exact nearest-neighbor retrieval used to grow the per-user training pool.

Brute-force scan; at desk scale (<= 1e5 items) exactness is cheap and the
results are reproducible bit for bit. Distance ties break on item id so
catalog storage order never matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .catalog import Catalog, EngineConfig, UnknownItemError


@dataclass(frozen=True)
class RetrievalResult:
    """Neighbors of one favorite, nearest first."""

    favorite_id: str
    neighbor_ids: tuple[str, ...]
    distances: tuple[float, ...]


def _pairwise_distances(
    matrix: np.ndarray, query: np.ndarray, metric: str
) -> np.ndarray:
    if metric == "euclidean":
        return np.linalg.norm(matrix - query, axis=1)
    # cosine: 1 - similarity; zero vectors get similarity 0
    qn = np.linalg.norm(query)
    norms = np.linalg.norm(matrix, axis=1)
    dots = matrix @ query
    denom = norms * qn
    sims = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    return 1.0 - sims


def retrieve_neighbors(
    catalog: Catalog,
    favorite_ids: Sequence[str],
    cfg: EngineConfig,
    candidate_ids: Optional[Sequence[str]] = None,
) -> list[RetrievalResult]:
    """Find the nearest catalog items to each favorite.

    ``candidate_ids`` optionally restricts the searched items (held-out
    evaluation splits use this); favorites themselves are never returned
    as their own neighbors.
    """
    if len(catalog) < 2:
        raise ValueError("catalog must contain at least 2 items for retrieval")
    if len(set(favorite_ids)) != len(favorite_ids):
        raise ValueError("favorite ids must be distinct")
    for fav in favorite_ids:
        if fav not in catalog:
            raise UnknownItemError(f"unknown favorite id: {fav!r}")

    if candidate_ids is None:
        pool_ids = list(catalog.ids())
    else:
        pool_ids = list(candidate_ids)
        for cid in pool_ids:
            if cid not in catalog:
                raise UnknownItemError(f"unknown candidate id: {cid!r}")
    matrix = catalog.feature_matrix(pool_ids)
    id_array = np.array(pool_ids)

    results = []
    for fav in favorite_ids:
        query = catalog.features_of(fav)
        dists = _pairwise_distances(matrix, query, cfg.distance_metric)
        mask = id_array != fav
        order = np.lexsort((id_array[mask], dists[mask]))
        take = order[: cfg.fanout]
        results.append(
            RetrievalResult(
                favorite_id=fav,
                neighbor_ids=tuple(id_array[mask][take]),
                distances=tuple(float(d) for d in dists[mask][take]),
            )
        )
    return results


def build_training_pool(
    results: Sequence[RetrievalResult], favorite_ids: Sequence[str]
) -> list[str]:
    """Union favorites with retrieved neighbors, favorites first.

    Order encodes generation-0 preference: favorites in user-given order,
    then neighbors in retrieval order, first occurrence wins.
    """
    if not results:
        raise ValueError("retrieval results must be non-empty")
    pool: list[str] = []
    seen: set[str] = set()
    for fav in favorite_ids:
        if fav not in seen:
            pool.append(fav)
            seen.add(fav)
    for result in results:
        for nb in result.neighbor_ids:
            if nb not in seen:
                pool.append(nb)
                seen.add(nb)
    return pool
