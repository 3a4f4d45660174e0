"""User taste distribution: rank-weighted aggregation and correlation scoring.

A refined ranking of the user's pool is collapsed into a single
distribution over attributes with linearly decaying rank weights
(earlier ranks count more, weights sum to one). Unseen items are scored
by the Pearson correlation between their own attribute distribution and
the user's; correlation is scale-free, so only the shape of a
distribution matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attributes import AttributeDistribution, AttributeModelBank, classify
from .catalog import Catalog
from .ranking import RankedList, make_ranked_list


@dataclass(frozen=True)
class UserAestheticDistribution:
    """A user's taste profile plus provenance of the ranking it came from."""

    dist: AttributeDistribution
    source_ranking_generation: int
    source_item_count: int

    def __post_init__(self) -> None:
        if self.source_item_count < 1:
            raise ValueError("source_item_count must be >= 1")


@dataclass(frozen=True)
class ScoredItem:
    id: str
    score: float
    test_dist: AttributeDistribution
    undefined_correlation: bool = False


def rank_weights(count: int) -> np.ndarray:
    """Linearly decaying positive weights (C - i + 1)/(C(C+1)/2), sum 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    raw = np.arange(count, 0, -1, dtype=np.float64)
    return raw / (count * (count + 1) / 2.0)


def build_user_distribution(
    ranking: RankedList, bank: AttributeModelBank, catalog: Catalog
) -> UserAestheticDistribution:
    """Aggregate the ranked items' distributions with rank-decay weights."""
    if len(ranking) == 0:
        raise ValueError("cannot build a taste distribution from an empty ranking")
    weights = rank_weights(len(ranking))
    acc = np.zeros(len(bank.attribute_names))
    for weight, (item_id, _) in zip(weights, ranking.entries):
        acc += weight * classify(bank, catalog.features_of(item_id)).probs
    dist = AttributeDistribution(attributes=bank.attribute_names, probs=acc)
    return UserAestheticDistribution(
        dist=dist,
        source_ranking_generation=ranking.generation,
        source_item_count=len(ranking),
    )


def pearson_correlation(u: np.ndarray, v: np.ndarray) -> float:
    """Pearson r of two equal-length vectors; NaN when either is constant."""
    uc = u - u.mean()
    vc = v - v.mean()
    nu = math.sqrt(float(uc @ uc))
    nv = math.sqrt(float(vc @ vc))
    if nu == 0.0 or nv == 0.0:
        return math.nan
    r = float(uc @ vc) / (nu * nv)
    return max(-1.0, min(1.0, r))


def score_against(
    usad: UserAestheticDistribution, test_dist: AttributeDistribution
) -> float:
    """Correlation between the taste profile and a test distribution.

    Returns NaN (the undefined-correlation outcome) when either vector is
    constant; ``rank_test_set`` maps that to score 0 with a flag.
    """
    if test_dist.attributes != usad.dist.attributes:
        raise ValueError("distributions cover different attribute vocabularies")
    return pearson_correlation(usad.dist.probs, test_dist.probs)


def score_test_items(
    usad: UserAestheticDistribution,
    bank: AttributeModelBank,
    catalog: Catalog,
    test_ids: Sequence[str],
) -> list[ScoredItem]:
    items = []
    for item_id in test_ids:
        dist = classify(bank, catalog.features_of(item_id))
        raw = score_against(usad, dist)
        undefined = math.isnan(raw)
        items.append(
            ScoredItem(
                id=item_id,
                score=0.0 if undefined else raw,
                test_dist=dist,
                undefined_correlation=undefined,
            )
        )
    return items


def rank_test_set(
    usad: UserAestheticDistribution,
    bank: AttributeModelBank,
    catalog: Catalog,
    test_ids: Sequence[str],
) -> RankedList:
    """Score every test item against the taste profile and rank descending."""
    scored = score_test_items(usad, bank, catalog, test_ids)
    return make_ranked_list(
        [s.id for s in scored],
        [s.score for s in scored],
        generation=usad.source_ranking_generation,
    )
