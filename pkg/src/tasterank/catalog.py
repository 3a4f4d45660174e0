"""Shared data model: catalog items, engine configuration, validation.

A catalog is an immutable collection of feature vectors plus an attribute
vocabulary. Features are z-scored per dimension at load time so that both
the margin-based ranker and nearest-neighbor retrieval see comparable
scales regardless of the upstream feature extractor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

# Default 18-attribute photographic style vocabulary. Smaller vocabularies
# (>= 2 names) are allowed for synthetic corpora.
DEFAULT_ATTRIBUTES: tuple[str, ...] = (
    "rule_of_thirds",
    "center_composition",
    "hrot",
    "sharpness",
    "pattern",
    "complementary_colors",
    "subordinate_colors",
    "cooperate_colors",
    "complexity",
    "tone",
    "use_of_light",
    "saturation",
    "image_size",
    "edge_composition",
    "global_texture",
    "sde",
    "hue_count",
    "depth_of_field",
)


class CatalogValidationError(ValueError):
    """Raised when raw items cannot form a valid catalog."""


class UnknownItemError(KeyError):
    """Raised when an item id is not present in the catalog."""

    def __str__(self) -> str:  # KeyError quotes its message by default
        return self.args[0] if self.args else ""


@dataclass(frozen=True)
class ItemRecord:
    """One catalog item: opaque id, feature vector, optional labels."""

    id: str
    features: np.ndarray
    attribute_labels: Optional[frozenset[str]] = None
    media_path: Optional[str] = None

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        object.__setattr__(self, "features", feats)


@dataclass(frozen=True)
class Catalog:
    """Immutable, standardized item collection.

    ``items`` are ordered as given; ``dim`` is the shared feature dimension;
    ``attribute_vocabulary`` names the attribute axes used by classifiers
    and taste distributions.
    """

    items: tuple[ItemRecord, ...]
    dim: int
    attribute_vocabulary: tuple[str, ...] = DEFAULT_ATTRIBUTES
    extractor: str = "unknown"
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self._index:
            object.__setattr__(
                self, "_index", {item.id: i for i, item in enumerate(self.items)}
            )

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._index

    def ids(self) -> list[str]:
        return [item.id for item in self.items]

    def get(self, item_id: str) -> ItemRecord:
        try:
            return self.items[self._index[item_id]]
        except KeyError:
            raise UnknownItemError(f"unknown item id: {item_id!r}") from None

    def features_of(self, item_id: str) -> np.ndarray:
        return self.get(item_id).features

    def feature_matrix(self, ids: Optional[Sequence[str]] = None) -> np.ndarray:
        """Stack features row-wise, whole catalog or the given ids."""
        if ids is None:
            return np.stack([item.features for item in self.items])
        return np.stack([self.features_of(i) for i in ids])


@dataclass(frozen=True)
class EngineConfig:
    """Knobs for one personalization run.

    ``m`` favorites seed the session, the shown rerank prefix has length
    ``k``, and at most ``max_iterations`` feedback rounds are accepted.
    ``neighbors_per_favorite`` defaults to ``m`` when left unset.
    """

    m: int = 5
    k: int = 5
    max_iterations: int = 3
    neighbors_per_favorite: Optional[int] = None
    distance_metric: str = "euclidean"
    tradeoff_c: float = 1.0
    solver_tolerance: float = 1e-6
    solver_max_epochs: int = 1000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.tradeoff_c <= 0:
            raise ValueError(f"tradeoff_c must be > 0, got {self.tradeoff_c}")
        if self.solver_tolerance <= 0:
            raise ValueError(
                f"solver_tolerance must be > 0, got {self.solver_tolerance}"
            )
        if self.solver_max_epochs < 1:
            raise ValueError(
                f"solver_max_epochs must be >= 1, got {self.solver_max_epochs}"
            )
        if self.distance_metric not in ("euclidean", "cosine"):
            raise ValueError(
                f"distance_metric must be 'euclidean' or 'cosine', "
                f"got {self.distance_metric!r}"
            )
        if self.neighbors_per_favorite is not None and self.neighbors_per_favorite < 1:
            raise ValueError("neighbors_per_favorite must be >= 1 when set")

    @property
    def fanout(self) -> int:
        return self.neighbors_per_favorite if self.neighbors_per_favorite else self.m

    def with_overrides(self, **kwargs) -> "EngineConfig":
        return replace(self, **kwargs)


def standardize(features: np.ndarray) -> np.ndarray:
    """Z-score each column; constant columns map to zero."""
    n = features.shape[0]
    mean = features.mean(axis=0)
    if n < 2:
        return np.zeros_like(features)
    std = features.std(axis=0, ddof=1)
    out = np.zeros_like(features)
    nonconst = std > 0
    out[:, nonconst] = (features[:, nonconst] - mean[nonconst]) / std[nonconst]
    return out


def validate_catalog(
    raw_items: Iterable[ItemRecord],
    attribute_vocabulary: Sequence[str] = DEFAULT_ATTRIBUTES,
    extractor: str = "unknown",
) -> Catalog:
    """Check raw items and build a standardized catalog.

    Rejects empty input, mismatched dimensions (naming the offending id),
    duplicate ids (naming both positions), and non-finite features.
    """
    items = list(raw_items)
    if not items:
        raise CatalogValidationError("catalog must contain at least one item")
    vocab = tuple(attribute_vocabulary)
    if len(vocab) < 2:
        raise CatalogValidationError(
            f"attribute vocabulary needs >= 2 names, got {len(vocab)}"
        )
    if len(set(vocab)) != len(vocab):
        raise CatalogValidationError("attribute vocabulary has duplicate names")

    dim = items[0].features.shape[0] if items[0].features.ndim == 1 else -1
    if items[0].features.ndim != 1 or dim < 1:
        raise CatalogValidationError(
            f"item {items[0].id!r}: features must be a 1-D vector of length >= 1"
        )
    seen: dict[str, int] = {}
    for pos, item in enumerate(items):
        if item.id in seen:
            raise CatalogValidationError(
                f"duplicate item id {item.id!r} at positions {seen[item.id]} and {pos}"
            )
        seen[item.id] = pos
        if item.features.ndim != 1 or item.features.shape[0] != dim:
            raise CatalogValidationError(
                f"item {item.id!r}: feature dimension "
                f"{item.features.shape} does not match catalog dimension {dim}"
            )
        if not np.all(np.isfinite(item.features)):
            raise CatalogValidationError(
                f"item {item.id!r}: features contain non-finite values"
            )
        if item.attribute_labels:
            stray = set(item.attribute_labels) - set(vocab)
            if stray:
                raise CatalogValidationError(
                    f"item {item.id!r}: labels {sorted(stray)} not in vocabulary"
                )

    matrix = np.stack([item.features for item in items])
    standardized = standardize(matrix)
    new_items = tuple(
        ItemRecord(
            id=item.id,
            features=standardized[i],
            attribute_labels=item.attribute_labels,
            media_path=item.media_path,
        )
        for i, item in enumerate(items)
    )
    return Catalog(
        items=new_items, dim=dim, attribute_vocabulary=vocab, extractor=extractor
    )
