"""Catalog ingestion, synthetic corpus generation, toy features, persistence.

File formats
------------
JSONL catalogs: optional first line ``#usar-catalog v1 extractor=<name>``
declaring feature provenance, then one object per line with keys ``id``,
``features`` and optional ``attributes`` / ``media_path``.

CSV catalogs: header ``id,f0,f1,...,fn[,attributes]`` where the attributes
column is a ``;``-separated label list.

All writes are atomic (temp file + rename in the target directory).
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .attributes import AttributeModelBank, AttributeDistribution
from .catalog import (
    DEFAULT_ATTRIBUTES,
    Catalog,
    CatalogValidationError,
    EngineConfig,
    ItemRecord,
    validate_catalog,
)
from .ranking import RankingModel
from .session import Session
from .taste import UserAestheticDistribution

CATALOG_HEADER_PREFIX = "#usar-catalog v1"


class CatalogParseError(ValueError):
    """Raised when a catalog file cannot be parsed; names the line."""


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_header(line: str) -> str:
    extractor = "unknown"
    for token in line[len(CATALOG_HEADER_PREFIX):].split():
        if token.startswith("extractor="):
            extractor = token.split("=", 1)[1]
    return extractor


def load_catalog(
    path: str | Path,
    format: Optional[str] = None,
    attribute_vocabulary: Optional[Sequence[str]] = None,
) -> Catalog:
    """Load and validate a catalog file (jsonl or csv, inferred from suffix).

    Vocabulary resolution: an explicit ``attribute_vocabulary`` argument
    wins, then a JSONL ``#attributes`` header, then the labels actually
    used (kept in default-vocabulary order), then the full default set.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"catalog file not found: {path}")
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "jsonl":
        items, extractor, header_vocab = _read_jsonl(path)
    elif fmt == "csv":
        items, extractor, header_vocab = _read_csv(path)
    else:
        raise ValueError(f"unknown catalog format: {fmt!r}")
    if attribute_vocabulary is not None:
        vocab = tuple(attribute_vocabulary)
    elif header_vocab is not None:
        vocab = header_vocab
    else:
        vocab = _infer_vocabulary(items)
    return validate_catalog(items, attribute_vocabulary=vocab, extractor=extractor)


def _infer_vocabulary(items: Sequence[ItemRecord]) -> tuple[str, ...]:
    used: set[str] = set()
    for item in items:
        if item.attribute_labels:
            used |= set(item.attribute_labels)
    if len(used) < 2:
        return DEFAULT_ATTRIBUTES
    known = [name for name in DEFAULT_ATTRIBUTES if name in used]
    extra = sorted(used - set(DEFAULT_ATTRIBUTES))
    return tuple(known + extra)


def _read_jsonl(path: Path) -> tuple[list[ItemRecord], str, Optional[tuple[str, ...]]]:
    items: list[ItemRecord] = []
    extractor = "unknown"
    header_vocab: Optional[tuple[str, ...]] = None
    with path.open() as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if lineno == 1 and line.startswith(CATALOG_HEADER_PREFIX):
                    extractor = _parse_header(line)
                elif line.startswith("#attributes "):
                    names = [p for p in line[len("#attributes "):].split(";") if p]
                    if names:
                        header_vocab = tuple(names)
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CatalogParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            try:
                items.append(
                    ItemRecord(
                        id=str(obj["id"]),
                        features=np.asarray(obj["features"], dtype=np.float64),
                        attribute_labels=(
                            frozenset(obj["attributes"]) if obj.get("attributes") else None
                        ),
                        media_path=obj.get("media_path"),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CatalogParseError(f"{path}:{lineno}: bad record: {exc}") from None
    return items, extractor, header_vocab


def _read_csv(path: Path) -> tuple[list[ItemRecord], str, None]:
    items: list[ItemRecord] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CatalogParseError(f"{path}:1: empty csv file") from None
        if not header or header[0] != "id":
            raise CatalogParseError(f"{path}:1: csv header must start with 'id'")
        has_attrs = header[-1] == "attributes"
        n_features = len(header) - 1 - (1 if has_attrs else 0)
        if n_features < 1:
            raise CatalogParseError(f"{path}:1: csv header declares no feature columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CatalogParseError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                features = np.array(
                    [float(v) for v in row[1 : 1 + n_features]], dtype=np.float64
                )
            except ValueError as exc:
                raise CatalogParseError(f"{path}:{lineno}: bad feature value: {exc}") from None
            labels = None
            if has_attrs and row[-1]:
                labels = frozenset(part for part in row[-1].split(";") if part)
            items.append(ItemRecord(id=row[0], features=features, attribute_labels=labels))
    return items, "unknown", None


def save_catalog(catalog: Catalog, path: str | Path, format: Optional[str] = None) -> None:
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "jsonl":
        out = io.StringIO()
        out.write(f"{CATALOG_HEADER_PREFIX} extractor={catalog.extractor}\n")
        out.write(f"#attributes {';'.join(catalog.attribute_vocabulary)}\n")
        for item in catalog.items:
            record = {"id": item.id, "features": [float(v) for v in item.features]}
            if item.attribute_labels:
                record["attributes"] = sorted(item.attribute_labels)
            if item.media_path:
                record["media_path"] = item.media_path
            out.write(json.dumps(record) + "\n")
        _atomic_write(path, out.getvalue())
    elif fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(
            ["id"] + [f"f{i}" for i in range(catalog.dim)] + ["attributes"]
        )
        for item in catalog.items:
            labels = ";".join(sorted(item.attribute_labels)) if item.attribute_labels else ""
            writer.writerow([item.id] + [repr(float(v)) for v in item.features] + [labels])
        _atomic_write(path, out.getvalue())
    else:
        raise ValueError(f"unknown catalog format: {fmt!r}")


def generate_synthetic(
    n_items: int,
    dim: int,
    n_attribute_clusters: int,
    seed: int,
    separation: float = 5.0,
    cluster_std: float = 1.0,
    attribute_names: Optional[Sequence[str]] = None,
) -> Catalog:
    """Seeded corpus with planted attribute structure.

    One unit-direction center per attribute (scaled by ``separation``),
    items assigned round-robin and drawn around their center with
    ``cluster_std`` noise, labels reassigned to the nearest center. The
    same spec always generates the same catalog.
    """
    if n_attribute_clusters < 2:
        raise ValueError("need at least 2 attribute clusters")
    if n_items < 2 * n_attribute_clusters:
        raise ValueError(
            f"n_items={n_items} too small for {n_attribute_clusters} clusters "
            f"(need >= {2 * n_attribute_clusters})"
        )
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if attribute_names is None:
        if n_attribute_clusters <= len(DEFAULT_ATTRIBUTES):
            attribute_names = DEFAULT_ATTRIBUTES[:n_attribute_clusters]
        else:
            attribute_names = tuple(
                f"attr_{i:02d}" for i in range(n_attribute_clusters)
            )
    elif len(attribute_names) != n_attribute_clusters:
        raise ValueError("attribute_names length must equal n_attribute_clusters")

    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n_attribute_clusters, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= separation

    assignment = np.arange(n_items) % n_attribute_clusters
    rng.shuffle(assignment)
    features = centers[assignment] + cluster_std * rng.normal(size=(n_items, dim))
    nearest = (
        ((features[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2).argmin(axis=1)
    )

    digits = max(3, len(str(n_items - 1)))
    items = [
        ItemRecord(
            id=f"item-{i:0{digits}d}",
            features=features[i],
            attribute_labels=frozenset({attribute_names[nearest[i]]}),
        )
        for i in range(n_items)
    ]
    return validate_catalog(
        items, attribute_vocabulary=attribute_names, extractor="synthetic-v1"
    )


TOY_FEATURE_DIM = 32
TOY_EXTRACTOR_NAME = "toy-v1"


def extract_toy_features(image_path: str | Path) -> np.ndarray:
    """Small color/composition descriptor for demo catalogs (dim 32).

    Layout: 8-bin histogram per RGB channel (24), mean luminance (1),
    luminance variance (1), gradient energy over row thirds (3) and
    column thirds (3). Values derive from pixels scaled to [0, 1].
    """
    from PIL import Image, UnidentifiedImageError

    path = Path(image_path)
    try:
        with Image.open(path) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"cannot decode image {path}: {exc}") from None

    parts = []
    for channel in range(3):
        hist, _ = np.histogram(rgb[:, :, channel], bins=8, range=(0.0, 1.0))
        parts.append(hist / rgb[:, :, channel].size)
    lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    parts.append([lum.mean(), lum.var()])

    gy, gx = np.gradient(lum)
    energy = gx**2 + gy**2
    h = energy.shape[0]
    w = energy.shape[1]
    row_thirds = [energy[i * h // 3 : (i + 1) * h // 3, :].mean() for i in range(3)]
    col_thirds = [energy[:, j * w // 3 : (j + 1) * w // 3].mean() for j in range(3)]
    parts.append(row_thirds)
    parts.append(col_thirds)
    return np.concatenate([np.asarray(p, dtype=np.float64).ravel() for p in parts])


def config_fingerprint(cfg: EngineConfig) -> str:
    payload = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def save_model(model: RankingModel, cfg: EngineConfig, path: str | Path) -> None:
    payload = {
        "weights": [float(v) for v in model.weights],
        "objective": model.objective_value,
        "epochs": model.epochs_run,
        "converged": model.converged,
        "config_fingerprint": config_fingerprint(cfg),
    }
    _atomic_write(Path(path), json.dumps(payload, indent=2) + "\n")


def load_model(path: str | Path) -> tuple[RankingModel, str]:
    with Path(path).open() as handle:
        payload = json.load(handle)
    model = RankingModel(
        weights=np.asarray(payload["weights"], dtype=np.float64),
        objective_value=float(payload["objective"]),
        epochs_run=int(payload["epochs"]),
        converged=bool(payload["converged"]),
    )
    return model, payload["config_fingerprint"]


def save_bank(bank: AttributeModelBank, path: str | Path) -> None:
    payload = {
        "attributes": list(bank.attribute_names),
        "weights": [[float(v) for v in row] for row in bank.weights],
        "intercepts": [float(v) for v in bank.intercepts],
    }
    _atomic_write(Path(path), json.dumps(payload, indent=2) + "\n")


def load_bank(path: str | Path) -> AttributeModelBank:
    with Path(path).open() as handle:
        payload = json.load(handle)
    return AttributeModelBank(
        attribute_names=tuple(payload["attributes"]),
        weights=np.asarray(payload["weights"], dtype=np.float64),
        intercepts=np.asarray(payload["intercepts"], dtype=np.float64),
    )


def save_usad(usad: UserAestheticDistribution, path: str | Path) -> None:
    payload = {
        "attributes": list(usad.dist.attributes),
        "probs": [float(v) for v in usad.dist.probs],
        "generation": usad.source_ranking_generation,
        "item_count": usad.source_item_count,
    }
    _atomic_write(Path(path), json.dumps(payload, indent=2) + "\n")


def load_usad(path: str | Path) -> UserAestheticDistribution:
    with Path(path).open() as handle:
        payload = json.load(handle)
    dist = AttributeDistribution(
        attributes=tuple(payload["attributes"]),
        probs=np.asarray(payload["probs"], dtype=np.float64),
    )
    return UserAestheticDistribution(
        dist=dist,
        source_ranking_generation=int(payload["generation"]),
        source_item_count=int(payload["item_count"]),
    )


def save_session_events(session: Session, path: str | Path) -> None:
    text = "".join(json.dumps(event) + "\n" for event in session.events)
    _atomic_write(Path(path), text)


def load_session_events(path: str | Path) -> list[dict]:
    events = []
    with Path(path).open() as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid event: {exc}") from None
    return events
