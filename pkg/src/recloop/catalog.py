"""Item corpus handling: CSV ingest, binary feature encoding, synthetic corpus.

Items carry explanatory features (genres, tags, people). Every downstream
model consumes the fixed-width 0/1 encoding built here: 20 slots reserved
for genres, the remainder for the most frequent non-genre features.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

NEUTRAL_RATING = 3.0
RATING_MIN, RATING_MAX = 0.5, 5.0


class FeatureKind(str, Enum):
    GENRE = "genre"
    TAG = "tag"
    ACTOR = "actor"
    DIRECTOR = "director"


@dataclass(frozen=True, order=True)
class FeatureId:
    kind: FeatureKind
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be nonempty")

    @property
    def is_genre(self) -> bool:
        return self.kind == FeatureKind.GENRE

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "name": self.name}

    @staticmethod
    def from_dict(d: dict) -> "FeatureId":
        return FeatureId(FeatureKind(d["kind"]), d["name"])


@dataclass(frozen=True)
class Item:
    id: int
    title: str
    features: frozenset[FeatureId]
    global_mean_rating: float = NEUTRAL_RATING

    def __post_init__(self):
        if not self.features:
            raise ValueError(f"item {self.id} has an empty feature set")
        if not (RATING_MIN <= self.global_mean_rating <= RATING_MAX):
            raise ValueError(
                f"item {self.id}: mean rating {self.global_mean_rating} outside "
                f"[{RATING_MIN}, {RATING_MAX}]"
            )


class FeatureEncoding:
    """Maps each catalog feature to one slot of a fixed-width binary vector.

    Genres occupy the first ``genre_dims`` slots; the remaining slots hold
    the most frequent non-genre features (ties broken lexicographically).
    Features that did not make the cut are dropped at encode time and
    counted in ``dropped_count``.
    """

    def __init__(self, feature_index: dict[FeatureId, int], dimension: int = 28,
                 genre_dims: int = 20):
        if genre_dims >= dimension:
            raise ValueError("genre_dims must be smaller than dimension")
        for fid, slot in feature_index.items():
            if not 0 <= slot < dimension:
                raise ValueError(f"slot {slot} for {fid} outside [0, {dimension})")
            if fid.is_genre and slot >= genre_dims:
                raise ValueError(f"genre {fid.name} assigned to non-genre slot {slot}")
            if not fid.is_genre and slot < genre_dims:
                raise ValueError(f"non-genre {fid.name} assigned to genre slot {slot}")
        self.dimension = dimension
        self.genre_dims = genre_dims
        self.feature_index = dict(feature_index)
        self.dropped_count = 0  # running count of features dropped at encode time

    def slot_of(self, fid: FeatureId) -> int | None:
        return self.feature_index.get(fid)

    def feature_at(self, slot: int) -> FeatureId | None:
        for fid, s in self.feature_index.items():
            if s == slot:
                return fid
        return None

    @staticmethod
    def build(items: list[Item], dimension: int = 28, genre_dims: int = 20) -> "FeatureEncoding":
        """Assign slots by corpus frequency, ties broken by (kind, name)."""
        genre_counts: Counter[FeatureId] = Counter()
        other_counts: Counter[FeatureId] = Counter()
        for item in items:
            for fid in item.features:
                (genre_counts if fid.is_genre else other_counts)[fid] += 1

        def top(counts: Counter, limit: int) -> list[FeatureId]:
            ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            return [fid for fid, _ in ranked[:limit]]

        index: dict[FeatureId, int] = {}
        for slot, fid in enumerate(top(genre_counts, genre_dims)):
            index[fid] = slot
        for offset, fid in enumerate(top(other_counts, dimension - genre_dims)):
            index[fid] = genre_dims + offset
        return FeatureEncoding(index, dimension=dimension, genre_dims=genre_dims)


def encode(item: Item, enc: FeatureEncoding) -> np.ndarray:
    """0/1 vector of length ``enc.dimension``; unmapped features are dropped."""
    vec = np.zeros(enc.dimension, dtype=np.float64)
    for fid in item.features:
        slot = enc.slot_of(fid)
        if slot is None:
            enc.dropped_count += 1
        else:
            vec[slot] = 1.0
    return vec


@dataclass
class Catalog:
    items: dict[int, Item]
    encoding: FeatureEncoding
    skipped_featureless: int = 0
    _matrix_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._ids = sorted(self.items)

    @property
    def ids(self) -> list[int]:
        return self._ids

    def __len__(self) -> int:
        return len(self.items)

    def item(self, item_id: int) -> Item:
        return self.items[item_id]

    def encode_item(self, item_id: int) -> np.ndarray:
        return encode(self.items[item_id], self.encoding)

    def encoded_matrix(self) -> np.ndarray:
        """Item encodings stacked in ascending-id order (rows align with .ids)."""
        if "m" not in self._matrix_cache:
            self._matrix_cache["m"] = np.stack(
                [self.encode_item(i) for i in self._ids]
            ) if self._ids else np.zeros((0, self.encoding.dimension))
        return self._matrix_cache["m"]

    def save(self, path: str | Path) -> None:
        doc = {
            "dimension": self.encoding.dimension,
            "genre_dims": self.encoding.genre_dims,
            "feature_index": [
                {"feature": fid.as_dict(), "slot": slot}
                for fid, slot in sorted(self.encoding.feature_index.items(),
                                        key=lambda kv: kv[1])
            ],
            "items": [
                {
                    "id": it.id,
                    "title": it.title,
                    "features": [f.as_dict() for f in sorted(it.features)],
                    "global_mean_rating": it.global_mean_rating,
                }
                for it in (self.items[i] for i in self._ids)
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))

    @staticmethod
    def load(path: str | Path) -> "Catalog":
        doc = json.loads(Path(path).read_text())
        index = {FeatureId.from_dict(e["feature"]): e["slot"]
                 for e in doc["feature_index"]}
        enc = FeatureEncoding(index, dimension=doc["dimension"],
                              genre_dims=doc["genre_dims"])
        items = {
            e["id"]: Item(
                id=e["id"], title=e["title"],
                features=frozenset(FeatureId.from_dict(f) for f in e["features"]),
                global_mean_rating=e["global_mean_rating"],
            )
            for e in doc["items"]
        }
        return Catalog(items=items, encoding=enc)


class CatalogError(ValueError):
    """Raised for malformed or inconsistent corpus files."""


def _read_rows(path: str | Path, required: list[str]) -> list[tuple[int, dict]]:
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in required):
            raise CatalogError(f"{path}: header must contain {required}")
        rows = []
        for row in reader:
            lineno = reader.line_num
            if any(row.get(c) in (None, "") for c in required):
                raise CatalogError(f"{path}:{lineno}: missing value in row {row}")
            rows.append((lineno, row))
    return rows


def load_catalog(movies_path: str | Path, tags_path: str | Path | None = None,
                 ratings_path: str | Path | None = None,
                 dimension: int = 28, genre_dims: int = 20) -> Catalog:
    """Build a catalog from MovieLens-format CSVs.

    ``movies.csv`` needs columns movieId,title,genres (genres pipe-separated);
    ``tags.csv`` (movieId,tag) and ``ratings.csv`` (userId,movieId,rating) are
    optional. Items without any usable feature are skipped and counted.
    """
    tags_by_item: dict[int, set[str]] = {}
    if tags_path is not None:
        for lineno, row in _read_rows(tags_path, ["movieId", "tag"]):
            try:
                mid = int(row["movieId"])
            except ValueError:
                raise CatalogError(f"{tags_path}:{lineno}: bad movieId {row['movieId']!r}")
            tags_by_item.setdefault(mid, set()).add(row["tag"].strip())

    rating_sums: dict[int, list[float]] = {}
    if ratings_path is not None:
        for lineno, row in _read_rows(ratings_path, ["userId", "movieId", "rating"]):
            try:
                mid = int(row["movieId"])
                rating = float(row["rating"])
            except ValueError:
                raise CatalogError(f"{ratings_path}:{lineno}: bad movieId/rating")
            if not (RATING_MIN <= rating <= RATING_MAX):
                raise CatalogError(
                    f"{ratings_path}:{lineno}: rating {rating} outside "
                    f"[{RATING_MIN}, {RATING_MAX}]")
            rating_sums.setdefault(mid, []).append(rating)

    items: dict[int, Item] = {}
    raw_rows: dict[int, tuple] = {}
    skipped = 0
    for lineno, row in _read_rows(movies_path, ["movieId", "title", "genres"]):
        try:
            mid = int(row["movieId"])
        except ValueError:
            raise CatalogError(f"{movies_path}:{lineno}: bad movieId {row['movieId']!r}")
        key = (row["title"], row["genres"])
        if mid in raw_rows:
            if raw_rows[mid] == key:
                continue  # exact repeat of the same row
            raise CatalogError(f"{movies_path}:{lineno}: duplicate movieId {mid}")
        raw_rows[mid] = key

        features: set[FeatureId] = set()
        for g in row["genres"].split("|"):
            g = g.strip()
            if g and g.lower() != "(no genres listed)":
                features.add(FeatureId(FeatureKind.GENRE, g))
        for tag in tags_by_item.get(mid, ()):
            if tag:
                features.add(FeatureId(FeatureKind.TAG, tag))
        if not features:
            skipped += 1
            continue
        ratings = rating_sums.get(mid)
        mean = float(np.mean(ratings)) if ratings else NEUTRAL_RATING
        items[mid] = Item(id=mid, title=row["title"], features=frozenset(features),
                          global_mean_rating=mean)

    if not items:
        raise CatalogError(f"{movies_path}: no usable items")
    enc = FeatureEncoding.build(list(items.values()), dimension=dimension,
                                genre_dims=genre_dims)
    return Catalog(items=items, encoding=enc, skipped_featureless=skipped)


def synthetic_corpus(n_items: int = 200, seed: int = 7,
                     dimension: int = 28, genre_dims: int = 20) -> Catalog:
    """Deterministic desk-scale corpus: 200 items, 20 genres, 8 tag slots.

    Items split into two genre clusters (genres g00..g09 vs g10..g19) so the
    latent space has recoverable structure; tags are shared across clusters.
    Mean ratings are drawn uniformly over the rating scale.
    """
    rng = np.random.default_rng(seed)
    genres = [FeatureId(FeatureKind.GENRE, f"g{i:02d}") for i in range(genre_dims)]
    n_tags = dimension - genre_dims
    tags = [FeatureId(FeatureKind.TAG, f"tag{i}") for i in range(n_tags)]

    items: dict[int, Item] = {}
    half = genre_dims // 2
    for idx in range(n_items):
        cluster = 0 if idx < n_items // 2 else 1
        pool = genres[:half] if cluster == 0 else genres[half:]
        k_gen = int(rng.integers(2, 5))
        feats = set(rng.choice(len(pool), size=k_gen, replace=False))
        features = {pool[i] for i in feats}
        for t in range(n_tags):
            if rng.random() < 0.25:
                features.add(tags[t])
        rating = float(np.round(rng.uniform(RATING_MIN, RATING_MAX) * 2) / 2)
        items[idx + 1] = Item(id=idx + 1, title=f"Item {idx + 1:03d}",
                              features=frozenset(features),
                              global_mean_rating=rating)

    enc = FeatureEncoding.build(list(items.values()), dimension=dimension,
                                genre_dims=genre_dims)
    return Catalog(items=items, encoding=enc)


def cluster_of(catalog: Catalog, item_id: int) -> int:
    """Cluster label for synthetic-corpus items (0 = low-numbered genre half)."""
    half = catalog.encoding.genre_dims // 2
    low = high = 0
    for fid in catalog.item(item_id).features:
        if fid.is_genre:
            if int(fid.name[1:]) < half:
                low += 1
            else:
                high += 1
    return 0 if low >= high else 1
