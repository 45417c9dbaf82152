"""Per-user rating model: CART regression tree over binary item encodings.

The tree is refit from the user's personal data after every feedback event
and ranks the 40-item candidate pool into the 20-item recommendation list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .catalog import RATING_MAX, RATING_MIN

DEFAULT_MAX_DEPTH = 40
DEFAULT_MIN_SPLIT = 3
LIST_SIZE = 20


def clamp_rating(r: float) -> float:
    return float(min(RATING_MAX, max(RATING_MIN, r)))


@dataclass
class PersonalDatum:
    item_id: int
    encoding: np.ndarray
    rating: float

    def __post_init__(self):
        if not np.isfinite(self.rating):
            raise ValueError("rating must be finite")
        if not (RATING_MIN <= self.rating <= RATING_MAX):
            raise ValueError(f"rating {self.rating} outside [{RATING_MIN}, {RATING_MAX}]")


@dataclass
class Prediction:
    item_id: int
    expected_rating: float
    rank: int


class Node:
    __slots__ = ("dim", "threshold", "left", "right", "value", "count")

    def __init__(self, *, dim=None, threshold=0.5, left=None, right=None,
                 value=None, count=0):
        self.dim = dim
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.count = count

    @property
    def is_leaf(self) -> bool:
        return self.dim is None


class RegressionTree:
    def __init__(self, root: Node, n_features: int,
                 max_depth: int = DEFAULT_MAX_DEPTH,
                 min_split: int = DEFAULT_MIN_SPLIT):
        self.root = root
        self.n_features = n_features
        self.max_depth = max_depth
        self.min_split = min_split

    def predict_one(self, encoding: np.ndarray) -> float:
        encoding = np.asarray(encoding, dtype=np.float64)
        if encoding.shape != (self.n_features,):
            raise ValueError(f"expected {self.n_features} features, got {encoding.shape}")
        node = self.root
        while not node.is_leaf:
            node = node.left if encoding[node.dim] <= node.threshold else node.right
        return node.value

    def predict(self, encodings: np.ndarray) -> np.ndarray:
        """Vectorized root-to-leaf descent over a (n, d) matrix."""
        x = np.atleast_2d(np.asarray(encodings, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {x.shape[1]}")
        out = np.empty(x.shape[0])

        def descend(node: Node, idx: np.ndarray):
            if node.is_leaf:
                out[idx] = node.value
                return
            go_left = x[idx, node.dim] <= node.threshold
            if go_left.any():
                descend(node.left, idx[go_left])
            if (~go_left).any():
                descend(node.right, idx[~go_left])

        descend(self.root, np.arange(x.shape[0]))
        return out

    def depth(self) -> int:
        def d(node):
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))
        return d(self.root)

    def training_sse(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.sum((self.predict(x) - np.asarray(y)) ** 2))

    def to_json(self) -> str:
        def ser(node: Node) -> dict:
            if node.is_leaf:
                return {"kind": "leaf", "value": node.value, "count": node.count}
            return {"kind": "split", "dim": int(node.dim), "threshold": node.threshold,
                    "left": ser(node.left), "right": ser(node.right)}
        return json.dumps({"n_features": self.n_features, "max_depth": self.max_depth,
                           "min_split": self.min_split, "root": ser(self.root)},
                          sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "RegressionTree":
        doc = json.loads(text)

        def de(d: dict) -> Node:
            if d["kind"] == "leaf":
                return Node(value=d["value"], count=d["count"])
            return Node(dim=d["dim"], threshold=d["threshold"],
                        left=de(d["left"]), right=de(d["right"]))
        return RegressionTree(de(doc["root"]), n_features=doc["n_features"],
                              max_depth=doc["max_depth"], min_split=doc["min_split"])


def best_split(x: np.ndarray, y: np.ndarray):
    """Best (dim, gain) by SSE decrease over all dims; None if no valid split.

    Valid splits leave both children nonempty; ties go to the lowest dim.
    """
    n = y.shape[0]
    total = float(np.sum(y))
    total_sq = float(np.sum(y * y))
    sse_all = total_sq - total * total / n
    # Both sides are computed as direct dot products so complementary
    # columns produce bitwise-equal gains and ties resolve consistently.
    inv = 1.0 - x
    n1 = x.sum(axis=0)
    s1 = x.T @ y
    q1 = x.T @ (y * y)
    n0 = inv.sum(axis=0)
    s0 = inv.T @ y
    q0 = inv.T @ (y * y)
    valid = (n0 > 0) & (n1 > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        sse_left = q0 - np.where(n0 > 0, s0 * s0 / np.maximum(n0, 1), 0.0)
        sse_right = q1 - np.where(n1 > 0, s1 * s1 / np.maximum(n1, 1), 0.0)
    gain = np.where(valid, sse_all - sse_left - sse_right, -np.inf)
    dim = int(np.argmax(gain))  # argmax returns the first (lowest) max index
    if gain[dim] <= 0.0:
        return None
    return dim, float(gain[dim])


def fit_tree(data: list[PersonalDatum], max_depth: int = DEFAULT_MAX_DEPTH,
             min_split: int = DEFAULT_MIN_SPLIT, seed: int = 0) -> RegressionTree:
    """CART variance-reduction fit. Deterministic; ``seed`` kept for interface
    uniformity with the other trainers."""
    if not data:
        raise ValueError("empty personal data")
    x = np.stack([np.asarray(d.encoding, dtype=np.float64) for d in data])
    y = np.array([d.rating for d in data], dtype=np.float64)

    def build(idx: np.ndarray, depth: int) -> Node:
        sub_y = y[idx]
        leaf = Node(value=float(sub_y.mean()), count=int(idx.size))
        if depth >= max_depth or idx.size < min_split or np.all(sub_y == sub_y[0]):
            return leaf
        found = best_split(x[idx], sub_y)
        if found is None:
            return leaf
        dim, _ = found
        go_left = x[idx, dim] <= 0.5
        node = Node(dim=dim, left=build(idx[go_left], depth + 1),
                    right=build(idx[~go_left], depth + 1))
        node.count = int(idx.size)
        return node

    return RegressionTree(build(np.arange(len(data)), 0), n_features=x.shape[1],
                          max_depth=max_depth, min_split=min_split)


def recommend(pool: list[tuple[int, np.ndarray]], tree: RegressionTree,
              list_size: int = LIST_SIZE) -> list[Prediction]:
    """Top ``list_size`` pool items by expected rating, ties by ascending id."""
    if not pool:
        raise ValueError("empty candidate pool")
    ids = [iid for iid, _ in pool]
    ratings = tree.predict(np.stack([enc for _, enc in pool]))
    order = sorted(range(len(pool)), key=lambda i: (-ratings[i], ids[i]))
    return [Prediction(item_id=ids[i], expected_rating=float(ratings[i]), rank=r + 1)
            for r, i in enumerate(order[:list_size])]
