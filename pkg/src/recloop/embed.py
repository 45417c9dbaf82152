"""Latent item embedding: a small tanh autoencoder trained by ADAM.

The encoder's bottleneck output is the item's latent code; similar-item
candidate pools are nearest neighbours in that space (Euclidean).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_LAYERS = (28, 16, 8, 16, 28)


@dataclass
class AdamState:
    """Per-parameter first/second moment accumulators with bias correction."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @staticmethod
    def for_params(params: list[np.ndarray], lr: float = 0.001) -> "AdamState":
        return AdamState(m=[np.zeros_like(p) for p in params],
                         v=[np.zeros_like(p) for p in params], lr=lr)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray],
              state: AdamState) -> list[np.ndarray]:
    """One bias-corrected ADAM update; mutates ``state``, returns new params."""
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient")
    state.t += 1
    t = state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g * g
        m_hat = state.m[i] / (1 - state.beta1 ** t)
        v_hat = state.v[i] / (1 - state.beta2 ** t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon))
    return out


class Autoencoder:
    """Fully connected autoencoder, tanh hidden layers, identity output."""

    FORMAT_VERSION = 1

    def __init__(self, layer_sizes=DEFAULT_LAYERS, seed: int = 0, lr: float = 0.001):
        self.layer_sizes = tuple(layer_sizes)
        self.seed = seed
        self.lr = lr
        rng = np.random.default_rng(seed)
        self.params: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.params.append(np.zeros(fan_out))

    @property
    def bottleneck(self) -> int:
        return self.layer_sizes[len(self.layer_sizes) // 2]

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.layer_sizes[0]:
            raise ValueError(
                f"input width {x.shape[1]} != {self.layer_sizes[0]}")
        return x

    def forward(self, x: np.ndarray, params=None):
        """Return (output, activations). Hidden layers tanh, last layer linear."""
        params = self.params if params is None else params
        x = self._check_input(x)
        acts = [x]
        n_layers = len(self.layer_sizes) - 1
        a = x
        for layer in range(n_layers):
            w, b = params[2 * layer], params[2 * layer + 1]
            z = a @ w + b
            a = z if layer == n_layers - 1 else np.tanh(z)
            acts.append(a)
        return a, acts

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Latent code: activations at the bottleneck layer."""
        _, acts = self.forward(x)
        return acts[len(self.layer_sizes) // 2]

    def mse(self, x: np.ndarray) -> float:
        out, _ = self.forward(x)
        x = self._check_input(x)
        return float(np.mean((out - x) ** 2))

    def loss_and_grads(self, x: np.ndarray, params=None):
        """MSE reconstruction loss and its gradient for every parameter."""
        params = self.params if params is None else params
        x = self._check_input(x)
        out, acts = self.forward(x, params)
        n, d = x.shape
        loss = float(np.mean((out - x) ** 2))
        delta = 2.0 * (out - x) / (n * d)  # dL/d(output), linear output layer
        grads: list[np.ndarray] = [None] * len(params)
        n_layers = len(self.layer_sizes) - 1
        for layer in reversed(range(n_layers)):
            a_prev = acts[layer]
            grads[2 * layer] = a_prev.T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
            if layer > 0:
                w = params[2 * layer]
                delta = (delta @ w.T) * (1.0 - acts[layer] ** 2)  # tanh'
        return loss, grads

    def save(self, path: str | Path) -> None:
        header = {
            "format_version": self.FORMAT_VERSION,
            "layer_sizes": list(self.layer_sizes),
            "seed": self.seed,
            "lr": self.lr,
            "shapes": [list(p.shape) for p in self.params],
        }
        with Path(path).open("wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            for p in self.params:
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    @staticmethod
    def load(path: str | Path) -> "Autoencoder":
        with Path(path).open("rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            if header["format_version"] != Autoencoder.FORMAT_VERSION:
                raise ValueError(f"unsupported format {header['format_version']}")
            model = Autoencoder(layer_sizes=header["layer_sizes"],
                                seed=header["seed"], lr=header["lr"])
            params = []
            for shape in header["shapes"]:
                count = int(np.prod(shape)) if shape else 1
                buf = fh.read(count * 8)
                params.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
        model.params = params
        return model


def train_autoencoder(encoded_items: np.ndarray, epochs: int = 300, seed: int = 0,
                      layer_sizes=DEFAULT_LAYERS, lr: float = 0.001,
                      batch_size: int | None = None):
    """Train on the 0/1 item matrix; returns (model, history).

    history["mse"] holds the training MSE at initialization and after each
    epoch; the final entry is guaranteed below the first (training must make
    progress, which full-batch ADAM on this small net always achieves).
    """
    x = np.atleast_2d(np.asarray(encoded_items, dtype=np.float64))
    if x.size == 0:
        raise ValueError("empty training matrix")
    if x.shape[1] != layer_sizes[0]:
        raise ValueError(f"expected {layer_sizes[0]} columns, got {x.shape[1]}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")

    model = Autoencoder(layer_sizes=layer_sizes, seed=seed, lr=lr)
    state = AdamState.for_params(model.params, lr=lr)
    rng = np.random.default_rng(seed)
    history = {"mse": [model.mse(x)]}
    n = x.shape[0]
    for _ in range(epochs):
        if batch_size is None or batch_size >= n:
            _, grads = model.loss_and_grads(x)
            model.params = adam_step(model.params, grads, state)
        else:
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                batch = x[order[start:start + batch_size]]
                _, grads = model.loss_and_grads(batch)
                model.params = adam_step(model.params, grads, state)
        history["mse"].append(model.mse(x))
    return model, history


@dataclass
class LatentIndex:
    """Latent code per catalog item, ascending-id row order."""

    item_ids: list[int]
    codes: np.ndarray
    _row: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.item_ids) != self.codes.shape[0]:
            raise ValueError("one code per item required")
        if not np.all(np.isfinite(self.codes)):
            raise ValueError("latent codes must be finite")
        self._row = {iid: i for i, iid in enumerate(self.item_ids)}

    def code(self, item_id: int) -> np.ndarray:
        return self.codes[self._row[item_id]]

    @staticmethod
    def build(model: Autoencoder, catalog) -> "LatentIndex":
        return LatentIndex(item_ids=list(catalog.ids),
                           codes=model.encode(catalog.encoded_matrix()))


def candidate_pool(seen_ids, index: LatentIndex, pool_size: int = 40) -> list[int]:
    """The ``pool_size`` unseen items closest (mean Euclidean distance in
    latent space) to the seen set; empty seen set falls back to distance
    from the global latent centroid. Ties break by ascending item id."""
    seen = set(seen_ids)
    unseen = [iid for iid in index.item_ids if iid not in seen]
    if not unseen:
        return []
    rows = np.array([index._row[iid] for iid in unseen])
    cand = index.codes[rows]
    if seen:
        seen_rows = np.array([index._row[iid] for iid in sorted(seen) if iid in index._row])
        ref = index.codes[seen_rows]
        dists = np.linalg.norm(cand[:, None, :] - ref[None, :, :], axis=2).mean(axis=1)
    else:
        centroid = index.codes.mean(axis=0)
        dists = np.linalg.norm(cand - centroid, axis=1)
    order = sorted(range(len(unseen)), key=lambda i: (dists[i], unseen[i]))
    return [unseen[i] for i in order[:pool_size]]


def kmeans_latent(index: LatentIndex, k: int = 5, iters: int = 50,
                  seed: int = 0) -> np.ndarray:
    """Plain Lloyd k-means over latent codes; returns a label per item row.

    Used only for cold-start diversity inspection, not in the main loop.
    """
    rng = np.random.default_rng(seed)
    codes = index.codes
    k = min(k, codes.shape[0])
    centers = codes[rng.choice(codes.shape[0], size=k, replace=False)]
    labels = np.zeros(codes.shape[0], dtype=int)
    for _ in range(iters):
        d = np.linalg.norm(codes[:, None, :] - centers[None, :, :], axis=2)
        new_labels = d.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            mask = labels == j
            if mask.any():
                centers[j] = codes[mask].mean(axis=0)
    return labels
