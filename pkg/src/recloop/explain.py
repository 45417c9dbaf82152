"""Local surrogate explanations for tree predictions.

For one item, perturb its active features, fit a weighted ridge surrogate to
the tree's outputs, and rescale the positive coefficients to a 0-100 weight
per feature. Top-3 weights feed the list display, top-6 the detail sliders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import FeatureId, FeatureKind


@dataclass
class Explanation:
    item_id: int
    feature: FeatureId
    slot: int
    weight: float            # 0..100 display scale
    raw_coefficient: float   # signed surrogate coefficient, kept for debugging

    def __post_init__(self):
        if not (0.0 <= self.weight <= 100.0):
            raise ValueError(f"weight {self.weight} outside [0, 100]")


@dataclass
class LimeConfig:
    n_samples: int = 1000
    kernel_width: float | None = None  # None -> 0.75 * sqrt(encoding dim)
    ridge_lambda: float = 1.0
    seed: int = 0

    def resolved_width(self, dimension: int) -> float:
        width = self.kernel_width if self.kernel_width is not None \
            else 0.75 * np.sqrt(dimension)
        if width <= 0:
            raise ValueError("kernel width must be positive")
        return float(width)

    def validate(self, dimension: int) -> None:
        if self.n_samples < dimension + 1:
            raise ValueError(
                f"n_samples {self.n_samples} < dimension+1 ({dimension + 1})")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        self.resolved_width(dimension)


class DegenerateDesignError(RuntimeError):
    """Perturbation design stayed ill-conditioned after the lambda bump."""


def _weighted_ridge(design: np.ndarray, y: np.ndarray, w: np.ndarray,
                    lam: float) -> np.ndarray:
    """Solve intercept-augmented weighted ridge; intercept unpenalized."""
    n, k = design.shape
    a = np.column_stack([np.ones(n), design])
    gram = a.T @ (w[:, None] * a)
    rhs = a.T @ (w * y)
    mask = np.eye(k + 1)
    mask[0, 0] = 0.0
    retry_lam = lam * 10.0 if lam > 0 else 1.0
    for attempt_lam in (lam, retry_lam):
        g = gram + mask * attempt_lam
        try:
            if np.linalg.cond(g) > 1e12:
                raise np.linalg.LinAlgError("ill-conditioned")
            return np.linalg.solve(g, rhs)
        except np.linalg.LinAlgError:
            continue
    raise DegenerateDesignError("design matrix degenerate even after lambda x10")


def surrogate_coefficients(encoding: np.ndarray, predict_fn, cfg: LimeConfig):
    """Sampled surrogate fit; returns (active_slots, raw_coefficients).

    Perturbations flip each active feature off independently with p=0.5,
    sample weight exp(-d^2 / sigma^2) with d the Hamming distance from the
    item, and the surrogate is a weighted ridge on the kept-feature matrix.
    """
    encoding = np.asarray(encoding, dtype=np.float64)
    dim = encoding.shape[0]
    cfg.validate(dim)
    active = np.flatnonzero(encoding > 0.5)
    if active.size == 0:
        raise ValueError("item has no active features to explain")
    sigma = cfg.resolved_width(dim)

    rng = np.random.default_rng(cfg.seed)
    keep = (rng.random((cfg.n_samples, active.size)) < 0.5).astype(np.float64)
    vectors = np.zeros((cfg.n_samples, dim))
    vectors[:, active] = keep
    inactive = encoding.copy()
    inactive[active] = 0.0
    vectors += inactive  # inactive slots stay as-is (all zero for 0/1 items)

    y = np.asarray(predict_fn(vectors), dtype=np.float64)
    hamming = (1.0 - keep).sum(axis=1)
    w = np.exp(-(hamming ** 2) / (sigma ** 2))
    beta = _weighted_ridge(keep, y, w, cfg.ridge_lambda)
    return active, beta[1:]


def rescale_weights(coefs: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """Map signed coefficients to the 0-100 display scale.

    Negative coefficients clamp to 0; the largest positive coefficient maps
    to 100. All-nonpositive coefficient sets (within solver noise ``atol``)
    map to all zeros.
    """
    pos = np.maximum(coefs, 0.0)
    top = pos.max() if pos.size else 0.0
    if top <= atol:
        return np.zeros_like(pos)
    return np.clip(100.0 * pos / top, 0.0, 100.0)


def explain_item(encoding: np.ndarray, tree, cfg: LimeConfig,
                 features: dict[int, FeatureId] | None = None,
                 item_id: int = -1) -> list[Explanation]:
    """One Explanation per active feature of the item."""
    active, coefs = surrogate_coefficients(encoding, tree.predict, cfg)
    weights = rescale_weights(coefs)
    out = []
    for slot, coef, weight in zip(active, coefs, weights):
        fid = (features or {}).get(int(slot)) \
            or FeatureId(FeatureKind.TAG, f"slot{int(slot):02d}")
        out.append(Explanation(item_id=item_id, feature=fid, slot=int(slot),
                               weight=float(weight), raw_coefficient=float(coef)))
    return out


def top_k(explanations: list[Explanation], k: int) -> list[Explanation]:
    """Top-k by weight descending, ties by feature name ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(explanations, key=lambda e: (-e.weight, e.feature.name))
    return ranked[:k]


def enumerate_surrogate(encoding: np.ndarray, predict_fn,
                        kernel_width: float | None = None):
    """Exact surrogate over all 2^k perturbations (unregularized WLS).

    Reference implementation for items with few active features; solves the
    kernel-weighted least-squares problem by sqrt-weight scaling and lstsq.
    """
    encoding = np.asarray(encoding, dtype=np.float64)
    dim = encoding.shape[0]
    active = np.flatnonzero(encoding > 0.5)
    k = active.size
    if k == 0:
        raise ValueError("no active features")
    if k > 20:
        raise ValueError("enumeration limited to 20 active features")
    sigma = kernel_width if kernel_width is not None else 0.75 * np.sqrt(dim)

    combos = ((np.arange(2 ** k)[:, None] >> np.arange(k)) & 1).astype(np.float64)
    vectors = np.zeros((2 ** k, dim))
    vectors[:, active] = combos
    y = np.asarray(predict_fn(vectors), dtype=np.float64)
    d = (1.0 - combos).sum(axis=1)
    w = np.exp(-(d ** 2) / (sigma ** 2))

    a = np.column_stack([np.ones(2 ** k), combos])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(sw[:, None] * a, sw * y, rcond=None)
    return active, beta[1:]
