"""Statistics and classification for the evaluation tables.

Covers the single-trial classification pipeline (PCA + linear SVM / kNN,
leave-one-out macro-F1), subject-wise Spearman correlations combined by
Fisher's method, Pearson questionnaire matrices with a significance mask,
and the pooled-variance two-sample t-test. Tail probabilities go through
the regularized incomplete gamma/beta functions.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.special import betainc, gammaincc
from scipy.stats import pearsonr, spearmanr


class Label(IntEnum):
    LOW = 0
    MID = 1
    HIGH = 2


LABELS = [Label.LOW, Label.MID, Label.HIGH]


def rating_to_label(rating: float) -> Label:
    """9-point self-rating mapped to three equal classes (1-3, 4-6, 7-9)."""
    if not (1.0 <= rating <= 9.0):
        raise ValueError(f"rating {rating} outside [1, 9]")
    if rating < 3.5:
        return Label.LOW
    if rating < 6.5:
        return Label.MID
    return Label.HIGH


@dataclass
class LabeledTrial:
    features: np.ndarray
    label: Label


# ---------------------------------------------------------------------------
# Tail probabilities
# ---------------------------------------------------------------------------

def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-squared distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def t_sf(t: float, df: int) -> float:
    """Upper tail of Student's t distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    if not np.isfinite(t):
        return 0.0 if t > 0 else 1.0
    half = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return half if t >= 0 else 1.0 - half


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray          # (out_dim, d)
    explained_variance: np.ndarray  # (out_dim,)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(x) - self.mean) @ self.components.T


def pca_fit_transform(x: np.ndarray, out_dim: int = 2):
    """Mean-centered eigendecomposition; returns (model, projected rows).

    Components sort by descending eigenvalue with sign fixed so each
    component's largest-magnitude entry is positive. Rank below ``out_dim``
    zero-fills the remaining components with a warning.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least two rows")
    if d < out_dim:
        raise ValueError(f"need at least {out_dim} feature dimensions")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    floor = max(evals[0], 0.0) * 1e-12 + 1e-30
    components = np.zeros((out_dim, d))
    explained = np.zeros(out_dim)
    for j in range(out_dim):
        if evals[j] > floor:
            v = evecs[:, j]
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            components[j] = v
            explained[j] = evals[j]
        else:
            warnings.warn(f"data rank < {out_dim}; component {j} zero-filled")
    model = PcaModel(mean=mean, components=components,
                     explained_variance=explained)
    return model, centered @ components.T


# ---------------------------------------------------------------------------
# Classifiers
# ---------------------------------------------------------------------------

class LinearSvm:
    """One-vs-rest linear SVM trained by full-batch subgradient descent.

    Features are z-scored from the training data inside the model. The
    per-class objective is 0.5*|w|^2 + C * sum(hinge); prediction takes the
    largest margin, ties resolved by class order Low < Mid < High.
    """

    def __init__(self, C: float = 1.0, max_iter: int = 2000, tol: float = 1e-4):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.weights = None   # (n_classes, d)
        self.biases = None
        self.mu = None
        self.sd = None
        self.constant_label: Label | None = None

    def _objective(self, w, b, x, y):
        margins = 1.0 - y * (x @ w + b)
        return 0.5 * float(w @ w) + self.C * float(np.maximum(margins, 0).sum())

    def _fit_binary(self, x: np.ndarray, y: np.ndarray):
        n, d = x.shape
        lam = 1.0 / (self.C * n)
        w = np.zeros(d)
        b = 0.0
        prev = self._objective(w, b, x, y)
        stall = 0
        for t in range(1, self.max_iter + 1):
            eta = 1.0 / (lam * t)
            viol = 1.0 - y * (x @ w + b) > 0
            grad_w = lam * w - (y[viol, None] * x[viol]).sum(axis=0) / n
            grad_b = -y[viol].sum() / n
            w = w - eta * grad_w
            b = b - eta * grad_b
            norm = np.linalg.norm(w)
            cap = 1.0 / np.sqrt(lam)
            if norm > cap:
                w = w * (cap / norm)
            obj = self._objective(w, b, x, y)
            if abs(prev - obj) <= self.tol * max(1.0, abs(prev)):
                stall += 1
                if stall >= 10:
                    break
            else:
                stall = 0
            prev = obj
        return w, b

    def fit(self, x: np.ndarray, labels: list[Label]) -> "LinearSvm":
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        labels = list(labels)
        present = sorted(set(labels))
        if len(present) < 2:
            warnings.warn("single-class training data; constant predictor")
            self.constant_label = present[0]
            return self
        self.mu = x.mean(axis=0)
        sd = x.std(axis=0)
        self.sd = np.where(sd > 0, sd, 1.0)
        z = (x - self.mu) / self.sd
        y_all = np.array([int(l) for l in labels])
        self.weights = np.zeros((len(LABELS), z.shape[1]))
        self.biases = np.zeros(len(LABELS))
        for cls in LABELS:
            y = np.where(y_all == int(cls), 1.0, -1.0)
            if np.all(y == -1.0):
                self.biases[int(cls)] = -np.inf
                continue
            w, b = self._fit_binary(z, y)
            self.weights[int(cls)] = w
            self.biases[int(cls)] = b
        return self

    def predict(self, x: np.ndarray) -> list[Label]:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.constant_label is not None:
            return [self.constant_label] * x.shape[0]
        z = (x - self.mu) / self.sd
        scores = z @ self.weights.T + self.biases
        return [Label(int(i)) for i in np.argmax(scores, axis=1)]


def knn_predict(train_x: np.ndarray, train_labels: list[Label],
                query: np.ndarray, k: int = 5) -> Label:
    """Majority vote of the k nearest by Euclidean distance.

    Distance ties break by training order; vote ties go to the label of the
    nearest neighbour holding one of the tied labels.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=np.float64))
    n = train_x.shape[0]
    if n == 0:
        raise ValueError("empty training set")
    if k > n:
        raise ValueError(f"k={k} exceeds training size {n}")
    dists = np.linalg.norm(train_x - np.asarray(query, dtype=np.float64), axis=1)
    order = sorted(range(n), key=lambda i: (dists[i], i))
    neighbours = order[:k]
    votes = Counter(train_labels[i] for i in neighbours)
    best = max(votes.values())
    tied = {label for label, c in votes.items() if c == best}
    if len(tied) == 1:
        return next(iter(tied))
    for i in neighbours:
        if train_labels[i] in tied:
            return train_labels[i]
    raise AssertionError("unreachable")


@dataclass
class ClassifierSpec:
    kind: str = "svm"          # "svm" | "knn"
    pca_dim: int | None = 2
    C: float = 1.0
    k: int = 5
    average: str = "macro"     # "macro" | "micro"

    def __post_init__(self):
        if self.kind not in ("svm", "knn"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.average not in ("macro", "micro"):
            raise ValueError(f"unknown averaging {self.average!r}")


def f1_score(y_true: list[Label], y_pred: list[Label], average: str = "macro") -> float:
    """F1 over the three fixed classes; a class absent everywhere scores 0."""
    if average == "micro":
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == p)
        return tp / len(y_true) if y_true else 0.0
    scores = []
    for cls in LABELS:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(2 * precision * recall / (precision + recall)
                      if precision + recall else 0.0)
    return float(np.mean(scores))


def loocv_f1(trials: list[LabeledTrial], classifier: ClassifierSpec) -> float:
    """Leave-one-out F1; PCA (when configured) refits on each training fold."""
    if len(trials) < 3:
        raise ValueError("need at least three trials")
    x = np.stack([np.asarray(t.features, dtype=np.float64) for t in trials])
    labels = [t.label for t in trials]
    preds: list[Label] = []
    for i in range(len(trials)):
        mask = np.ones(len(trials), dtype=bool)
        mask[i] = False
        train_x, test_x = x[mask], x[i:i + 1]
        train_y = [l for j, l in enumerate(labels) if j != i]
        if classifier.pca_dim is not None and x.shape[1] > classifier.pca_dim:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model, train_x = pca_fit_transform(train_x, classifier.pca_dim)
            test_x = model.transform(test_x)
        if classifier.kind == "svm":
            svm = LinearSvm(C=classifier.C).fit(train_x, train_y)
            preds.append(svm.predict(test_x)[0])
        else:
            preds.append(knn_predict(train_x, train_y, test_x[0],
                                     k=min(classifier.k, len(train_y))))
    return f1_score(labels, preds, average=classifier.average)


# ---------------------------------------------------------------------------
# Correlation statistics
# ---------------------------------------------------------------------------

@dataclass
class CorrelationRow:
    mean_r: float
    min_r: float
    max_r: float
    statistic: float  # Fisher chi-squared statistic
    df: int
    p: float
    n_subjects: int


def spearman_fisher(per_subject_series: list[tuple[np.ndarray, np.ndarray]]
                    ) -> CorrelationRow:
    """Subject-wise Spearman rho, combined to one p via Fisher's method.

    Constant series are skipped with a warning; each remaining subject
    contributes a two-sided p (t approximation, midranks for ties).
    """
    rhos, ps = [], []
    for x, y in per_subject_series:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.size != y.size or x.size < 3:
            raise ValueError("each subject needs >= 3 paired points")
        if np.all(x == x[0]) or np.all(y == y[0]):
            warnings.warn("constant series; subject skipped")
            continue
        rho, p = spearmanr(x, y)
        if not np.isfinite(rho):
            warnings.warn("undefined correlation; subject skipped")
            continue
        rhos.append(float(rho))
        ps.append(float(p))
    if not rhos:
        raise ValueError("no usable subjects")
    with np.errstate(divide="ignore"):
        stat = float(-2.0 * np.sum(np.log(ps)))
    df = 2 * len(ps)
    return CorrelationRow(mean_r=float(np.mean(rhos)), min_r=float(np.min(rhos)),
                          max_r=float(np.max(rhos)), statistic=stat, df=df,
                          p=chi2_sf(stat, df) if np.isfinite(stat) else 0.0,
                          n_subjects=len(rhos))


def pearson_matrix(table: np.ndarray, alpha: float = 0.01):
    """Pairwise Pearson r over columns with a p < alpha significance mask.

    Returns (r, p, masked_r); masked_r holds NaN where the correlation is
    not significant at ``alpha`` or where a column has zero variance.
    """
    table = np.atleast_2d(np.asarray(table, dtype=np.float64))
    n, s = table.shape
    if n < 3:
        raise ValueError("need at least three rows")
    r = np.full((s, s), np.nan)
    p = np.full((s, s), np.nan)
    for i in range(s):
        for j in range(s):
            if np.std(table[:, i]) == 0 or np.std(table[:, j]) == 0:
                continue
            if i == j:
                r[i, j], p[i, j] = 1.0, 0.0
                continue
            ri, pi = pearsonr(table[:, i], table[:, j])
            r[i, j], p[i, j] = float(ri), float(pi)
    masked = np.where(np.isnan(p) | (p >= alpha), np.nan, r)
    return r, p, masked


def two_sample_t(group_a: np.ndarray, group_b: np.ndarray) -> tuple[float, float]:
    """Pooled-variance two-tailed Student's t-test."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least two values")
    n1, n2 = a.size, b.size
    df = n1 + n2 - 2
    pooled = ((n1 - 1) * np.var(a, ddof=1) + (n2 - 1) * np.var(b, ddof=1)) / df
    diff = float(a.mean() - b.mean())
    if pooled == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return float(np.sign(diff) * np.inf), 0.0
    t = diff / np.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    return float(t), float(2.0 * t_sf(abs(t), df))
