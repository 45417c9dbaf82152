"""Explanatory-efficacy scoring: understanding quiz, satisfaction, and xi.

Per trial, the score is ``xi = a * f(x)`` where ``a`` counts satisfied
(liked) recommendations, ``x`` sums signed understanding over the quiz
(judgment correctness times stated confidence), and ``f`` is a logistic.
Two logistic conventions ship: the literal ``1/(1+exp(-k*x))`` with the
steep default gain, and a normalized ``1/(1+exp(-x/k))`` that treats the
constant as a divisor so the maximum attainable |x| maps to +-1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .catalog import FeatureId
from .explain import Explanation

DEFAULT_K = 90.0
DEFAULT_QUIZ_SIZE = 10
CONFIDENCE_MIN, CONFIDENCE_MAX = 1.0, 9.0


class Judgment(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


class Verdict(str, Enum):
    LIKE = "like"
    DISLIKE = "dislike"
    NONE = "none"


class LogisticMode(str, Enum):
    LITERAL = "literal"        # f(x) = 1 / (1 + exp(-k x))
    NORMALIZED = "normalized"  # f(x) = 1 / (1 + exp(-x / k))


@dataclass
class QuizItem:
    item_id: int
    feature: FeatureId
    is_genuine: bool
    user_judgment: Judgment | None = None
    confidence: float | None = None

    def answered(self) -> bool:
        return self.user_judgment is not None and self.confidence is not None

    def correctness(self) -> int:
        """+1 when the judgment matches the ground truth, else -1."""
        if not self.answered():
            raise ValueError("quiz item not answered")
        said_genuine = self.user_judgment == Judgment.CORRECT
        return 1 if said_genuine == self.is_genuine else -1


@dataclass
class SatisfactionMark:
    index: int  # position m in the recommendation list or the item id
    verdict: Verdict


@dataclass
class EfficacyScore:
    trial: int
    a: int
    x: float
    k: float
    xi: float
    mode: LogisticMode

    def as_dict(self) -> dict:
        return {"trial": self.trial, "a": self.a, "x": self.x, "k": self.k,
                "xi": self.xi, "mode": self.mode.value}


def understanding_score(quiz: list[QuizItem]) -> float:
    """x: sum over answered quiz items of correctness times confidence."""
    if not quiz:
        raise ValueError("empty quiz")
    x = 0.0
    for item in quiz:
        if item.confidence is None or not (
                CONFIDENCE_MIN <= item.confidence <= CONFIDENCE_MAX):
            raise ValueError(f"confidence {item.confidence} outside "
                             f"[{CONFIDENCE_MIN}, {CONFIDENCE_MAX}]")
        x += item.correctness() * item.confidence
    return x


def satisfaction_count(marks: list[SatisfactionMark]) -> int:
    """a: number of liked recommendations; repeated marks on the same index
    resolve to the last verdict given."""
    final: dict[int, Verdict] = {}
    for mark in marks:
        final[mark.index] = mark.verdict
    return sum(1 for v in final.values() if v == Verdict.LIKE)


def logistic(x: float, k: float = DEFAULT_K,
             mode: LogisticMode = LogisticMode.LITERAL) -> float:
    if k <= 0:
        raise ValueError("k must be positive")
    arg = k * x if mode == LogisticMode.LITERAL else x / k
    return float(expit(arg))


def efficacy(a: int, x: float, k: float = DEFAULT_K,
             mode: LogisticMode = LogisticMode.LITERAL, trial: int = 0) -> EfficacyScore:
    """xi = a * f(x); bounded by 0 <= xi <= a."""
    if a < 0:
        raise ValueError("a must be >= 0")
    xi = a * logistic(x, k, mode)
    return EfficacyScore(trial=trial, a=a, x=x, k=k, xi=xi, mode=mode)


def generate_quiz(all_explanations: list[Explanation],
                  displayed: list[Explanation],
                  n_items: int = DEFAULT_QUIZ_SIZE,
                  seed: int = 0) -> list[QuizItem]:
    """Build an unanswered quiz from one trial's explanation state.

    Half the items are genuine (drawn from the displayed explanations) and
    half are distractors: features of the recommended items that were not
    displayed as influential for any of them. Each quiz feature appears at
    most once. Too few distinct distractor features shrinks that half with
    a warning.
    """
    if n_items < 2:
        raise ValueError("quiz needs at least 2 items")
    rng = np.random.default_rng(seed)
    half = n_items // 2

    displayed_features = {e.feature for e in displayed}
    genuine_by_feature: dict[FeatureId, list[Explanation]] = {}
    for e in displayed:
        genuine_by_feature.setdefault(e.feature, []).append(e)
    if len(genuine_by_feature) < half:
        raise ValueError(
            f"need {half} distinct displayed features, have {len(genuine_by_feature)}")

    distractor_by_feature: dict[FeatureId, list[Explanation]] = {}
    for e in all_explanations:
        if e.feature not in displayed_features:
            distractor_by_feature.setdefault(e.feature, []).append(e)
    n_distractors = min(half, len(distractor_by_feature))
    if n_distractors < half:
        warnings.warn(f"only {n_distractors} distractor features available; "
                      f"quiz shrunk to {half + n_distractors} items")

    def sample(pool: dict[FeatureId, list[Explanation]], count: int,
               genuine: bool) -> list[QuizItem]:
        feats = sorted(pool)
        chosen = rng.choice(len(feats), size=count, replace=False)
        out = []
        for i in chosen:
            feature = feats[i]
            source = pool[feature][int(rng.integers(len(pool[feature])))]
            out.append(QuizItem(item_id=source.item_id, feature=feature,
                                is_genuine=genuine))
        return out

    quiz = sample(genuine_by_feature, half, True) \
        + sample(distractor_by_feature, n_distractors, False)
    order = rng.permutation(len(quiz))
    return [quiz[i] for i in order]
