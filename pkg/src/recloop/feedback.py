"""Slider feedback: rating adjustment, propagation, and the retrain cycle.

A slider move on one feature shifts the stored rating of every personal
datum carrying that feature by ``c * r * (omega_after - omega_before) / 100``
(c smaller for genres, which dominate the encoding), then the rating model
is refit and the recommendation list re-ranked.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .catalog import RATING_MAX, RATING_MIN, FeatureId
from .recommend import PersonalDatum, clamp_rating

GENRE_C = 0.15
OTHER_C = 0.3


class GroupPolicyError(PermissionError):
    """Feedback attempted on a session whose group forbids it."""


@dataclass
class FeedbackEvent:
    trial: int
    item_id: int
    feature: FeatureId
    omega_before: float
    omega_after: float
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        for w in (self.omega_before, self.omega_after):
            if not (0.0 <= w <= 100.0):
                raise ValueError(f"slider weight {w} outside [0, 100]")
        if self.omega_after == self.omega_before:
            raise ValueError("feedback requires a changed weight")


@dataclass
class RatingAdjustment:
    y_hat: float
    c: float
    r: float
    feature: FeatureId
    affected_item_ids: list[int] = field(default_factory=list)


def compute_adjustment(event: FeedbackEvent, r: float,
                       genre_c: float = GENRE_C,
                       other_c: float = OTHER_C) -> RatingAdjustment:
    """Rating delta for one slider move at current expected rating ``r``."""
    if not (RATING_MIN <= r <= RATING_MAX):
        raise ValueError(f"expected rating {r} outside [{RATING_MIN}, {RATING_MAX}]")
    c = genre_c if event.feature.is_genre else other_c
    y_hat = c * r * (event.omega_after - event.omega_before) / 100.0
    return RatingAdjustment(y_hat=y_hat, c=c, r=r, feature=event.feature)


def propagate(adjustment: RatingAdjustment, personal_data: list[PersonalDatum],
              feature_slot: int | None) -> int:
    """Add the adjustment to every personal datum carrying the feature.

    Ratings clamp to the rating scale; data not carrying the feature are
    untouched. Returns the number of affected data and records their ids
    on the adjustment.
    """
    if feature_slot is None:
        return 0
    affected = []
    for datum in personal_data:
        if datum.encoding[feature_slot] > 0.5:
            datum.rating = clamp_rating(datum.rating + adjustment.y_hat)
            affected.append(datum.item_id)
    adjustment.affected_item_ids = affected
    return len(affected)


def apply_feedback_and_retrain(event: FeedbackEvent, session) -> RatingAdjustment:
    """Full cycle: adjustment -> propagation -> refit -> re-rank, atomically.

    ``session`` provides group policy, the current pool with predictions,
    the personal data store, and a ``rebuild()`` hook. On any failure the
    session is restored to its pre-event state.
    """
    if not session.allows_feedback:
        raise GroupPolicyError(
            f"session {session.id} is in the non-feedback group")
    snapshot = session.snapshot()
    try:
        r = session.expected_rating(event.item_id)
        adjustment = compute_adjustment(event, r, session.genre_c, session.other_c)
        slot = session.catalog.encoding.slot_of(event.feature)

        # The adjustment lands on the expected rating of every candidate
        # carrying the feature: pool items enter the personal data at their
        # adjusted expected rating, existing data shift in place.
        inserted: list[int] = []
        if slot is not None:
            known = {d.item_id for d in session.personal_data}
            for item_id, encoding in session.pool:
                if encoding[slot] > 0.5 and item_id not in known:
                    rating = clamp_rating(session.expected_rating(item_id)
                                          + adjustment.y_hat)
                    session.personal_data.append(PersonalDatum(
                        item_id=item_id, encoding=encoding, rating=rating))
                    inserted.append(item_id)
        existing = [d for d in session.personal_data if d.item_id not in set(inserted)]
        propagate(adjustment, existing, slot)
        adjustment.affected_item_ids = inserted + adjustment.affected_item_ids
        session.rebuild()
    except Exception:
        session.restore(snapshot)
        raise
    return adjustment
