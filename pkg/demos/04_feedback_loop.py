"""Close the loop: slider feedback propagates into retrained recommendations.

Raising a feature's weight adds c * r * delta/100 to the rating of every
personal datum carrying it (c = 0.15 for genres, 0.3 otherwise), the tree
refits, and the list re-ranks. Efficacy per trial is xi = a * f(x) from the
Like count and the quiz-based understanding score.
"""

import numpy as np

from recloop.catalog import synthetic_corpus
from recloop.efficacy import Judgment, Verdict
from recloop.explain import top_k
from recloop.feedback import FeedbackEvent
from recloop.session import Group, Session, SessionOptions
from recloop.sim import build_latent

catalog = synthetic_corpus()
latent = build_latent(catalog, epochs=300, seed=0)

rng = np.random.default_rng(11)
onboarding = [(int(iid), float(rng.uniform(1.5, 5.0)))
              for iid in rng.choice(catalog.ids, size=8, replace=False)]
session = Session("loop", Group.FEEDBACK, seed=11, catalog=catalog,
                  latent=latent, onboarding=onboarding,
                  options=SessionOptions(lime_samples=512))

before = [p.item_id for p in session.predictions]
item_id = before[0]
slider = top_k(session.explanations_for(item_id), 6)[0]
print(f"viewing {catalog.item(item_id).title}; "
      f"slider {slider.feature.name} currently at {slider.weight:.0f}")

# the user disagrees: this feature mattered less than the model thinks
adjustment = session.apply_feedback(FeedbackEvent(
    trial=1, item_id=item_id, feature=slider.feature,
    omega_before=slider.weight,
    omega_after=max(0.0, slider.weight - 40)))
after = [p.item_id for p in session.predictions]
print(f"rating adjustment per carrier: {adjustment.y_hat:+.3f} "
      f"({len(adjustment.affected_item_ids)} data affected)")
moved = sum(1 for a, b in zip(before, after) if a != b)
print(f"list positions changed after retrain: {moved}/20")

# Like a few items, answer the quiz, read the efficacy score.
for p in session.predictions[:6]:
    session.mark_satisfaction(p.item_id, Verdict.LIKE)
quiz = session.current_quiz()
answers = [{"judgment": (Judgment.CORRECT if q.is_genuine
                         else Judgment.INCORRECT).value,
            "confidence": 8.0} for q in quiz]
session.submit_quiz(answers)
score = session.efficacy_for()
print(f"\ntrial {score.trial}: a={score.a} likes, understanding x={score.x}, "
      f"xi={score.xi:.3f} ({score.mode.value} mode, k={score.k:.0f})")

session.next_recommendations()
print(f"advanced to trial {session.trial}")
