"""One recommendation cycle: personal tree, ranked list, explanations.

Seeds a session with a handful of ratings, fits the personal regression
tree over the candidate pool, and shows the top of the list with each
item's most influential features on the 0-100 weight scale.
"""

import numpy as np

from recloop.catalog import synthetic_corpus
from recloop.explain import top_k
from recloop.session import Group, Session, SessionOptions
from recloop.sim import build_latent

catalog = synthetic_corpus()
latent = build_latent(catalog, epochs=300, seed=0)

rng = np.random.default_rng(5)
onboarding = [(int(iid), float(rng.uniform(1.0, 5.0)))
              for iid in rng.choice(catalog.ids, size=8, replace=False)]
print("onboarding ratings:")
for iid, rating in onboarding:
    print(f"  {catalog.item(iid).title}: {rating:.1f}")

session = Session("demo", Group.FEEDBACK, seed=5, catalog=catalog,
                  latent=latent, onboarding=onboarding,
                  options=SessionOptions(lime_samples=512))

print(f"\npersonal tree depth: {session.tree.depth()}, "
      f"pool size: {len(session.pool)}")
print("\ntop five of the twenty recommendations:")
for p in session.predictions[:5]:
    chips = top_k(session.explanations_for(p.item_id), 3)
    chip_text = ", ".join(f"{c.feature.name}={c.weight:.0f}" for c in chips)
    print(f"  #{p.rank:2d} {catalog.item(p.item_id).title} "
          f"(expected {p.expected_rating:.2f})  [{chip_text}]")

# The detail view exposes six sliders per item.
item_id = session.predictions[0].item_id
detail = session.detail_payload(item_id)
print(f"\ndetail view of {detail['title']}:")
for s in detail["sliders"]:
    print(f"  {s['kind']}:{s['name']}  weight {s['weight']:.0f} "
          f"(raw coefficient {s['raw_coefficient']:+.3f})")
