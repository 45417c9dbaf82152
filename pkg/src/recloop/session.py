"""Session orchestration: the per-user loop state and its event-sourced log.

Every state-changing interaction appends one JSON line to the session log;
replaying a log through `replay_session` reconstructs the exact final state
(bit-equal tree and recommendation list), which doubles as the integration
test for the whole pipeline.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import feedback as fb
from .catalog import Catalog, FeatureId
from .efficacy import (DEFAULT_K, EfficacyScore, Judgment, LogisticMode, QuizItem,
                       SatisfactionMark, Verdict, efficacy, generate_quiz,
                       satisfaction_count, understanding_score)
from .embed import LatentIndex, candidate_pool
from .explain import LimeConfig, explain_item, top_k
from .recommend import (DEFAULT_MAX_DEPTH, DEFAULT_MIN_SPLIT, LIST_SIZE,
                        PersonalDatum, Prediction, fit_tree, recommend)

# Purpose codes mixed into derived RNG streams.
_SEED_LIME = 7
_SEED_QUIZ = 101


class Group(str, Enum):
    FEEDBACK = "feedback"
    NONFEEDBACK = "nonfeedback"


def derive_seed(*parts: int) -> int:
    """Stable child seed from integer parts (session seed, trial, item...)."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@dataclass
class SessionOptions:
    pool_size: int = 40
    list_size: int = LIST_SIZE
    display_top: int = 3
    detail_top: int = 6
    quiz_size: int = 10
    lime_samples: int = 1000
    max_depth: int = DEFAULT_MAX_DEPTH
    min_split: int = DEFAULT_MIN_SPLIT
    genre_c: float = fb.GENRE_C
    other_c: float = fb.OTHER_C
    efficacy_k: float = DEFAULT_K
    efficacy_mode: LogisticMode = LogisticMode.LITERAL

    def as_dict(self) -> dict:
        d = asdict(self)
        d["efficacy_mode"] = self.efficacy_mode.value
        return d

    @staticmethod
    def from_dict(d: dict) -> "SessionOptions":
        d = dict(d)
        if "efficacy_mode" in d:
            d["efficacy_mode"] = LogisticMode(d["efficacy_mode"])
        return SessionOptions(**d)


@dataclass
class SelfAssessment:
    trial: int
    valence: float
    dominance: float
    mental_demand: float
    performance: float
    effort: float
    frustration: float
    efficacy_self_rating: float

    def __post_init__(self):
        for name in ("valence", "dominance", "efficacy_self_rating"):
            v = getattr(self, name)
            if not (1.0 <= v <= 9.0):
                raise ValueError(f"{name} {v} outside [1, 9]")
        for name in ("mental_demand", "performance", "effort", "frustration"):
            v = getattr(self, name)
            if not (0.0 <= v <= 100.0):
                raise ValueError(f"{name} {v} outside [0, 100]")


class ReplayError(RuntimeError):
    """A logged recommendation does not match the replayed state."""


class Session:
    """One user's loop: personal data, current tree, list, and event log."""

    def __init__(self, session_id: str, group: Group, seed: int,
                 catalog: Catalog, latent: LatentIndex,
                 onboarding: list[tuple[int, float]],
                 options: SessionOptions | None = None,
                 log_writer=None, log_creation: bool = True):
        if len(onboarding) < 5:
            raise ValueError("need at least 5 onboarding ratings")
        unknown = [iid for iid, _ in onboarding if iid not in catalog.items]
        if unknown:
            raise ValueError(f"unknown onboarding items {unknown}")
        self.id = session_id
        self.group = group
        self.seed = seed
        self.catalog = catalog
        self.latent = latent
        self.options = options or SessionOptions()
        self.onboarding = [(int(iid), float(r)) for iid, r in onboarding]
        self._log_writer = log_writer

        self.trial = 1
        self.personal_data = [
            PersonalDatum(item_id=iid, encoding=catalog.encode_item(iid), rating=r)
            for iid, r in self.onboarding
        ]
        # The candidate pool forms around rated history; detail views are
        # tracked separately and do not shrink the pool.
        self.seen: set[int] = {iid for iid, _ in self.onboarding}
        self.viewed: set[int] = set()
        self._slot_features = {slot: fid for fid, slot
                               in catalog.encoding.feature_index.items()}
        self._marks: dict[int, list[SatisfactionMark]] = {}
        self._quizzes: dict[int, list[QuizItem]] = {}
        self._assessments: dict[int, SelfAssessment] = {}
        self._rebuild()
        if log_creation:
            self.log("created", {
                "group": self.group.value, "seed": self.seed,
                "onboarding": [[iid, r] for iid, r in self.onboarding],
                "options": self.options.as_dict(),
            })
            self._log_recommended()

    # -- state machinery ----------------------------------------------------

    @property
    def allows_feedback(self) -> bool:
        return self.group == Group.FEEDBACK

    @property
    def genre_c(self) -> float:
        return self.options.genre_c

    @property
    def other_c(self) -> float:
        return self.options.other_c

    def log(self, kind: str, payload: dict) -> None:
        if self._log_writer is not None:
            self._log_writer({"ts": time.time(), "session": self.id,
                              "trial": self.trial, "kind": kind,
                              "payload": payload})

    def _rebuild(self) -> None:
        opts = self.options
        pool_ids = candidate_pool(self.seen, self.latent, opts.pool_size)
        self.pool = [(iid, self.catalog.encode_item(iid)) for iid in pool_ids]
        self.tree = fit_tree(self.personal_data, max_depth=opts.max_depth,
                             min_split=opts.min_split)
        self.predictions: list[Prediction] = recommend(self.pool, self.tree,
                                                       opts.list_size)
        self._pred_by_item = {p.item_id: p for p in self.predictions}
        self._expl_cache: dict[int, list] = {}

    def rebuild(self) -> None:
        self._rebuild()

    def snapshot(self):
        return {
            "personal_data": [PersonalDatum(d.item_id, d.encoding, d.rating)
                              for d in self.personal_data],
            "seen": set(self.seen),
            "viewed": set(self.viewed),
            "trial": self.trial,
            "pool": list(self.pool),
            "tree": self.tree,
            "predictions": list(self.predictions),
            "pred_by_item": dict(self._pred_by_item),
            "expl_cache": dict(self._expl_cache),
        }

    def restore(self, snap) -> None:
        self.personal_data = snap["personal_data"]
        self.seen = snap["seen"]
        self.viewed = snap["viewed"]
        self.trial = snap["trial"]
        self.pool = snap["pool"]
        self.tree = snap["tree"]
        self.predictions = snap["predictions"]
        self._pred_by_item = snap["pred_by_item"]
        self._expl_cache = snap["expl_cache"]

    def expected_rating(self, item_id: int) -> float:
        pred = self._pred_by_item.get(item_id)
        if pred is not None:
            return pred.expected_rating
        return float(self.tree.predict_one(self.catalog.encode_item(item_id)))

    # -- user actions -------------------------------------------------------

    def explanations_for(self, item_id: int):
        if item_id not in self._expl_cache:
            cfg = LimeConfig(n_samples=self.options.lime_samples,
                             seed=derive_seed(self.seed, self.trial,
                                              _SEED_LIME, item_id))
            self._expl_cache[item_id] = explain_item(
                self.catalog.encode_item(item_id), self.tree, cfg,
                features=self._slot_features, item_id=item_id)
        return self._expl_cache[item_id]

    def list_payload(self) -> dict:
        items = []
        for p in self.predictions:
            chips = top_k(self.explanations_for(p.item_id), self.options.display_top)
            items.append({
                "item_id": p.item_id,
                "title": self.catalog.item(p.item_id).title,
                "rank": p.rank,
                "expected_rating": p.expected_rating,
                "top_features": [{"kind": c.feature.kind.value,
                                  "name": c.feature.name,
                                  "weight": c.weight} for c in chips],
            })
        return {"session": self.id, "group": self.group.value,
                "trial": self.trial,
                "sliders_read_only": not self.allows_feedback,
                "items": items}

    def detail_payload(self, item_id: int) -> dict:
        if item_id not in self._pred_by_item:
            raise KeyError(f"item {item_id} not in the current list")
        self.mark_viewed(item_id)
        sliders = top_k(self.explanations_for(item_id), self.options.detail_top)
        return {
            "session": self.id, "trial": self.trial, "item_id": item_id,
            "title": self.catalog.item(item_id).title,
            "expected_rating": self.expected_rating(item_id),
            "sliders_read_only": not self.allows_feedback,
            "sliders": [{"kind": s.feature.kind.value, "name": s.feature.name,
                         "weight": s.weight,
                         "raw_coefficient": s.raw_coefficient} for s in sliders],
        }

    def mark_viewed(self, item_id: int) -> None:
        if item_id not in self.catalog.items:
            raise KeyError(f"unknown item {item_id}")
        if item_id not in self.viewed:
            self.viewed.add(item_id)
            self.log("viewed", {"item_id": item_id})

    def apply_feedback(self, event: fb.FeedbackEvent):
        adjustment = fb.apply_feedback_and_retrain(event, self)
        self.log("feedback", {
            "item_id": event.item_id,
            "feature": event.feature.as_dict(),
            "omega_before": event.omega_before,
            "omega_after": event.omega_after,
            "y_hat": adjustment.y_hat,
            "affected": adjustment.affected_item_ids,
        })
        return adjustment

    def mark_satisfaction(self, item_id: int, verdict: Verdict) -> None:
        if item_id not in self._pred_by_item:
            raise KeyError(f"item {item_id} not in the current list")
        self._marks.setdefault(self.trial, []).append(
            SatisfactionMark(index=item_id, verdict=verdict))
        self.log("satisfaction", {"item_id": item_id, "verdict": verdict.value})

    def current_quiz(self) -> list[QuizItem]:
        if self.trial not in self._quizzes:
            all_expl, displayed = [], []
            for p in self.predictions:
                expl = self.explanations_for(p.item_id)
                all_expl.extend(expl)
                displayed.extend(top_k(expl, self.options.display_top))
            self._quizzes[self.trial] = generate_quiz(
                all_expl, displayed, n_items=self.options.quiz_size,
                seed=derive_seed(self.seed, self.trial, _SEED_QUIZ))
        return self._quizzes[self.trial]

    def submit_quiz(self, answers: list[dict]) -> list[QuizItem]:
        """Answer the current quiz; one {judgment, confidence} per item."""
        quiz = self.current_quiz()
        if len(answers) != len(quiz):
            raise ValueError(f"expected {len(quiz)} answers, got {len(answers)}")
        for item, ans in zip(quiz, answers):
            item.user_judgment = Judgment(ans["judgment"])
            item.confidence = float(ans["confidence"])
        understanding_score(quiz)  # validates confidences
        self.log("quiz", {"items": [{
            "item_id": q.item_id, "feature": q.feature.as_dict(),
            "is_genuine": q.is_genuine, "judgment": q.user_judgment.value,
            "confidence": q.confidence} for q in quiz]})
        return quiz

    def submit_assessment(self, sa: SelfAssessment) -> None:
        if sa.trial != self.trial:
            raise ValueError(f"assessment trial {sa.trial} != current {self.trial}")
        self._assessments[self.trial] = sa
        self.log("assessment", {k: v for k, v in asdict(sa).items()})

    def next_recommendations(self) -> dict:
        self.trial += 1
        self._rebuild()
        self._log_recommended()
        return self.list_payload()

    def _log_recommended(self) -> None:
        self.log("recommended", {
            "item_ids": [p.item_id for p in self.predictions],
            "expected_ratings": [p.expected_rating for p in self.predictions],
        })

    # -- scoring ------------------------------------------------------------

    def efficacy_for(self, trial: int | None = None) -> EfficacyScore:
        trial = self.trial if trial is None else trial
        a = satisfaction_count(self._marks.get(trial, []))
        quiz = self._quizzes.get(trial)
        x = understanding_score(quiz) if quiz and all(
            q.answered() for q in quiz) else 0.0
        return efficacy(a=a, x=x, k=self.options.efficacy_k,
                        mode=self.options.efficacy_mode, trial=trial)

    def assessment_for(self, trial: int) -> SelfAssessment | None:
        return self._assessments.get(trial)

    # -- replay hooks -------------------------------------------------------

    def restore_quiz(self, trial: int, items: list[dict]) -> None:
        """Install a logged, answered quiz without regenerating it."""
        self._quizzes[trial] = [
            QuizItem(item_id=e["item_id"],
                     feature=FeatureId.from_dict(e["feature"]),
                     is_genuine=e["is_genuine"],
                     user_judgment=Judgment(e["judgment"]),
                     confidence=e["confidence"])
            for e in items
        ]


class SessionStore:
    """Holds live sessions; serializes writes per session; appends JSONL."""

    def __init__(self, catalog: Catalog, latent: LatentIndex,
                 log_dir: str | Path | None = None):
        self.catalog = catalog
        self.latent = latent
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()

    def _writer_for(self, session_id: str):
        if self.log_dir is None:
            return None
        path = self.log_dir / f"{session_id}.jsonl"

        def write(event: dict) -> None:
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
        return write

    def create(self, group: Group, seed: int,
               onboarding: list[tuple[int, float]],
               options: SessionOptions | None = None,
               session_id: str | None = None) -> Session:
        session_id = session_id or uuid.uuid4().hex[:12]
        with self._global:
            if session_id in self.sessions:
                raise ValueError(f"session {session_id} already exists")
            self._locks[session_id] = threading.Lock()
        session = Session(session_id, group, seed, self.catalog, self.latent,
                          onboarding, options=options,
                          log_writer=self._writer_for(session_id))
        self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown session {session_id}") from None

    def lock(self, session_id: str) -> threading.Lock:
        return self._locks[session_id]


def replay_session(log_lines, catalog: Catalog, latent: LatentIndex,
                   verify: bool = True) -> Session:
    """Rebuild a session from its JSONL event log.

    Logged `recommended` events are cross-checked against the replayed list
    when ``verify`` is set; any mismatch raises ReplayError.
    """
    events = [json.loads(line) for line in log_lines if str(line).strip()]
    if not events or events[0]["kind"] != "created":
        raise ReplayError("log must start with a created event")
    created = events[0]
    payload = created["payload"]
    session = Session(created["session"], Group(payload["group"]),
                      payload["seed"], catalog, latent,
                      [(iid, r) for iid, r in payload["onboarding"]],
                      options=SessionOptions.from_dict(payload["options"]),
                      log_writer=None, log_creation=False)

    def check(event):
        got = [p.item_id for p in session.predictions]
        want = event["payload"]["item_ids"]
        if verify and got != want:
            raise ReplayError(f"trial {session.trial}: replayed list {got} "
                              f"!= logged {want}")

    for event in events[1:]:
        kind, pay = event["kind"], event["payload"]
        if kind == "recommended":
            if event["trial"] == session.trial:
                check(event)
            elif event["trial"] == session.trial + 1:
                session.next_recommendations()
                check(event)
            else:
                raise ReplayError(f"recommended event for trial {event['trial']} "
                                  f"at replay trial {session.trial}")
        elif kind == "viewed":
            session.viewed.add(pay["item_id"])
        elif kind == "feedback":
            session.apply_feedback(fb.FeedbackEvent(
                trial=event["trial"], item_id=pay["item_id"],
                feature=FeatureId.from_dict(pay["feature"]),
                omega_before=pay["omega_before"],
                omega_after=pay["omega_after"]))
        elif kind == "satisfaction":
            session._marks.setdefault(event["trial"], []).append(
                SatisfactionMark(index=pay["item_id"],
                                 verdict=Verdict(pay["verdict"])))
        elif kind == "quiz":
            session.restore_quiz(event["trial"], pay["items"])
        elif kind == "assessment":
            session._assessments[event["trial"]] = SelfAssessment(**pay)
        else:
            raise ReplayError(f"unknown event kind {kind!r}")
    return session
