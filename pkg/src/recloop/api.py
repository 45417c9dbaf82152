"""HTTP JSON API over a session store.

Route set mirrors the UI flow: create a session, read / advance the
recommendation list, open an item's explanation detail, post slider
feedback, Like/Dislike marks, quiz answers, self-assessments, and read
the per-trial efficacy score. Writes to one session are serialized.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .catalog import FeatureId, FeatureKind
from .efficacy import Verdict
from .feedback import FeedbackEvent, GroupPolicyError
from .session import Group, SelfAssessment, SessionOptions, SessionStore


class OnboardingRating(BaseModel):
    item_id: int
    rating: float = Field(ge=0.5, le=5.0)


class CreateSessionBody(BaseModel):
    group: Group
    seed: int = 0
    onboarding: list[OnboardingRating]
    options: dict | None = None


class FeatureBody(BaseModel):
    kind: FeatureKind
    name: str


class FeedbackBody(BaseModel):
    trial: int
    item_id: int
    feature: FeatureBody
    omega_before: float = Field(ge=0, le=100)
    omega_after: float = Field(ge=0, le=100)


class SatisfactionBody(BaseModel):
    trial: int
    item_id: int
    verdict: Verdict


class QuizAnswer(BaseModel):
    judgment: str
    confidence: float = Field(ge=1, le=9)


class QuizBody(BaseModel):
    trial: int
    answers: list[QuizAnswer]


class AssessmentBody(BaseModel):
    trial: int
    valence: float = Field(ge=1, le=9)
    dominance: float = Field(ge=1, le=9)
    mental_demand: float = Field(ge=0, le=100)
    performance: float = Field(ge=0, le=100)
    effort: float = Field(ge=0, le=100)
    frustration: float = Field(ge=0, le=100)
    efficacy_self_rating: float = Field(ge=1, le=9)


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="recloop", version="0.1.0")

    def session_or_404(sid: str):
        try:
            return store.get(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            options = (SessionOptions.from_dict(body.options)
                       if body.options else None)
            session = store.create(
                body.group, body.seed,
                [(o.item_id, o.rating) for o in body.onboarding],
                options=options)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"session_id": session.id, **session.list_payload()}

    @app.get("/sessions/{sid}/recommendations")
    def get_recommendations(sid: str):
        session = session_or_404(sid)
        with store.lock(sid):
            return session.list_payload()

    @app.post("/sessions/{sid}/recommendations:next")
    def next_recommendations(sid: str):
        session = session_or_404(sid)
        with store.lock(sid):
            return session.next_recommendations()

    @app.get("/sessions/{sid}/items/{item_id}/explanation")
    def get_explanation(sid: str, item_id: int):
        session = session_or_404(sid)
        with store.lock(sid):
            try:
                return session.detail_payload(item_id)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{sid}/feedback")
    def post_feedback(sid: str, body: FeedbackBody):
        session = session_or_404(sid)
        with store.lock(sid):
            try:
                event = FeedbackEvent(
                    trial=body.trial, item_id=body.item_id,
                    feature=FeatureId(body.feature.kind, body.feature.name),
                    omega_before=body.omega_before,
                    omega_after=body.omega_after)
                session.apply_feedback(event)
            except GroupPolicyError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return session.list_payload()

    @app.post("/sessions/{sid}/satisfaction")
    def post_satisfaction(sid: str, body: SatisfactionBody):
        session = session_or_404(sid)
        with store.lock(sid):
            try:
                session.mark_satisfaction(body.item_id, body.verdict)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            return {"ok": True, "trial": session.trial}

    @app.get("/sessions/{sid}/quiz")
    def get_quiz(sid: str):
        session = session_or_404(sid)
        with store.lock(sid):
            quiz = session.current_quiz()
            return {"trial": session.trial, "items": [
                {"index": i, "item_id": q.item_id,
                 "title": store.catalog.item(q.item_id).title,
                 "feature": q.feature.as_dict()}
                for i, q in enumerate(quiz)]}

    @app.post("/sessions/{sid}/quiz")
    def post_quiz(sid: str, body: QuizBody):
        session = session_or_404(sid)
        with store.lock(sid):
            try:
                quiz = session.submit_quiz([a.model_dump() for a in body.answers])
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return {"ok": True, "trial": session.trial, "n_items": len(quiz)}

    @app.post("/sessions/{sid}/assessment")
    def post_assessment(sid: str, body: AssessmentBody):
        session = session_or_404(sid)
        with store.lock(sid):
            try:
                session.submit_assessment(SelfAssessment(**body.model_dump()))
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return {"ok": True, "trial": session.trial}

    @app.get("/sessions/{sid}/efficacy")
    def get_efficacy(sid: str, trial: int | None = None):
        session = session_or_404(sid)
        with store.lock(sid):
            return session.efficacy_for(trial).as_dict()

    @app.get("/sessions/{sid}/tree")
    def get_tree(sid: str):
        """Current personal regression tree, for debugging the model state."""
        session = session_or_404(sid)
        with store.lock(sid):
            return json.loads(session.tree.to_json())

    return app
