import json

import numpy as np
import pytest

from recloop.efficacy import Judgment, Verdict
from recloop.embed import candidate_pool
from recloop.feedback import FeedbackEvent, GroupPolicyError
from recloop.session import (Group, SelfAssessment, Session, SessionOptions,
                             SessionStore, replay_session)
from recloop.sim import (SimulationConfig, SimulatedUser, run_simulated_session,
                         run_simulation, synthesize_session_eeg)


def onboarding(corpus, n=5, rating=None, seed=0):
    rng = np.random.default_rng(seed)
    ids = rng.choice(corpus.ids, size=n, replace=False)
    return [(int(i), rating if rating is not None else float(rng.uniform(1, 5)))
            for i in ids]


def make_session(corpus, latent, group=Group.FEEDBACK, seed=0, onb=None,
                 writer=None, **opts):
    options = SessionOptions(lime_samples=256, **opts)
    return Session("t1", group, seed, corpus, latent,
                   onb or onboarding(corpus), options=options,
                   log_writer=writer)


class TestCreateSession:
    def test_fixed_seed_identical_first_list(self, corpus, latent):
        onb = onboarding(corpus)
        a = make_session(corpus, latent, seed=11, onb=onb)
        b = Session("t2", Group.FEEDBACK, 11, corpus, latent, onb,
                    options=SessionOptions(lime_samples=256))
        assert [p.item_id for p in a.predictions] == \
               [p.item_id for p in b.predictions]

    def test_nonfeedback_payload_flags_sliders_read_only(self, corpus, latent):
        session = make_session(corpus, latent, group=Group.NONFEEDBACK)
        assert session.list_payload()["sliders_read_only"] is True
        detail = session.detail_payload(session.predictions[0].item_id)
        assert detail["sliders_read_only"] is True

    def test_uniform_onboarding_gives_single_leaf_and_latent_order(
            self, corpus, latent):
        onb = onboarding(corpus, rating=5.0)
        session = make_session(corpus, latent, onb=onb)
        assert session.tree.root.is_leaf
        pool_ids = [iid for iid, _ in session.pool]
        assert pool_ids == candidate_pool({i for i, _ in onb}, latent, 40)
        # constant predictions -> recommendation order equals pool id order
        assert [p.item_id for p in session.predictions] == sorted(pool_ids)[:20]

    def test_too_few_onboarding_rejected(self, corpus, latent):
        with pytest.raises(ValueError, match="5"):
            make_session(corpus, latent, onb=onboarding(corpus, n=3))

    def test_unknown_item_rejected(self, corpus, latent):
        bad = onboarding(corpus)[:4] + [(99999, 3.0)]
        with pytest.raises(ValueError, match="unknown"):
            make_session(corpus, latent, onb=bad)


class TestTrialFlow:
    def test_trial_increments_only_on_next(self, corpus, latent):
        session = make_session(corpus, latent)
        assert session.trial == 1
        session.mark_viewed(session.predictions[0].item_id)
        session.mark_satisfaction(session.predictions[0].item_id, Verdict.LIKE)
        assert session.trial == 1
        session.next_recommendations()
        assert session.trial == 2

    def test_consecutive_next_calls_identical_lists(self, corpus, latent):
        session = make_session(corpus, latent)
        first = [i["item_id"] for i in session.next_recommendations()["items"]]
        second = [i["item_id"] for i in session.next_recommendations()["items"]]
        assert first == second

    def test_payload_count_capped_by_pool(self, corpus, latent):
        session = make_session(corpus, latent, pool_size=12)
        assert len(session.list_payload()["items"]) == 12

    def test_detail_view_marks_viewed(self, corpus, latent):
        session = make_session(corpus, latent)
        item = session.predictions[3].item_id
        session.detail_payload(item)
        assert item in session.viewed


class TestFeedbackFlow:
    def pick_slider(self, session):
        item_id = session.predictions[0].item_id
        from recloop.explain import top_k
        return item_id, top_k(session.explanations_for(item_id), 6)[0]

    def test_nonfeedback_session_rejects_feedback(self, corpus, latent):
        session = make_session(corpus, latent, group=Group.NONFEEDBACK)
        item_id, slider = self.pick_slider(session)
        before = [p.item_id for p in session.predictions]
        with pytest.raises(GroupPolicyError):
            session.apply_feedback(FeedbackEvent(
                trial=1, item_id=item_id, feature=slider.feature,
                omega_before=slider.weight,
                omega_after=min(100.0, slider.weight + 10)))
        assert [p.item_id for p in session.predictions] == before

    def test_zero_delta_event_unrepresentable(self, corpus, latent):
        session = make_session(corpus, latent)
        item_id, slider = self.pick_slider(session)
        with pytest.raises(ValueError):
            FeedbackEvent(trial=1, item_id=item_id, feature=slider.feature,
                          omega_before=slider.weight, omega_after=slider.weight)

    def test_raising_shared_feature_lifts_carrier_ratings(self, corpus, latent):
        session = make_session(corpus, latent)
        item_id, slider = self.pick_slider(session)
        slot = corpus.encoding.slot_of(slider.feature)
        carriers = [iid for iid, enc in session.pool if enc[slot] > 0.5]
        before = np.mean([session.expected_rating(i) for i in carriers])
        session.apply_feedback(FeedbackEvent(
            trial=1, item_id=item_id, feature=slider.feature,
            omega_before=20.0, omega_after=90.0))
        after = np.mean([session.tree.predict_one(corpus.encode_item(i))
                         for i in carriers])
        assert after > before

    def test_failed_feedback_rolls_back(self, corpus, latent, monkeypatch):
        session = make_session(corpus, latent)
        item_id, slider = self.pick_slider(session)
        snapshot_tree = session.tree.to_json()
        snapshot_data = [(d.item_id, d.rating) for d in session.personal_data]

        def boom():
            raise RuntimeError("injected")
        monkeypatch.setattr(session, "rebuild", boom)
        with pytest.raises(RuntimeError, match="injected"):
            session.apply_feedback(FeedbackEvent(
                trial=1, item_id=item_id, feature=slider.feature,
                omega_before=20.0, omega_after=80.0))
        assert session.tree.to_json() == snapshot_tree
        assert [(d.item_id, d.rating) for d in session.personal_data] \
            == snapshot_data


class TestQuizAndEfficacy:
    def test_quiz_stable_within_trial(self, corpus, latent):
        session = make_session(corpus, latent)
        a = session.current_quiz()
        b = session.current_quiz()
        assert a is b

    def test_efficacy_roundtrip(self, corpus, latent):
        session = make_session(corpus, latent)
        for p in session.predictions[:7]:
            session.mark_satisfaction(p.item_id, Verdict.LIKE)
        quiz = session.current_quiz()
        answers = [{"judgment": Judgment.CORRECT.value
                    if q.is_genuine else Judgment.INCORRECT.value,
                    "confidence": 9.0} for q in quiz]
        session.submit_quiz(answers)
        score = session.efficacy_for()
        assert score.a == 7
        assert score.x == 9.0 * len(quiz)
        assert score.xi == pytest.approx(7.0)

    def test_assessment_stored(self, corpus, latent):
        session = make_session(corpus, latent)
        sa = SelfAssessment(trial=1, valence=6.0, dominance=5.0,
                            mental_demand=40.0, performance=70.0, effort=30.0,
                            frustration=20.0, efficacy_self_rating=7.0)
        session.submit_assessment(sa)
        assert session.assessment_for(1) == sa


class TestEventLogAndReplay:
    def run_scripted_session(self, corpus, latent, seed):
        rng = np.random.default_rng(seed)
        lines = []
        group = Group.FEEDBACK if rng.random() < 0.7 else Group.NONFEEDBACK
        session = Session(f"r{seed}", group, int(rng.integers(10 ** 6)),
                          corpus, latent, onboarding(corpus, seed=seed),
                          options=SessionOptions(lime_samples=256),
                          log_writer=lambda e: lines.append(json.dumps(e)))
        from recloop.explain import top_k
        for _ in range(int(rng.integers(2, 5))):
            for view_rank in range(2):
                # refetch the list each time; feedback may have reshuffled it
                current = session.predictions
                item_id = current[min(view_rank, len(current) - 1)].item_id
                session.detail_payload(item_id)
                if group == Group.FEEDBACK and rng.random() < 0.9:
                    slider = top_k(session.explanations_for(item_id), 6)[0]
                    target = float(np.clip(slider.weight + rng.integers(-40, 41),
                                           0, 100))
                    if target != slider.weight:
                        session.apply_feedback(FeedbackEvent(
                            trial=session.trial, item_id=item_id,
                            feature=slider.feature,
                            omega_before=slider.weight, omega_after=target))
            for p in session.predictions:
                if rng.random() < 0.5:
                    session.mark_satisfaction(
                        p.item_id,
                        Verdict.LIKE if rng.random() < 0.4 else Verdict.DISLIKE)
            quiz = session.current_quiz()
            session.submit_quiz([
                {"judgment": rng.choice([j.value for j in Judgment]),
                 "confidence": float(rng.integers(1, 10))} for _ in quiz])
            session.next_recommendations()
        return session, lines

    def test_replay_reproduces_final_state(self, corpus, latent):
        for seed in range(6):
            session, lines = self.run_scripted_session(corpus, latent, seed)
            replayed = replay_session(lines, corpus, latent)
            assert replayed.trial == session.trial
            assert [p.item_id for p in replayed.predictions] == \
                   [p.item_id for p in session.predictions]
            assert replayed.tree.to_json() == session.tree.to_json()
            assert [(d.item_id, d.rating) for d in replayed.personal_data] == \
                   [(d.item_id, d.rating) for d in session.personal_data]

    def test_event_kinds_cover_schema(self, corpus, latent):
        session, lines = self.run_scripted_session(corpus, latent, 99)
        kinds = {json.loads(l)["kind"] for l in lines}
        assert {"created", "recommended", "viewed", "satisfaction",
                "quiz"} <= kinds
        for line in lines:
            event = json.loads(line)
            assert set(event) == {"ts", "session", "trial", "kind", "payload"}


class TestSessionStore:
    def test_store_creates_and_logs(self, corpus, latent, tmp_path):
        store = SessionStore(corpus, latent, log_dir=tmp_path)
        session = store.create(Group.FEEDBACK, 5, onboarding(corpus),
                               options=SessionOptions(lime_samples=256))
        log = tmp_path / f"{session.id}.jsonl"
        assert log.exists()
        events = [json.loads(l) for l in log.read_text().splitlines()]
        assert events[0]["kind"] == "created"
        assert events[1]["kind"] == "recommended"
        assert store.get(session.id) is session
        with pytest.raises(KeyError):
            store.get("nope")


class TestSimulationHarness:
    def test_zero_trial_config_empty_report(self, corpus, latent):
        cfg = SimulationConfig(sessions_per_group=0, trials=0, seed=0)
        result = run_simulation(corpus, cfg, latent=latent)
        assert result.per_group[Group.FEEDBACK] == []
        assert "last_half_t" not in result.summary

    def test_simulated_session_deterministic(self, corpus, latent):
        cfg = SimulationConfig(trials=3, viewed_per_trial=2)
        a = run_simulated_session(corpus, latent, Group.FEEDBACK, 7, cfg)
        b = run_simulated_session(corpus, latent, Group.FEEDBACK, 7, cfg)
        assert [(t.a, t.x, t.xi) for t in a.trials] == \
               [(t.a, t.x, t.xi) for t in b.trials]

    def test_perfect_user_efficacy_non_decreasing_mean_curve(
            self, corpus, latent):
        from recloop.sim import SimUserConfig
        cfg = SimulationConfig(trials=10, viewed_per_trial=3,
                               user=SimUserConfig(eta=0.0, slider_step=1.0))
        curves = []
        for seed in range(20):
            res = run_simulated_session(corpus, latent, Group.FEEDBACK,
                                        seed, cfg)
            curves.append([t.xi for t in res.trials])
        mean_curve = np.array(curves).mean(axis=0)
        # harness-mean reading: the 20-seed average may wobble within the
        # discreteness of the like count but must never materially drop
        assert np.all(np.diff(mean_curve) >= -0.5)
        assert mean_curve[-3:].mean() >= mean_curve[:3].mean()

    def test_eeg_synthesis_shape(self):
        epochs = synthesize_session_eeg([2.0, 8.0, 15.0], seed=4)
        assert len(epochs) == 3
        assert epochs[0].samples.shape == (32, int(6.0 * 128))
        assert [e.trial_id for e in epochs] == [1, 2, 3]

    def test_simulated_user_deterministic(self, corpus):
        a = SimulatedUser(corpus, 9)
        b = SimulatedUser(corpus, 9)
        assert a.hidden == b.hidden
