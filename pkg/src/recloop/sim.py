"""Simulated-user harness: desk-scale surrogate for the human study.

Each simulated user holds hidden per-feature preference weights. They like
an item iff its hidden utility clears a threshold, move the detail sliders
toward their hidden weights (feedback group only), answer the quiz with an
accuracy that rises with how well the displayed explanations match their
hidden weights, and fill in plausible self-assessments. Running many such
sessions per group yields per-trial efficacy curves and the between-group
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import two_sample_t
from .catalog import Catalog, FeatureId
from .eeg import DEFAULT_CHANNELS, DEFAULT_SAMPLE_RATE, EegEpoch, Montage
from .efficacy import Judgment, Verdict
from .embed import LatentIndex, train_autoencoder
from .explain import top_k
from .feedback import FeedbackEvent
from .recommend import clamp_rating
from .session import (Group, SelfAssessment, Session, SessionOptions,
                      derive_seed)

_SEED_USER = 11
_SEED_EEG = 23


@dataclass
class SimUserConfig:
    tau: float = 3.5           # like threshold on the hidden utility
    eta: float = 0.2           # quiz noise rate
    slider_step: float = 0.5   # fraction of the gap each slider move closes
    min_slider_gap: float = 20.0  # only correct sliders that feel clearly wrong
    genre_affinity: float = 0.65  # p(high weight) for preferred-taste genres
    genre_aversion: float = 0.05  # p(high weight) for the rest
    tag_affinity: float = 0.45
    max_corrections_per_feature: int = 2  # then the user accepts the display


class SimulatedUser:
    """Deterministic synthetic participant with hidden feature preferences.

    Genre taste is coherent: the user anchors on a random item and favours
    the genres that co-occur with the anchor's genres anywhere in the
    catalog (one co-occurrence hop), so structured corpora yield users who
    prefer one region of the item space.
    """

    def __init__(self, catalog: Catalog, seed: int,
                 config: SimUserConfig | None = None):
        self.catalog = catalog
        self.config = config or SimUserConfig()
        self.rng = np.random.default_rng(seed)
        features = sorted({fid for item in catalog.items.values()
                           for fid in item.features})
        self.preferred_genres = self._preferred_genres(features)
        self.hidden: dict[FeatureId, float] = {}
        for fid in features:
            if fid.is_genre:
                p_high = (self.config.genre_affinity
                          if fid in self.preferred_genres
                          else self.config.genre_aversion)
            else:
                p_high = self.config.tag_affinity
            if self.rng.random() < p_high:
                self.hidden[fid] = float(self.rng.uniform(80, 100))
            else:
                self.hidden[fid] = float(self.rng.uniform(0, 25))
        self._normalize_taste()
        self._corrections: dict[FeatureId, int] = {}

    def _normalize_taste(self) -> None:
        """Shift hidden weights so the median item in the user's preferred
        region sits at the like threshold (raters self-normalize), keeping
        the reachable satisfaction ceiling comparable across users."""
        region = [i for i in self.catalog.ids
                  if self.catalog.item(i).features & self.preferred_genres]
        if len(region) < 10:
            region = list(self.catalog.ids)
        utils = np.array([self.utility(i) for i in region])
        shift_rating = self.config.tau + 0.02 - float(np.median(utils))
        shift = shift_rating * 100.0 / 4.5
        for fid in self.hidden:
            self.hidden[fid] = float(min(100.0, max(0.0, self.hidden[fid] + shift)))

    def _preferred_genres(self, features: list[FeatureId]) -> set[FeatureId]:
        ids = sorted(self.catalog.ids)
        anchor = self.catalog.item(ids[int(self.rng.integers(len(ids)))])
        anchor_genres = {f for f in anchor.features if f.is_genre}
        preferred = set(anchor_genres)
        for item in self.catalog.items.values():
            genres = {f for f in item.features if f.is_genre}
            if genres & anchor_genres:
                preferred |= genres
        return preferred

    def utility(self, item_id: int) -> float:
        feats = self.catalog.item(item_id).features
        mean_w = float(np.mean([self.hidden[f] for f in feats]))
        return 0.5 + 4.5 * mean_w / 100.0

    def likes(self, item_id: int) -> bool:
        return self.utility(item_id) >= self.config.tau

    def onboarding(self, count: int = 12,
                   rating_noise: float = 0.6) -> list[tuple[int, float]]:
        """Seed ratings: a browse weighted toward the user's taste region
        (people mostly watch within their taste), rated with the usual
        star-rating sloppiness."""
        ids = sorted(self.catalog.ids)
        region = [i for i in ids
                  if self.catalog.item(i).features & self.preferred_genres]
        other = [i for i in ids if i not in set(region)]
        n_region = min(len(region), int(round(count * 2 / 3)))
        chosen = list(self.rng.choice(region, size=n_region, replace=False))
        rest = other if other else region
        chosen += list(self.rng.choice(
            [i for i in rest if i not in set(chosen)],
            size=count - n_region, replace=False))
        return [(int(i), clamp_rating(self.utility(int(i))
                                      + self.rng.normal(0, rating_noise)))
                for i in chosen]

    def _looks_wrong(self, feature: FeatureId, weight: float) -> bool:
        """Sign disagreement: liked feature shown as weak, or disliked
        feature shown as influential."""
        hidden = self.hidden[feature]
        return (hidden >= 70 and weight < 40) or (hidden <= 30 and weight > 60)

    def slider_target(self, feature: FeatureId, omega_before: float) -> float | None:
        """New slider position, or None when the user leaves it alone.

        Users act on clear sign disagreements only, and give up on a slider
        they have already corrected a few times: at that point they accept
        the model reasons that way, which is understanding, not agreement.
        """
        if self._corrections.get(feature, 0) >= self.config.max_corrections_per_feature:
            return None
        if not self._looks_wrong(feature, omega_before):
            return None
        omega_after = round(omega_before
                            + self.config.slider_step * (self.hidden[feature]
                                                         - omega_before))
        omega_after = float(min(100, max(0, omega_after)))
        if omega_after == omega_before:
            return None
        self._corrections[feature] = self._corrections.get(feature, 0) + 1
        return omega_after

    def alignment(self, sliders) -> float:
        """How well the user can read the displayed reasoning, in [0, 1].

        A slider reads as opaque when it disagrees in sign with the hidden
        taste and the user has not yet probed it to exhaustion; features
        they have corrected repeatedly are understood even if disagreeable.
        """
        if not sliders:
            return 0.0
        opaque = 0
        for s in sliders:
            probed = (self._corrections.get(s.feature, 0)
                      >= self.config.max_corrections_per_feature)
            if self._looks_wrong(s.feature, s.weight) and not probed:
                opaque += 1
        return 1.0 - opaque / len(sliders)

    def quiz_accuracy(self, align: float) -> float:
        """Correct-answer probability, rising from chance with alignment;
        eta caps how close a fully aligned user gets to certainty."""
        p = 0.5 + (0.5 - self.config.eta) * align
        return float(min(1.0, max(0.0, p)))

    def answer_quiz(self, quiz, align: float) -> list[dict]:
        p = self.quiz_accuracy(align)
        confidence = float(min(9, max(1, round(1 + 8 * align))))
        answers = []
        for item in quiz:
            truthful = Judgment.CORRECT if item.is_genuine else Judgment.INCORRECT
            flipped = (Judgment.INCORRECT if truthful == Judgment.CORRECT
                       else Judgment.CORRECT)
            judgment = truthful if self.rng.random() < p else flipped
            answers.append({"judgment": judgment.value, "confidence": confidence})
        return answers

    def assessment(self, trial: int, xi: float, align: float) -> SelfAssessment:
        def clip(v, lo, hi):
            return float(min(hi, max(lo, v)))
        noise = self.rng.normal(0, 0.6, size=7)
        score9 = 1 + 8 * min(1.0, xi / 10.0)
        return SelfAssessment(
            trial=trial,
            valence=clip(score9 + noise[0], 1, 9),
            dominance=clip(1 + 8 * align + noise[1], 1, 9),
            mental_demand=clip(70 - 40 * align + 8 * noise[2], 0, 100),
            performance=clip(20 + 70 * min(1.0, xi / 10.0) + 8 * noise[3], 0, 100),
            effort=clip(65 - 35 * align + 8 * noise[4], 0, 100),
            frustration=clip(55 - 35 * align + 8 * noise[5], 0, 100),
            efficacy_self_rating=clip(score9 + noise[6], 1, 9),
        )


@dataclass
class TrialRecord:
    trial: int
    a: int
    x: float
    xi: float
    alignment: float


@dataclass
class SessionResult:
    session_id: str
    group: Group
    trials: list[TrialRecord]

    def xi_curve(self) -> list[float]:
        return [t.xi for t in self.trials]


@dataclass
class SimulationConfig:
    sessions_per_group: int = 30
    trials: int = 10
    seed: int = 0
    onboarding_count: int = 12
    viewed_per_trial: int = 2
    max_slider_moves: int = 6
    lime_samples: int = 256
    embed_epochs: int = 300
    embed_seed: int = 0
    user: SimUserConfig = field(default_factory=SimUserConfig)
    options: SessionOptions | None = None

    def session_options(self) -> SessionOptions:
        if self.options is not None:
            return self.options
        return SessionOptions(lime_samples=self.lime_samples)


@dataclass
class SimulationResult:
    per_group: dict[Group, list[SessionResult]]
    summary: dict

    def xi_matrix(self, group: Group) -> np.ndarray:
        return np.array([[t.xi for t in s.trials] for s in self.per_group[group]])


def build_latent(catalog: Catalog, epochs: int = 300, seed: int = 0) -> LatentIndex:
    model, _ = train_autoencoder(catalog.encoded_matrix(), epochs=epochs, seed=seed)
    return LatentIndex.build(model, catalog)


def run_simulated_session(catalog: Catalog, latent: LatentIndex, group: Group,
                          seed: int, config: SimulationConfig,
                          log_writer=None, session_id: str | None = None,
                          ) -> SessionResult:
    user = SimulatedUser(catalog, derive_seed(seed, _SEED_USER),
                         config=config.user)
    session = Session(session_id or f"sim-{group.value}-{seed}", group, seed,
                      catalog, latent,
                      user.onboarding(config.onboarding_count),
                      options=config.session_options(), log_writer=log_writer)
    records = []
    for trial_no in range(1, config.trials + 1):
        if trial_no > 1:
            session.next_recommendations()

        # Study the top of the list; the feedback group corrects sliders.
        align_samples = []
        viewed = [p.item_id for p in
                  session.predictions[: config.viewed_per_trial]]
        for item_id in viewed:
            session.mark_viewed(item_id)
            sliders = top_k(session.explanations_for(item_id),
                            session.options.detail_top)
            if group == Group.FEEDBACK:
                moves = 0
                for s in sliders:
                    if moves >= config.max_slider_moves:
                        break
                    target = user.slider_target(s.feature, s.weight)
                    if target is None:
                        continue
                    session.apply_feedback(FeedbackEvent(
                        trial=session.trial, item_id=item_id,
                        feature=s.feature, omega_before=s.weight,
                        omega_after=target))
                    moves += 1
                # Re-read the sliders the user now sees.
                sliders = top_k(session.explanations_for(item_id),
                                session.options.detail_top)
            align_samples.append(user.alignment(sliders))
        align = float(np.mean(align_samples)) if align_samples else 0.0

        for p in session.predictions:
            verdict = Verdict.LIKE if user.likes(p.item_id) else Verdict.DISLIKE
            session.mark_satisfaction(p.item_id, verdict)

        quiz = session.current_quiz()
        session.submit_quiz(user.answer_quiz(quiz, align))
        score = session.efficacy_for()
        session.submit_assessment(user.assessment(session.trial, score.xi, align))
        records.append(TrialRecord(trial=session.trial, a=score.a, x=score.x,
                                   xi=score.xi, alignment=align))
    return SessionResult(session_id=session.id, group=group, trials=records)


def run_simulation(catalog: Catalog, config: SimulationConfig,
                   latent: LatentIndex | None = None,
                   log_writer_factory=None) -> SimulationResult:
    """Run both groups and summarize the between-group efficacy comparison."""
    if latent is None:
        latent = build_latent(catalog, epochs=config.embed_epochs,
                              seed=config.embed_seed)
    # Both groups run the same simulated-user population (common random
    # numbers): session i of each group shares one seed, so the between-user
    # taste variance cancels from the group contrast.
    per_group: dict[Group, list[SessionResult]] = {}
    for group in (Group.FEEDBACK, Group.NONFEEDBACK):
        results = []
        for i in range(config.sessions_per_group):
            seed = derive_seed(config.seed, i)
            sid = f"{group.value}-{i:03d}"
            writer = log_writer_factory(sid) if log_writer_factory else None
            results.append(run_simulated_session(
                catalog, latent, group, seed, config,
                log_writer=writer, session_id=sid))
        per_group[group] = results

    summary: dict = {"trials": config.trials,
                     "sessions_per_group": config.sessions_per_group}
    if config.trials >= 1 and config.sessions_per_group >= 2:
        half = max(1, config.trials // 2)
        stats = {}
        for group, results in per_group.items():
            xi = np.array([[t.xi for t in s.trials] for s in results])
            stats[group] = xi
            summary[f"{group.value}_first_half_mean"] = float(xi[:, :half].mean())
            summary[f"{group.value}_last_half_mean"] = float(xi[:, -half:].mean())
        fb_last = stats[Group.FEEDBACK][:, -half:].mean(axis=1)
        nf_last = stats[Group.NONFEEDBACK][:, -half:].mean(axis=1)
        t, p = two_sample_t(fb_last, nf_last)
        summary["last_half_t"] = t
        summary["last_half_p"] = p
        t_fin, p_fin = two_sample_t(stats[Group.FEEDBACK][:, -1],
                                    stats[Group.NONFEEDBACK][:, -1])
        summary["final_trial_t"] = t_fin
        summary["final_trial_p"] = p_fin
    elif config.trials == 0:
        summary["note"] = "zero-trial config; nothing to report"
    return SimulationResult(per_group=per_group, summary=summary)


def _hemisphere(channel: str) -> str:
    last = channel[-1]
    if last.isdigit():
        return "left" if int(last) % 2 == 1 else "right"
    return "mid"


def synthesize_session_eeg(xi_curve: list[float], seed: int,
                           sample_rate: float = DEFAULT_SAMPLE_RATE,
                           duration_s: float = 6.0,
                           channels: list[str] | None = None) -> list[EegEpoch]:
    """Synthetic per-trial EEG whose left/right contrast tracks efficacy.

    Left-hemisphere alpha and beta amplitudes scale up with the trial's
    normalized efficacy, so asymmetry features carry recoverable signal.
    """
    channels = channels or list(DEFAULT_CHANNELS)
    rng = np.random.default_rng(derive_seed(seed, _SEED_EEG))
    n = int(duration_s * sample_rate)
    t = np.arange(n) / sample_rate
    epochs = []
    for trial_no, xi in enumerate(xi_curve, start=1):
        z = min(1.0, max(0.0, xi / 20.0))
        rows = []
        for ch in channels:
            side = _hemisphere(ch)
            gain = 1.0 + (1.5 * z if side == "left" else -0.3 * z if side == "right" else 0.0)
            alpha_amp = 4.0 * gain
            beta_amp = 2.5 * gain
            phase = rng.uniform(0, 2 * np.pi, size=2)
            signal = (alpha_amp * np.sin(2 * np.pi * 10.0 * t + phase[0])
                      + beta_amp * np.sin(2 * np.pi * 20.0 * t + phase[1])
                      + rng.normal(0, 6.0, size=n))
            rows.append(signal)
        epochs.append(EegEpoch(samples=np.array(rows), sample_rate=sample_rate,
                               channel_names=list(channels), trial_id=trial_no))
    return epochs


def default_montage() -> Montage:
    return Montage()
