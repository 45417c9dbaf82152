"""recloop: an interactive explainable-recommendation loop with efficacy
scoring and an EEG feature/classification pipeline."""

from .catalog import (Catalog, FeatureEncoding, FeatureId, FeatureKind, Item,
                      encode, load_catalog, synthetic_corpus)
from .efficacy import (EfficacyScore, Judgment, LogisticMode, QuizItem,
                       SatisfactionMark, Verdict, efficacy, generate_quiz,
                       satisfaction_count, understanding_score)
from .embed import (AdamState, Autoencoder, LatentIndex, adam_step,
                    candidate_pool, train_autoencoder)
from .explain import Explanation, LimeConfig, explain_item, top_k
from .feedback import (FeedbackEvent, GroupPolicyError, RatingAdjustment,
                       apply_feedback_and_retrain, compute_adjustment,
                       propagate)
from .recommend import (PersonalDatum, Prediction, RegressionTree, fit_tree,
                        recommend)
from .session import (Group, SelfAssessment, Session, SessionOptions,
                      SessionStore, replay_session)

__version__ = "0.1.0"
