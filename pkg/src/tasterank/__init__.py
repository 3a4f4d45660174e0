"""tasterank: interactive personalized aesthetic ranking.

Pipeline: a user picks favorite items, nearest-neighbor retrieval grows a
personal training pool, a pairwise soft-margin ranker learns a linear
preference, rerank/delete feedback refines it, and the refined ranking is
collapsed into a distribution over aesthetic attributes that scores and
ranks unseen items by correlation.
"""

from .attributes import (
    AttributeDistribution,
    AttributeModelBank,
    AttributeTrainingError,
    classify,
    train_bank,
)
from .catalog import (
    DEFAULT_ATTRIBUTES,
    Catalog,
    CatalogValidationError,
    EngineConfig,
    ItemRecord,
    UnknownItemError,
    validate_catalog,
)
from .datasets import (
    extract_toy_features,
    generate_synthetic,
    load_bank,
    load_catalog,
    load_model,
    load_session_events,
    load_usad,
    save_bank,
    save_catalog,
    save_model,
    save_session_events,
    save_usad,
)
from .evaluation import (
    RankCorrelationReport,
    SimulatedUser,
    SweepResult,
    make_attribute_user,
    pairwise_accuracy,
    parameter_sweep,
    simulate_session,
    spearman_rho,
    sweep_to_csv,
    sweep_to_json,
)
from .ranking import (
    PreferencePair,
    RankedList,
    RankingModel,
    derive_pairs,
    score_items,
    train,
)
from .retrieval import RetrievalResult, build_training_pool, retrieve_neighbors
from .session import (
    RerankFeedback,
    Session,
    SessionStateError,
    SessionStatus,
    FeedbackError,
    finalize,
    replay_session,
    start_session,
    submit_feedback,
)
from .taste import (
    ScoredItem,
    UserAestheticDistribution,
    build_user_distribution,
    rank_test_set,
    score_against,
    score_test_items,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeDistribution",
    "AttributeModelBank",
    "AttributeTrainingError",
    "Catalog",
    "CatalogValidationError",
    "DEFAULT_ATTRIBUTES",
    "EngineConfig",
    "FeedbackError",
    "ItemRecord",
    "PreferencePair",
    "RankCorrelationReport",
    "RankedList",
    "RankingModel",
    "RerankFeedback",
    "RetrievalResult",
    "ScoredItem",
    "Session",
    "SessionStateError",
    "SessionStatus",
    "SimulatedUser",
    "SweepResult",
    "UnknownItemError",
    "UserAestheticDistribution",
    "build_training_pool",
    "build_user_distribution",
    "classify",
    "derive_pairs",
    "extract_toy_features",
    "finalize",
    "generate_synthetic",
    "load_bank",
    "load_catalog",
    "load_model",
    "load_session_events",
    "load_usad",
    "make_attribute_user",
    "pairwise_accuracy",
    "parameter_sweep",
    "rank_test_set",
    "replay_session",
    "retrieve_neighbors",
    "save_bank",
    "save_catalog",
    "save_model",
    "save_session_events",
    "save_usad",
    "score_against",
    "score_items",
    "score_test_items",
    "simulate_session",
    "spearman_rho",
    "start_session",
    "submit_feedback",
    "sweep_to_csv",
    "sweep_to_json",
    "train",
    "train_bank",
    "validate_catalog",
]
