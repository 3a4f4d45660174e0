"""Interactive refinement sessions: rank, show top-k, rerank, retrain.

One session binds a user to a catalog. The state machine is

    awaiting_favorites -> awaiting_feedback -> (awaiting_feedback)*
                       -> satisfied -> finalized

with no back edges; feedback that leaves the shown prefix unchanged (or
carries an explicit satisfied flag) short-circuits to ``satisfied``.
Deleted items are excluded from retrieval candidates, so they never
re-enter the training pool or any later ranking. Every mutation appends
to an event list from which the session replays deterministically.
"""

from __future__ import annotations

import dataclasses
import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .attributes import AttributeModelBank
from .catalog import Catalog, EngineConfig, UnknownItemError
from .ranking import RankedList, RankingModel, derive_pairs, score_items, train
from .retrieval import build_training_pool, retrieve_neighbors
from .taste import UserAestheticDistribution, build_user_distribution


class SessionStateError(RuntimeError):
    """Operation not allowed in the session's current status."""


class FeedbackError(ValueError):
    """Feedback payload references items outside the shown prefix."""


class ConcurrentSessionError(RuntimeError):
    """A second writer tried to mutate a session mid-operation."""


class SessionStatus(str, Enum):
    AWAITING_FAVORITES = "awaiting_favorites"
    AWAITING_FEEDBACK = "awaiting_feedback"
    SATISFIED = "satisfied"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class RerankFeedback:
    """User's reordering of the shown prefix plus optional deletions."""

    ordered_prefix: tuple[str, ...]
    deletions: frozenset[str] = frozenset()
    satisfied: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordered_prefix", tuple(self.ordered_prefix))
        object.__setattr__(self, "deletions", frozenset(self.deletions))
        if len(set(self.ordered_prefix)) != len(self.ordered_prefix):
            raise FeedbackError("ordered_prefix contains duplicate ids")
        overlap = set(self.ordered_prefix) & self.deletions
        if overlap:
            raise FeedbackError(
                f"ids cannot be both kept and deleted: {sorted(overlap)}"
            )


@dataclass
class Session:
    session_id: str
    config: EngineConfig
    catalog: Catalog = field(repr=False)
    favorite_ids: list[str] = field(default_factory=list)
    iteration: int = 0
    current_ranking: Optional[RankedList] = None
    model_history: list[str] = field(default_factory=list)
    status: SessionStatus = SessionStatus.AWAITING_FAVORITES
    usad: Optional[UserAestheticDistribution] = None
    deleted_ids: set[str] = field(default_factory=set)
    candidate_ids: Optional[tuple[str, ...]] = None
    model: Optional[RankingModel] = field(default=None, repr=False)
    events: list[dict] = field(default_factory=list)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def shown_prefix(self) -> list[str]:
        if self.current_ranking is None:
            return []
        return self.current_ranking.top(self.config.k)


def _acquire(session: Session) -> None:
    if not session._lock.acquire(blocking=False):
        raise ConcurrentSessionError(
            f"session {session.session_id} is being mutated by another caller"
        )


def _retrieval_candidates(session: Session) -> Optional[list[str]]:
    base = (
        list(session.candidate_ids)
        if session.candidate_ids is not None
        else session.catalog.ids()
    )
    return [i for i in base if i not in session.deleted_ids]


def _run_pipeline(session: Session, generation: int) -> None:
    cfg = session.config
    results = retrieve_neighbors(
        session.catalog,
        session.favorite_ids,
        cfg,
        candidate_ids=_retrieval_candidates(session),
    )
    pool = build_training_pool(results, session.favorite_ids)
    pool = [i for i in pool if i not in session.deleted_ids]
    pairs = derive_pairs(pool, seed=cfg.rng_seed + generation)
    model = train(session.catalog, pairs, cfg)
    session.model = model
    session.model_history.append(model.fingerprint())
    session.current_ranking = score_items(
        model, session.catalog, pool, generation=generation
    )


def start_session(
    catalog: Catalog,
    cfg: EngineConfig,
    favorite_ids: Sequence[str],
    session_id: Optional[str] = None,
    candidate_ids: Optional[Sequence[str]] = None,
) -> Session:
    """Create a session from exactly ``cfg.m`` favorite items.

    Retrieves neighbors of each favorite, trains the initial ranker on the
    ordered pool and returns the session awaiting feedback with its
    generation-0 ranking. ``candidate_ids`` restricts retrieval (used by
    evaluation splits); favorites must be inside it when given.
    """
    favorites = [str(f) for f in favorite_ids]
    if len(favorites) != cfg.m:
        raise ValueError(
            f"expected exactly m={cfg.m} favorites, got {len(favorites)}"
        )
    if len(set(favorites)) != len(favorites):
        raise ValueError("favorite ids must be distinct")
    for fav in favorites:
        if fav not in catalog:
            raise UnknownItemError(f"unknown favorite id: {fav!r}")

    session = Session(
        session_id=session_id or uuid.uuid4().hex,
        config=cfg,
        catalog=catalog,
        favorite_ids=favorites,
        candidate_ids=tuple(candidate_ids) if candidate_ids is not None else None,
    )
    session.events.append(
        {
            "type": "started",
            "session_id": session.session_id,
            "config": dataclasses.asdict(cfg),
            "favorites": list(favorites),
            "candidate_ids": list(candidate_ids) if candidate_ids is not None else None,
        }
    )
    _run_pipeline(session, generation=0)
    session.status = SessionStatus.AWAITING_FEEDBACK
    return session


def submit_feedback(session: Session, feedback: RerankFeedback) -> Session:
    """Apply one rerank/delete round and retrain, or mark satisfaction.

    Unchanged prefix order with no deletions (or an explicit satisfied
    flag) moves the session to ``satisfied`` without retraining. Otherwise
    the reordered prefix becomes the new favorites, deletions are banned
    from all future pools, and the pipeline reruns at generation+1.
    """
    _acquire(session)
    try:
        if session.status is not SessionStatus.AWAITING_FEEDBACK:
            raise SessionStateError(
                f"cannot submit feedback in status {session.status.value!r}"
            )
        shown = session.shown_prefix()
        shown_set = set(shown)
        stray = [i for i in feedback.ordered_prefix if i not in shown_set]
        stray += [i for i in feedback.deletions if i not in shown_set]
        if stray:
            raise FeedbackError(
                f"feedback references items outside the shown top-{session.config.k}: "
                f"{sorted(set(stray))}"
            )

        identity = (
            list(feedback.ordered_prefix) == shown and not feedback.deletions
        )
        if feedback.satisfied or identity:
            session.events.append(_feedback_event(feedback))
            session.status = SessionStatus.SATISFIED
            return session

        if session.iteration >= session.config.max_iterations:
            raise SessionStateError(
                f"interaction budget exhausted "
                f"({session.config.max_iterations} iterations)"
            )

        kept = [i for i in shown if i not in feedback.deletions]
        new_favorites = list(feedback.ordered_prefix)
        for item in kept:  # pad with un-mentioned shown items, original order
            if item not in new_favorites:
                new_favorites.append(item)
        new_favorites = new_favorites[: session.config.k]
        if not new_favorites:
            raise FeedbackError("feedback removed every shown item; nothing to keep")

        session.events.append(_feedback_event(feedback))
        session.deleted_ids.update(feedback.deletions)
        session.favorite_ids = new_favorites
        session.iteration += 1
        _run_pipeline(session, generation=session.iteration)
        return session
    finally:
        session._lock.release()


def _feedback_event(feedback: RerankFeedback) -> dict:
    return {
        "type": "feedback_submitted",
        "ordered_prefix": list(feedback.ordered_prefix),
        "deletions": sorted(feedback.deletions),
        "satisfied": feedback.satisfied,
    }


def finalize(session: Session, bank: AttributeModelBank, catalog: Catalog) -> Session:
    """Build the user's taste distribution from the current ranking."""
    _acquire(session)
    try:
        if session.status not in (
            SessionStatus.AWAITING_FEEDBACK,
            SessionStatus.SATISFIED,
        ):
            raise SessionStateError(
                f"cannot finalize in status {session.status.value!r}"
            )
        assert session.current_ranking is not None
        session.usad = build_user_distribution(session.current_ranking, bank, catalog)
        session.status = SessionStatus.FINALIZED
        session.events.append({"type": "finalized"})
        return session
    finally:
        session._lock.release()


def replay_session(
    events: Sequence[dict],
    catalog: Catalog,
    bank: Optional[AttributeModelBank] = None,
) -> Session:
    """Rebuild a session by re-running its event log.

    The pipeline is deterministic, so the replayed session carries bitwise
    identical rankings and model weights.
    """
    if not events or events[0].get("type") != "started":
        raise ValueError("event log must begin with a 'started' event")
    first = events[0]
    cfg = EngineConfig(**first["config"])
    session = start_session(
        catalog,
        cfg,
        first["favorites"],
        session_id=first["session_id"],
        candidate_ids=first["candidate_ids"],
    )
    for event in events[1:]:
        kind = event.get("type")
        if kind == "feedback_submitted":
            submit_feedback(
                session,
                RerankFeedback(
                    ordered_prefix=tuple(event["ordered_prefix"]),
                    deletions=frozenset(event["deletions"]),
                    satisfied=bool(event.get("satisfied", False)),
                ),
            )
        elif kind == "finalized":
            if bank is None:
                raise ValueError("replaying a finalized session requires the bank")
            finalize(session, bank, catalog)
        else:
            raise ValueError(f"unknown event type: {kind!r}")
    return session
