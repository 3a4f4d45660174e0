"""Rank metrics and the simulated-user evaluation harness.

Spearman's rho uses the closed form 1 - 6*sum(d^2)/(n^3 - n) on tie-free
rankings and falls back to Pearson over average ranks when scores tie.
The harness replaces human raters with an oracle user holding a hidden
preference direction: it picks favorites, answers every rerank request by
sorting the shown prefix under its (optionally noisy) scores, and the
final taste-based ranking of a held-out split is compared against the
oracle's true ordering.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .attributes import AttributeModelBank
from .catalog import Catalog, EngineConfig
from .ranking import RankedList, make_ranked_list
from .session import RerankFeedback, SessionStatus, finalize, start_session, submit_feedback
from .taste import rank_test_set


@dataclass(frozen=True)
class RankCorrelationReport:
    rho: float
    n: int
    d_squared_sum: float
    tie_adjusted: bool


@dataclass(frozen=True)
class SimulatedUser:
    """Oracle user: hidden linear preference plus judgment noise."""

    hidden_weights: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        w = np.asarray(self.hidden_weights, dtype=np.float64)
        object.__setattr__(self, "hidden_weights", w)
        if not np.any(w != 0):
            raise ValueError("hidden_weights must be nonzero")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class SweepCell:
    mean_rho: float
    std_rho: float
    repetitions: int
    feasible: bool = True


@dataclass(frozen=True)
class SweepResult:
    grid: dict[tuple[int, int], SweepCell]
    m_values: tuple[int, ...]
    interaction_values: tuple[int, ...]


def _positions(ranking: RankedList) -> dict[str, int]:
    return {item_id: pos + 1 for pos, (item_id, _) in enumerate(ranking.entries)}


def _check_same_ids(rank_a: RankedList, rank_b: RankedList) -> None:
    ids_a, ids_b = set(rank_a.ids()), set(rank_b.ids())
    if ids_a != ids_b:
        diff = sorted(ids_a.symmetric_difference(ids_b))
        raise ValueError(f"rankings cover different id sets; difference: {diff}")


def _has_score_ties(ranking: RankedList) -> bool:
    scores = [score for _, score in ranking.entries]
    return len(set(scores)) != len(scores)


def spearman_rho(rank_a: RankedList, rank_b: RankedList) -> RankCorrelationReport:
    """Rank correlation between two rankings over the same ids.

    Tie-free rankings use the exact closed form; with score ties, average
    ranks are assigned and rho is the Pearson correlation of the rank
    vectors (tie_adjusted flags this path).
    """
    _check_same_ids(rank_a, rank_b)
    n = len(rank_a)
    if n < 2:
        raise ValueError("need at least 2 items for a rank correlation")

    tie_adjusted = _has_score_ties(rank_a) or _has_score_ties(rank_b)
    ids = rank_a.ids()
    if not tie_adjusted:
        pos_a = _positions(rank_a)
        pos_b = _positions(rank_b)
        d2 = float(sum((pos_a[i] - pos_b[i]) ** 2 for i in ids))
        rho = 1.0 - 6.0 * d2 / (n**3 - n)
        return RankCorrelationReport(rho=rho, n=n, d_squared_sum=d2, tie_adjusted=False)

    score_a = {i: s for i, s in rank_a.entries}
    score_b = {i: s for i, s in rank_b.entries}
    ranks_a = rankdata([-score_a[i] for i in ids], method="average")
    ranks_b = rankdata([-score_b[i] for i in ids], method="average")
    d2 = float(((ranks_a - ranks_b) ** 2).sum())
    rho = float(np.corrcoef(ranks_a, ranks_b)[0, 1])
    return RankCorrelationReport(rho=rho, n=n, d_squared_sum=d2, tie_adjusted=True)


def pairwise_accuracy(predicted: RankedList, truth: RankedList) -> float:
    """Fraction of unordered id pairs ranked the same way in both lists."""
    _check_same_ids(predicted, truth)
    ids = predicted.ids()
    n = len(ids)
    if n < 2:
        raise ValueError("need at least 2 items for pairwise accuracy")
    pos_p = _positions(predicted)
    pos_t = _positions(truth)
    agree = 0
    total = 0
    for a in range(n):
        for b in range(a + 1, n):
            i, j = ids[a], ids[b]
            total += 1
            if (pos_p[i] - pos_p[j]) * (pos_t[i] - pos_t[j]) > 0:
                agree += 1
    return agree / total


def make_attribute_user(
    catalog: Catalog,
    seed: int,
    noise_sigma: float = 0.0,
    mixture_size: int = 1,
) -> SimulatedUser:
    """Oracle whose taste follows one (or a few) labeled attributes.

    The hidden direction is the mean feature vector of the items carrying
    a seeded choice of attribute labels; this keeps the oracle's
    preference inside the span the taste distribution can represent.
    """
    rng = np.random.default_rng(seed)
    vocab = catalog.attribute_vocabulary
    means = []
    for name in vocab:
        rows = [
            item.features
            for item in catalog.items
            if item.attribute_labels and name in item.attribute_labels
        ]
        means.append(np.mean(rows, axis=0) if rows else np.zeros(catalog.dim))
    means = np.stack(means)
    usable = [a for a in range(len(vocab)) if np.any(means[a] != 0)]
    if not usable:
        raise ValueError("catalog has no labeled items to anchor an oracle user")
    picks = rng.choice(usable, size=min(mixture_size, len(usable)), replace=False)
    coeffs = np.concatenate([[1.0], rng.uniform(0.3, 0.7, size=len(picks) - 1)])
    direction = coeffs @ means[picks]
    direction = direction / np.linalg.norm(direction)
    return SimulatedUser(hidden_weights=direction, noise_sigma=noise_sigma, seed=seed)


def simulate_session(
    catalog: Catalog,
    bank: AttributeModelBank,
    cfg: EngineConfig,
    user: SimulatedUser,
    test_fraction: float = 0.5,
) -> RankCorrelationReport:
    """Run one full oracle-driven session and report rank correlation.

    The catalog splits into held-out test items and candidates; the oracle
    picks its top-m candidates under noisy scores (as an unordered set:
    selection carries no ranking), answers up to ``max_iterations`` rerank
    requests by sorting the shown prefix, and the finalized taste profile
    ranks the test split. Reported rho compares that ranking with the
    oracle's noise-free ordering.
    """
    n = len(catalog)
    ids = np.array(catalog.ids())
    rng = np.random.default_rng(user.seed)
    perm = rng.permutation(n)
    n_test = max(2, int(round(n * test_fraction)))
    if n - n_test < cfg.m:
        raise ValueError(
            f"catalog too small: {n - n_test} candidates cannot seed m={cfg.m} favorites"
        )
    test_ids = [str(i) for i in ids[perm[:n_test]]]
    candidate_ids = [str(i) for i in ids[perm[n_test:]]]

    true_scores = {
        str(item.id): float(item.features @ user.hidden_weights)
        for item in catalog.items
    }

    def noisy(scored_ids: Sequence[str]) -> np.ndarray:
        base = np.array([true_scores[i] for i in scored_ids])
        if user.noise_sigma > 0:
            base = base + rng.normal(0.0, user.noise_sigma, size=len(scored_ids))
        return base

    picks = noisy(candidate_ids)
    order = np.lexsort((np.array(candidate_ids), -picks))
    favorites = sorted(candidate_ids[i] for i in order[: cfg.m])

    session = start_session(
        catalog,
        cfg,
        favorites,
        session_id=f"sim-{user.seed}",
        candidate_ids=candidate_ids,
    )
    while (
        session.status is SessionStatus.AWAITING_FEEDBACK
        and session.iteration < cfg.max_iterations
    ):
        shown = session.shown_prefix()
        judged = noisy(shown)
        reorder = np.lexsort((np.array(shown), -judged))
        prefix = tuple(shown[i] for i in reorder)
        submit_feedback(session, RerankFeedback(ordered_prefix=prefix))

    finalize(session, bank, catalog)
    assert session.usad is not None
    predicted = rank_test_set(session.usad, bank, catalog, test_ids)
    truth = make_ranked_list(
        test_ids, [true_scores[i] for i in test_ids], generation=0
    )
    return spearman_rho(predicted, truth)


def _cell_seed(base_seed: int, m: int, interactions: int, rep: int) -> int:
    mix = np.random.SeedSequence([base_seed, m, interactions, rep])
    return int(mix.generate_state(1)[0])


def parameter_sweep(
    catalog: Catalog,
    bank: AttributeModelBank,
    base_cfg: EngineConfig,
    m_values: Sequence[int],
    interaction_values: Sequence[int],
    repetitions: int,
    noise_sigma: Optional[float] = None,
    test_fraction: float = 0.5,
) -> SweepResult:
    """Grid of mean +- std rho over (m, interaction budget) cells.

    Each repetition gets a deterministic seed derived from the base seed
    and its cell, so the whole sweep reproduces bit for bit. Cells whose m
    exceeds the candidate split are marked infeasible and skipped.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if any(m < 1 for m in m_values) or any(n < 0 for n in interaction_values):
        raise ValueError("m values must be >= 1 and interaction counts >= 0")
    grid: dict[tuple[int, int], SweepCell] = {}
    for m in m_values:
        for n_inter in interaction_values:
            cfg = base_cfg.with_overrides(m=m, max_iterations=n_inter)
            rhos = []
            feasible = True
            for rep in range(repetitions):
                seed = _cell_seed(base_cfg.rng_seed, m, n_inter, rep)
                try:
                    user = make_attribute_user(
                        catalog,
                        seed=seed,
                        noise_sigma=0.0 if noise_sigma is None else noise_sigma,
                    )
                    report = simulate_session(
                        catalog,
                        bank,
                        cfg.with_overrides(rng_seed=seed),
                        user,
                        test_fraction=test_fraction,
                    )
                except ValueError:
                    feasible = False
                    break
                rhos.append(report.rho)
            if feasible:
                arr = np.array(rhos)
                grid[(m, n_inter)] = SweepCell(
                    mean_rho=float(arr.mean()),
                    std_rho=float(arr.std()),
                    repetitions=repetitions,
                )
            else:
                grid[(m, n_inter)] = SweepCell(
                    mean_rho=math.nan,
                    std_rho=math.nan,
                    repetitions=0,
                    feasible=False,
                )
    return SweepResult(
        grid=grid,
        m_values=tuple(m_values),
        interaction_values=tuple(interaction_values),
    )


def sweep_to_csv(result: SweepResult) -> str:
    out = io.StringIO()
    out.write("m,interactions,mean_rho,std_rho,repetitions\n")
    for m in result.m_values:
        for n_inter in result.interaction_values:
            cell = result.grid[(m, n_inter)]
            if cell.feasible:
                out.write(
                    f"{m},{n_inter},{cell.mean_rho:.6f},{cell.std_rho:.6f},"
                    f"{cell.repetitions}\n"
                )
            else:
                out.write(f"{m},{n_inter},infeasible,infeasible,0\n")
    return out.getvalue()


def sweep_to_json(result: SweepResult) -> str:
    cells = [
        {
            "m": m,
            "interactions": n_inter,
            "mean_rho": None if not cell.feasible else cell.mean_rho,
            "std_rho": None if not cell.feasible else cell.std_rho,
            "repetitions": cell.repetitions,
            "feasible": cell.feasible,
        }
        for (m, n_inter), cell in sorted(result.grid.items())
    ]
    return json.dumps({"cells": cells}, indent=2)


def format_sweep_table(result: SweepResult) -> str:
    """Render the grid with one row per interaction count, columns by m."""
    header = "interactions \\ m" + "".join(f"{m:>12}" for m in result.m_values)
    lines = [header]
    for n_inter in result.interaction_values:
        row = f"{n_inter:>16}"
        for m in result.m_values:
            cell = result.grid[(m, n_inter)]
            row += f"{cell.mean_rho:>12.4f}" if cell.feasible else f"{'n/a':>12}"
        lines.append(row)
    return "\n".join(lines)
