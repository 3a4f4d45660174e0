"""One-vs-all logistic classifiers over the attribute vocabulary.

Each attribute gets an independent L2-regularized logistic regression on
the catalog features (regularization strength 1/tradeoff_c). An item's
attribute distribution is the vector of sigmoid scores normalized to sum
one; logistic scores are strictly positive, so the normalization is
always well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .catalog import Catalog, EngineConfig


class AttributeTrainingError(ValueError):
    """Raised when an attribute lacks positive or negative examples."""


@dataclass(frozen=True)
class AttributeDistribution:
    """Nonnegative vector over attribute names, summing to one."""

    attributes: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (len(self.attributes),):
            raise ValueError(
                f"probs shape {probs.shape} does not match "
                f"{len(self.attributes)} attributes"
            )
        if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0, atol=1e-9):
            raise ValueError("probs must be nonnegative and sum to 1")


@dataclass(frozen=True)
class AttributeStats:
    positives: int
    train_accuracy: float


@dataclass(frozen=True)
class AttributeModelBank:
    """Per-attribute weight vectors and intercepts plus training stats."""

    attribute_names: tuple[str, ...]
    weights: np.ndarray  # (n_attributes, dim)
    intercepts: np.ndarray  # (n_attributes,)
    training_stats: tuple[AttributeStats, ...] = ()

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_and_grad(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, reg: float
) -> tuple[float, np.ndarray]:
    """Mean log-loss with L2 penalty on weights (intercept unpenalized).

    ``params`` is the weight vector with the intercept appended. This is
    the exact gradient the trainer uses; the test suite checks it against
    central finite differences.
    """
    w, b = params[:-1], params[-1]
    n = X.shape[0]
    z = X @ w + b
    # log(1 + exp(z)) - y*z, computed stably
    loss = float(np.logaddexp(0.0, z).mean() - (y * z).mean())
    loss += 0.5 * reg * float(w @ w)
    residual = (sigmoid(z) - y) / n
    grad_w = X.T @ residual + reg * w
    grad_b = residual.sum()
    return loss, np.concatenate([grad_w, [grad_b]])


def _fit_logistic(
    X: np.ndarray, y: np.ndarray, reg: float, tol: float, max_iter: int
) -> tuple[np.ndarray, float]:
    dim = X.shape[1]
    result = minimize(
        logistic_loss_and_grad,
        np.zeros(dim + 1),
        args=(X, y, reg),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-10},
    )
    return result.x, float(result.fun)


def train_bank(catalog: Catalog, cfg: EngineConfig) -> AttributeModelBank:
    """Train one binary classifier per vocabulary attribute.

    Every attribute must have at least one positive and one negative
    labeled item. Training is deterministic (no random initialization).
    """
    names = catalog.attribute_vocabulary
    X = catalog.feature_matrix()
    n, dim = X.shape
    labels = [item.attribute_labels or frozenset() for item in catalog.items]

    weights = np.zeros((len(names), dim))
    intercepts = np.zeros(len(names))
    stats = []
    reg = 1.0 / cfg.tradeoff_c
    for a, name in enumerate(names):
        y = np.array([1.0 if name in lab else 0.0 for lab in labels])
        positives = int(y.sum())
        if positives == 0:
            raise AttributeTrainingError(f"attribute {name!r} has no positive examples")
        if positives == n:
            raise AttributeTrainingError(f"attribute {name!r} has no negative examples")
        params, _ = _fit_logistic(
            X, y, reg, cfg.solver_tolerance, cfg.solver_max_epochs
        )
        weights[a] = params[:-1]
        intercepts[a] = params[-1]
        predicted = sigmoid(X @ weights[a] + intercepts[a]) >= 0.5
        accuracy = float((predicted == (y == 1.0)).mean())
        stats.append(AttributeStats(positives=positives, train_accuracy=accuracy))

    if not np.all(np.isfinite(weights)) or not np.all(np.isfinite(intercepts)):
        raise AttributeTrainingError("training produced non-finite weights")
    return AttributeModelBank(
        attribute_names=names,
        weights=weights,
        intercepts=intercepts,
        training_stats=tuple(stats),
    )


def classify(bank: AttributeModelBank, item_features: np.ndarray) -> AttributeDistribution:
    """Sigmoid score per attribute, normalized into a distribution."""
    x = np.asarray(item_features, dtype=np.float64)
    if x.shape != (bank.dim,):
        raise ValueError(
            f"feature dimension {x.shape} does not match bank dimension {bank.dim}"
        )
    scores = sigmoid(bank.weights @ x + bank.intercepts)
    total = scores.sum()
    if total <= 0:  # unreachable for sigmoid scores; guard stays for safety
        probs = np.full(len(bank.attribute_names), 1.0 / len(bank.attribute_names))
    else:
        probs = scores / total
    return AttributeDistribution(attributes=bank.attribute_names, probs=probs)


def classify_many(
    bank: AttributeModelBank, matrix: np.ndarray
) -> list[AttributeDistribution]:
    scores = sigmoid(matrix @ bank.weights.T + bank.intercepts)
    sums = scores.sum(axis=1, keepdims=True)
    return [
        AttributeDistribution(attributes=bank.attribute_names, probs=row)
        for row in scores / sums
    ]
