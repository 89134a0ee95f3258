"""Three classifiers over a closed PIN set, implemented from first principles.

All three follow the scikit-learn estimator protocol (``fit`` / ``predict`` /
``predict_proba`` / ``get_params``) and add ``predict_ranked``, which returns
the *complete* ordering of the known labels for one query vector.  Ranking
the whole candidate set is the point: the attacker's metric is how far down
the list the true PIN sits.

* :class:`SoftmaxRegression` - multinomial logistic regression in the
  over-parameterized form (one weight vector per class, bias absorbed as a
  trailing all-ones feature), trained by full-batch gradient ascent on the
  L2-penalized log-likelihood with backtracking step control.
* :class:`LinearDiscriminant` - Gaussian classes with a shared covariance,
  estimated as the pooled within-class scatter over ``n - C`` and shrunk
  toward a scaled identity; linear scores ``w_k . x + b_k``.
* :class:`KNearestClassifier` - K nearest neighbors by Euclidean distance
  with majority vote and a fully deterministic tie-break chain.

Fitted models serialize to self-describing JSON (:func:`save_model` /
:func:`load_model`); a round trip reproduces predictions bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .validation import as_labels, as_matrix, as_vector, check_fitted

__all__ = [
    "RankedPrediction",
    "TrainingSet",
    "NumericTrainingError",
    "SingularCovarianceError",
    "SoftmaxRegression",
    "LinearDiscriminant",
    "KNearestClassifier",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]


class NumericTrainingError(RuntimeError):
    """Training hit a non-finite objective; carries the iteration index."""

    def __init__(self, iteration: int, message: str):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


class SingularCovarianceError(np.linalg.LinAlgError):
    """The pooled covariance is not positive definite."""


@dataclass(frozen=True)
class RankedPrediction:
    """All candidate labels for one query, best first, with their scores.

    ``labels`` is a permutation of the model's classes; ``scores`` is
    non-increasing.  For the probabilistic models the scores are posterior
    probabilities and sum to 1; for kNN they are vote fractions.
    """

    labels: tuple[str, ...]
    scores: tuple[float, ...]

    def rank_of(self, label: str) -> int:
        """1-based position of ``label`` in the ranking."""
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise KeyError(f"label {label!r} is not among the ranked classes") from None

    def top(self, n: int) -> tuple[str, ...]:
        return self.labels[:n]

    def __iter__(self):
        return iter(zip(self.labels, self.scores))

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class TrainingSet:
    """A labeled feature matrix; convenience bridge from feature batches."""

    X: np.ndarray
    y: np.ndarray

    @classmethod
    def from_features(cls, features: Sequence) -> "TrainingSet":
        from .features import feature_matrix

        X, labels = feature_matrix(features)
        return cls(X, np.array(labels, dtype=object))

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.y)


def _ranked_from_scores(classes: np.ndarray, scores: np.ndarray) -> RankedPrediction:
    """Sort labels by score descending, breaking exact ties by label order."""
    order = sorted(range(len(classes)), key=lambda i: (-scores[i], classes[i]))
    return RankedPrediction(
        labels=tuple(classes[i] for i in order),
        scores=tuple(float(scores[i]) for i in order),
    )


def _encode_labels(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    classes = np.unique(y)
    index = {label: i for i, label in enumerate(classes)}
    return classes, np.array([index[v] for v in y], dtype=np.intp)


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))


def softmax_objective(
    weights: np.ndarray,
    X_aug: np.ndarray,
    y_idx: np.ndarray,
    l2_lambda: float,
) -> tuple[float, np.ndarray]:
    """Penalized log-likelihood and its gradient for the softmax model.

    ``weights`` is (C, d+1) with the bias in the last column; the penalty
    ``-l2_lambda/2 * sum(w^2)`` excludes the bias column.
    """
    log_p = _log_softmax(X_aug @ weights.T)
    n = X_aug.shape[0]
    loglik = float(log_p[np.arange(n), y_idx].sum())
    loglik -= 0.5 * l2_lambda * float(np.sum(weights[:, :-1] ** 2))

    residual = -np.exp(log_p)
    residual[np.arange(n), y_idx] += 1.0
    grad = residual.T @ X_aug
    grad[:, :-1] -= l2_lambda * weights[:, :-1]
    return loglik, grad


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Over-parameterized multinomial logistic regression.

    Parameters
    ----------
    l2_lambda : float
        L2 penalty weight on everything except the bias column.
    max_iter : int
        Iteration cap for the full-batch ascent.
    tol : float
        Convergence threshold on the max-abs gradient entry.

    Attributes (after fit)
    ----------------------
    classes_ : (C,) array of labels, sorted.
    weights_ : (C, d+1) array, bias last.
    n_iter_ : iterations actually run.
    grad_max_ : max-abs gradient entry at the last iterate.
    converged_ : whether ``grad_max_ <= tol`` was reached within the cap.
    """

    def __init__(self, l2_lambda: float = 1e-3, max_iter: int = 5000, tol: float = 1e-6):
        self.l2_lambda = l2_lambda
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be non-negative")
        X = as_matrix(X)
        y = as_labels(y, X.shape[0])
        self.classes_, y_idx = _encode_labels(y)
        X_aug = np.hstack([X, np.ones((X.shape[0], 1))])
        weights = np.zeros((len(self.classes_), X.shape[1] + 1))

        step = 1.0
        loss, grad = softmax_objective(weights, X_aug, y_idx, self.l2_lambda)
        iterations = 0
        for iterations in range(1, self.max_iter + 1):
            if not math.isfinite(loss):
                raise NumericTrainingError(iterations, "objective became non-finite")
            if float(np.max(np.abs(grad))) <= self.tol:
                iterations -= 1
                break
            # backtracking: halve the step until the objective improves,
            # then let it grow again for the next iteration
            while True:
                candidate = weights + step * grad
                new_loss, new_grad = softmax_objective(candidate, X_aug, y_idx, self.l2_lambda)
                if math.isfinite(new_loss) and new_loss > loss:
                    weights, loss, grad = candidate, new_loss, new_grad
                    step = min(step * 2.0, 1e6)
                    break
                step *= 0.5
                if step < 1e-15:
                    break
            if step < 1e-15:
                break

        self.weights_ = weights
        self.n_iter_ = iterations
        self.grad_max_ = float(np.max(np.abs(grad)))
        self.converged_ = self.grad_max_ <= self.tol
        return self

    def _scores(self, X: np.ndarray) -> np.ndarray:
        check_fitted(self)
        X = as_matrix(X)
        if X.shape[1] + 1 != self.weights_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} features, model expects {self.weights_.shape[1] - 1}"
            )
        X_aug = np.hstack([X, np.ones((X.shape[0], 1))])
        return X_aug @ self.weights_.T

    def predict_proba(self, X) -> np.ndarray:
        log_p = _log_softmax(self._scores(X))
        return np.exp(log_p)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def predict_ranked(self, x) -> RankedPrediction:
        check_fitted(self)
        x = as_vector(x, self.weights_.shape[1] - 1)
        probs = self.predict_proba(x[None, :])[0]
        return _ranked_from_scores(self.classes_, probs)


class LinearDiscriminant(BaseEstimator, ClassifierMixin):
    """Shared-covariance Gaussian classifier with identity shrinkage.

    The pooled within-class scatter is divided by ``n - C`` and shrunk as
    ``(1 - shrinkage) * S + shrinkage * (tr(S) / d) * I`` (for data with zero
    within-class scatter the identity target falls back to unit scale so the
    matrix stays positive definite).  Scores are ``w_k . x + b_k`` with
    ``w_k = S^-1 mu_k`` and ``b_k = -mu_k . w_k / 2 + log pi_k``.

    Parameters
    ----------
    shrinkage : float in [0, 1]
    priors : "empirical" (class frequencies) or "uniform"
    """

    def __init__(self, shrinkage: float = 1e-3, priors: str = "empirical"):
        self.shrinkage = shrinkage
        self.priors = priors

    def fit(self, X, y):
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in [0, 1]")
        if self.priors not in ("empirical", "uniform"):
            raise ValueError("priors must be 'empirical' or 'uniform'")
        X = as_matrix(X)
        y = as_labels(y, X.shape[0])
        self.classes_, y_idx = _encode_labels(y)
        n, d = X.shape
        c = len(self.classes_)
        if n - c < 1:
            raise ValueError(
                f"need more samples than classes to pool covariance (n={n}, classes={c})"
            )

        means = np.vstack([X[y_idx == k].mean(axis=0) for k in range(c)])
        centered = X - means[y_idx]
        scatter = centered.T @ centered / (n - c)
        trace = float(np.trace(scatter))
        target_scale = trace / d if trace > 0 else 1.0
        covariance = (1.0 - self.shrinkage) * scatter
        covariance[np.diag_indices(d)] += self.shrinkage * target_scale

        try:
            chol = np.linalg.cholesky(covariance)
        except np.linalg.LinAlgError:
            raise SingularCovarianceError(
                "pooled covariance is singular; set shrinkage > 0"
            ) from None
        # solve S w_k = mu_k via the Cholesky factor; contiguous copy so a
        # model restored from JSON multiplies through the same BLAS path
        coef = np.ascontiguousarray(np.linalg.solve(chol.T, np.linalg.solve(chol, means.T)).T)

        counts = np.bincount(y_idx, minlength=c).astype(np.float64)
        if self.priors == "empirical":
            priors = counts / n
        else:
            priors = np.full(c, 1.0 / c)
        self.means_ = means
        self.covariance_ = covariance
        self.coef_ = coef
        self.intercept_ = -0.5 * np.einsum("kd,kd->k", means, coef) + np.log(priors)
        self.priors_ = priors
        return self

    def decision_function(self, X) -> np.ndarray:
        check_fitted(self)
        X = as_matrix(X)
        if X.shape[1] != self.coef_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} features, model expects {self.coef_.shape[1]}"
            )
        return X @ self.coef_.T + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(_log_softmax(self.decision_function(X)))

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def predict_ranked(self, x) -> RankedPrediction:
        check_fitted(self)
        x = as_vector(x, self.coef_.shape[1])
        probs = self.predict_proba(x[None, :])[0]
        return _ranked_from_scores(self.classes_, probs)


class KNearestClassifier(BaseEstimator, ClassifierMixin):
    """K nearest neighbors with a deterministic full ranking.

    Labels are ordered by vote count among the K nearest training samples
    (Euclidean distance; boundary ties resolved by training index).  Voted
    labels tie-break on their nearest voted neighbor; zero-vote labels follow,
    ordered by their nearest training sample overall; exact ties fall back to
    label order.  Scores are vote fractions.
    """

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y):
        X = as_matrix(X)
        y = as_labels(y, X.shape[0])
        if not 1 <= self.k <= X.shape[0]:
            raise ValueError(f"k must lie in [1, {X.shape[0]}] (got {self.k})")
        self.classes_, self._y_idx = _encode_labels(y)
        self.X_ = X
        return self

    def _rank_one(self, x: np.ndarray) -> RankedPrediction:
        d2 = np.sum((self.X_ - x) ** 2, axis=1)
        order = np.lexsort((np.arange(d2.size), d2))
        nearest = order[: self.k]

        c = len(self.classes_)
        votes = np.zeros(c, dtype=np.intp)
        voted_best = np.full(c, np.inf)
        for idx in nearest:
            k_cls = self._y_idx[idx]
            votes[k_cls] += 1
            voted_best[k_cls] = min(voted_best[k_cls], d2[idx])
        class_best = np.full(c, np.inf)
        np.minimum.at(class_best, self._y_idx, d2)

        def sort_key(ci: int):
            tie_dist = voted_best[ci] if votes[ci] > 0 else class_best[ci]
            return (-votes[ci], tie_dist, self.classes_[ci])

        ranked = sorted(range(c), key=sort_key)
        return RankedPrediction(
            labels=tuple(self.classes_[i] for i in ranked),
            scores=tuple(float(votes[i]) / self.k for i in ranked),
        )

    def predict_ranked(self, x) -> RankedPrediction:
        check_fitted(self)
        x = as_vector(x, self.X_.shape[1])
        return self._rank_one(x)

    def predict(self, X) -> np.ndarray:
        check_fitted(self)
        X = as_matrix(X)
        if X.shape[1] != self.X_.shape[1]:
            raise ValueError(f"X has {X.shape[1]} features, model expects {self.X_.shape[1]}")
        return np.array([self._rank_one(row).labels[0] for row in X], dtype=object)

    def predict_proba(self, X) -> np.ndarray:
        check_fitted(self)
        X = as_matrix(X)
        if X.shape[1] != self.X_.shape[1]:
            raise ValueError(f"X has {X.shape[1]} features, model expects {self.X_.shape[1]}")
        out = np.empty((X.shape[0], len(self.classes_)))
        label_pos = {label: i for i, label in enumerate(self.classes_)}
        for r, row in enumerate(X):
            ranked = self._rank_one(row)
            for label, score in ranked:
                out[r, label_pos[label]] = score
        return out


# --- persistence ----------------------------------------------------------

_MODEL_KINDS = {
    "softmax": SoftmaxRegression,
    "lda": LinearDiscriminant,
    "knn": KNearestClassifier,
}


def model_to_dict(model) -> dict:
    """Self-describing JSON-ready snapshot of a fitted model."""
    check_fitted(model)
    if isinstance(model, SoftmaxRegression):
        return {
            "model": "softmax",
            "params": model.get_params(),
            "classes": list(model.classes_),
            "weights": model.weights_.tolist(),
            "n_iter": model.n_iter_,
            "grad_max": model.grad_max_,
            "converged": model.converged_,
        }
    if isinstance(model, LinearDiscriminant):
        return {
            "model": "lda",
            "params": model.get_params(),
            "classes": list(model.classes_),
            "means": model.means_.tolist(),
            "covariance": model.covariance_.tolist(),
            "coef": model.coef_.tolist(),
            "intercept": model.intercept_.tolist(),
            "priors": model.priors_.tolist(),
        }
    if isinstance(model, KNearestClassifier):
        return {
            "model": "knn",
            "params": model.get_params(),
            "classes": list(model.classes_),
            "X": model.X_.tolist(),
            "y_idx": model._y_idx.tolist(),
        }
    raise TypeError(f"unknown model type {type(model).__name__}")


def model_from_dict(payload: dict):
    kind = payload.get("model")
    if kind not in _MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    model = _MODEL_KINDS[kind](**payload["params"])
    model.classes_ = np.array(payload["classes"], dtype=object)
    if kind == "softmax":
        model.weights_ = np.array(payload["weights"], dtype=np.float64)
        model.n_iter_ = payload["n_iter"]
        model.grad_max_ = payload["grad_max"]
        model.converged_ = payload["converged"]
    elif kind == "lda":
        model.means_ = np.array(payload["means"], dtype=np.float64)
        model.covariance_ = np.array(payload["covariance"], dtype=np.float64)
        model.coef_ = np.array(payload["coef"], dtype=np.float64)
        model.intercept_ = np.array(payload["intercept"], dtype=np.float64)
        model.priors_ = np.array(payload["priors"], dtype=np.float64)
    else:
        model.X_ = np.array(payload["X"], dtype=np.float64)
        model._y_idx = np.array(payload["y_idx"], dtype=np.intp)
    return model


def save_model(model, path: Union[str, os.PathLike]) -> None:
    """Write a fitted model as JSON; floats keep full precision."""
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path: Union[str, os.PathLike]):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
