"""Trainable decision models behind the planner.

Binary and one-vs-rest Gaussian-kernel logistic regression give the
posterior probabilities the plan search consumes; a Gaussian-kernel ridge
regressor predicts arm configurations. All three follow the sklearn
estimator protocol (fit / predict / get_params) so they compose with the
usual tooling, and serialize to a versioned JSON model file.

Training minimizes the weighted *mean* loss plus (lam/2) * a'Ka, solved by
full-batch IRLS-Newton steps with backtracking, which makes the training
loss monotone non-increasing and the fitted function invariant to
duplicating the data set.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .errors import (
    ArityError,
    DegenerateData,
    FormatVersionError,
    IoError,
    NonFiniteLoss,
)

MODEL_FORMAT = "hlplan-kernel-model"
MODEL_VERSION = 1

N_DIRECTION_CLASSES = 8
_ABSENT_CLASS_BIAS = -30.0  # constant scorer for direction classes never demonstrated
_F_CLIP = 30.0  # keeps sigmoid output strictly inside (0, 1) in float64


def gaussian_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * squared distance) between the rows of a and b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :]
          - 2.0 * (a @ b.T))
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-gamma * sq)


def _sigmoid(f: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(f, -_F_CLIP, _F_CLIP)))


def data_digest(X: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X, dtype=float).tobytes())
    h.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class LabeledSet:
    """Feature matrix with labels and per-row provenance tags."""

    features: np.ndarray
    labels: np.ndarray
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", np.asarray(self.labels))
        if X.ndim != 2:
            raise ArityError("features must be a 2D matrix")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain NaN/inf")
        if len(self.labels) != len(X):
            raise ValueError("labels and features disagree on row count")
        if self.tags and len(self.tags) != len(X):
            raise ValueError("tags and features disagree on row count")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def arity(self) -> int:
        return self.features.shape[1]

    def subset(self, mask: np.ndarray) -> "LabeledSet":
        tags = tuple(t for t, m in zip(self.tags, mask) if m) if self.tags else ()
        return LabeledSet(self.features[mask], self.labels[mask], tags)


def _check_X(X, arity: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ArityError("inputs must be 1D vectors or 2D matrices")
    if arity is not None and X.shape[1] != arity:
        raise ArityError(f"expected {arity} features, got {X.shape[1]}")
    return X


class KernelLogisticClassifier(BaseEstimator):
    """Binary kernel logistic regression with a Gaussian kernel.

    gamma defaults to 1/feature_arity at fit time; class_weight "balanced"
    applies inverse-frequency example weights (each row of demonstrations
    yields one positive and several negatives).
    """

    kind = "binary"

    def __init__(self, gamma: float | None = None, lam: float = 1e-3,
                 max_iter: int = 500, tol: float = 1e-8,
                 class_weight: str | None = "balanced"):
        self.gamma = gamma
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol
        self.class_weight = class_weight

    def fit(self, X, y, sample_weight=None):
        X = _check_X(X)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(X):
            raise ValueError("X and y disagree on row count")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("labels must be 0/1")
        n_pos = int(y.sum())
        n_neg = len(y) - n_pos
        if n_pos == 0 or n_neg == 0:
            raise DegenerateData("both classes must be present")
        n = len(y)
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=float)
        elif self.class_weight == "balanced":
            w = np.where(y == 1.0, n / (2.0 * n_pos), n / (2.0 * n_neg))
        else:
            w = np.ones(n)
        c = w / n

        self.gamma_ = float(self.gamma) if self.gamma is not None else 1.0 / X.shape[1]
        if self.gamma_ <= 0:
            raise ValueError("gamma must be positive")
        lam = float(self.lam)
        K = gaussian_kernel(X, X, self.gamma_)

        alpha = np.zeros(n)
        p_bar = min(max(float(np.sum(c * y) / np.sum(c)), 1e-12), 1.0 - 1e-12)
        b = math.log(p_bar / (1.0 - p_bar))

        def loss(a_vec, b_val):
            f = K @ a_vec + b_val
            ll = np.logaddexp(0.0, f) - y * f
            return float(np.sum(c * ll) + 0.5 * lam * (a_vec @ (K @ a_vec)))

        current = loss(alpha, b)
        history = [current]
        for _ in range(self.max_iter):
            if not np.isfinite(current):
                raise NonFiniteLoss("training loss is not finite")
            f = K @ alpha + b
            p = _sigmoid(f)
            u = c * (p - y)
            d = np.maximum(c * p * (1.0 - p), 1e-14)
            # Newton target (alpha*, b*) of the local quadratic model:
            # rows (DK + lam I | d) and (d K | sum d), rhs (d f - u | sum(d f - u)).
            M = np.empty((n + 1, n + 1))
            M[:n, :n] = d[:, None] * K
            M[np.arange(n), np.arange(n)] += lam
            M[:n, n] = d
            M[n, :n] = d @ K
            M[n, n] = d.sum()
            rhs = np.empty(n + 1)
            rhs_top = d * f - u
            rhs[:n] = rhs_top
            rhs[n] = rhs_top.sum()
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                break
            d_alpha = sol[:n] - alpha
            d_b = sol[n] - b
            step = 1.0
            new = loss(alpha + d_alpha, b + d_b)
            while new > current - 1e-15 and step > 1e-8:
                step *= 0.5
                new = loss(alpha + step * d_alpha, b + step * d_b)
            if new > current:
                break
            alpha = alpha + step * d_alpha
            b = b + step * d_b
            history.append(new)
            if current - new <= self.tol:
                current = new
                break
            current = new

        self.support_points_ = X
        self.weights_ = alpha
        self.bias_ = float(b)
        self.feature_arity_ = X.shape[1]
        self.loss_history_ = history
        self.trained_on_ = data_digest(X, y)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = _check_X(X, self.feature_arity_)
        K = gaussian_kernel(X, self.support_points_, self.gamma_)
        return K @ self.weights_ + self.bias_

    def positive_proba(self, X) -> np.ndarray:
        """P(label = 1) per row, strictly inside (0, 1)."""
        return _sigmoid(self.decision_function(X))

    def predict_proba(self, X) -> np.ndarray:
        p = self.positive_proba(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.positive_proba(X) >= 0.5).astype(int)


class OneVsRestKernelClassifier(BaseEstimator):
    """Eight-way direction classifier as a one-vs-rest logistic ensemble.

    Classes never observed in training keep a constant near-zero scorer so
    the model always emits all eight scores.
    """

    kind = "multiclass8"

    def __init__(self, gamma: float | None = None, lam: float = 1e-3,
                 max_iter: int = 500, tol: float = 1e-8,
                 n_classes: int = N_DIRECTION_CLASSES):
        self.gamma = gamma
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol
        self.n_classes = n_classes

    def fit(self, X, y):
        X = _check_X(X)
        y = np.asarray(y, dtype=int).ravel()
        if len(y) != len(X):
            raise ValueError("X and y disagree on row count")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError(f"labels must be in [0, {self.n_classes})")
        observed = np.unique(y)
        if len(observed) < 2:
            raise DegenerateData("need at least two distinct classes")
        self.gamma_ = float(self.gamma) if self.gamma is not None else 1.0 / X.shape[1]
        n = len(y)
        weights = np.zeros((n, self.n_classes))
        bias = np.full(self.n_classes, _ABSENT_CLASS_BIAS)
        for cls in observed:
            sub = KernelLogisticClassifier(gamma=self.gamma_, lam=self.lam,
                                           max_iter=self.max_iter, tol=self.tol)
            sub.fit(X, (y == cls).astype(float))
            weights[:, cls] = sub.weights_
            bias[cls] = sub.bias_
        self.support_points_ = X
        self.weights_ = weights
        self.bias_ = bias
        self.feature_arity_ = X.shape[1]
        self.classes_seen_ = tuple(int(c) for c in observed)
        self.trained_on_ = data_digest(X, y)
        return self

    def decision_function(self, X) -> np.ndarray:
        """Per-class positive probabilities, shape (n, n_classes)."""
        X = _check_X(X, self.feature_arity_)
        K = gaussian_kernel(X, self.support_points_, self.gamma_)
        return _sigmoid(K @ self.weights_ + self.bias_[None, :])

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)


class KernelRidgeRegressor(BaseEstimator):
    """Gaussian-kernel ridge regression with per-output bias = target mean."""

    kind = "regressor2"

    def __init__(self, gamma: float | None = None, lam: float = 1e-3):
        self.gamma = gamma
        self.lam = lam

    def fit(self, X, Y):
        X = _check_X(X)
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if len(Y) != len(X):
            raise ValueError("X and Y disagree on row count")
        if len(X) < 5:
            raise DegenerateData("kernel ridge needs at least 5 examples")
        if not np.all(np.isfinite(Y)):
            raise ValueError("targets contain NaN/inf")
        self.gamma_ = float(self.gamma) if self.gamma is not None else 1.0 / X.shape[1]
        n = len(X)
        K = gaussian_kernel(X, X, self.gamma_)
        bias = Y.mean(axis=0)
        A = K + n * float(self.lam) * np.eye(n)
        self.weights_ = np.linalg.solve(A, Y - bias)
        self.bias_ = bias
        self.support_points_ = X
        self.feature_arity_ = X.shape[1]
        self.trained_on_ = data_digest(X, Y)
        return self

    def predict(self, X) -> np.ndarray:
        X = _check_X(X, self.feature_arity_)
        K = gaussian_kernel(X, self.support_points_, self.gamma_)
        return K @ self.weights_ + self.bias_


# ---------------------------------------------------------------------------
# Functional training surface


def train_binary(data: LabeledSet, gamma: float | None = None,
                 lam: float = 1e-3) -> KernelLogisticClassifier:
    return KernelLogisticClassifier(gamma=gamma, lam=lam).fit(data.features, data.labels)


def train_multiclass(data: LabeledSet, gamma: float | None = None,
                     lam: float = 1e-3) -> OneVsRestKernelClassifier:
    return OneVsRestKernelClassifier(gamma=gamma, lam=lam).fit(data.features, data.labels)


def train_regressor(data: LabeledSet, gamma: float | None = None,
                    lam: float = 1e-3) -> KernelRidgeRegressor:
    return KernelRidgeRegressor(gamma=gamma, lam=lam).fit(data.features, data.labels)


# ---------------------------------------------------------------------------
# Serialization

_KIND_TO_CLASS = {
    "binary": KernelLogisticClassifier,
    "multiclass8": OneVsRestKernelClassifier,
    "regressor2": KernelRidgeRegressor,
}


def model_payload(model) -> dict:
    weights = np.asarray(model.weights_)
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "gamma": model.gamma_,
        "lam": float(model.lam),
        "feature_arity": int(model.feature_arity_),
        "support_points": np.asarray(model.support_points_).tolist(),
        "weights": weights.tolist(),
        "bias": np.atleast_1d(np.asarray(model.bias_)).tolist(),
        "trained_on": model.trained_on_,
    }


def model_from_payload(payload: dict):
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise FormatVersionError("not a kernel model file")
    if payload.get("version") != MODEL_VERSION:
        raise FormatVersionError(f"unsupported model version {payload.get('version')!r}")
    kind = payload.get("kind")
    if kind not in _KIND_TO_CLASS:
        raise FormatVersionError(f"unknown model kind {kind!r}")
    cls = _KIND_TO_CLASS[kind]
    model = cls(gamma=payload["gamma"], lam=payload["lam"])
    model.gamma_ = float(payload["gamma"])
    model.support_points_ = np.asarray(payload["support_points"], dtype=float)
    weights = np.asarray(payload["weights"], dtype=float)
    bias = np.asarray(payload["bias"], dtype=float)
    if kind == "binary":
        model.weights_ = weights.ravel()
        model.bias_ = float(bias[0])
    elif kind == "multiclass8":
        model.weights_ = weights
        model.bias_ = bias
        model.classes_seen_ = tuple(i for i, b in enumerate(bias) if b != _ABSENT_CLASS_BIAS)
    else:
        model.weights_ = weights
        model.bias_ = bias
    model.feature_arity_ = int(payload["feature_arity"])
    model.trained_on_ = payload.get("trained_on", "")
    return model


def save_model(model, path: str | os.PathLike) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model_payload(model), fh, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write model file {path}: {exc}") from exc


def load_model(path: str | os.PathLike):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read model file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatVersionError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_payload(payload)


# ---------------------------------------------------------------------------
# Hyperparameter search (used by the training CLI when requested)


def select_hyperparams(data: LabeledSet, kind: str, n_folds: int = 5,
                       seed: int = 0) -> tuple[float, float]:
    """Small grid search by k-fold score; returns (gamma, lam)."""
    arity = data.arity
    gammas = [0.5 / arity, 1.0 / arity, 2.0 / arity, 4.0 / arity]
    lams = [1e-2, 1e-3, 1e-4]
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(data))
    folds = np.array_split(idx, n_folds)
    best = (1.0 / arity, 1e-3)
    best_score = -np.inf
    for gamma in gammas:
        for lam in lams:
            scores = []
            for k in range(n_folds):
                test_idx = folds[k]
                train_mask = np.ones(len(data), dtype=bool)
                train_mask[test_idx] = False
                if train_mask.sum() < 5 or len(test_idx) == 0:
                    continue
                train = data.subset(train_mask)
                try:
                    if kind == "binary":
                        m = train_binary(train, gamma, lam)
                        pred = m.predict(data.features[test_idx])
                        scores.append(float(np.mean(pred == data.labels[test_idx])))
                    elif kind == "multiclass8":
                        m = train_multiclass(train, gamma, lam)
                        pred = m.predict(data.features[test_idx])
                        scores.append(float(np.mean(pred == data.labels[test_idx])))
                    else:
                        m = train_regressor(train, gamma, lam)
                        pred = m.predict(data.features[test_idx])
                        err = np.mean((pred - data.labels[test_idx]) ** 2)
                        scores.append(-float(err))
                except DegenerateData:
                    continue
            if scores and np.mean(scores) > best_score:
                best_score = float(np.mean(scores))
                best = (gamma, lam)
    return best
