"""Base hypotheses, randomized classifiers, disparities, and sparsification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearThreshold:
    """Predicts 1 exactly when w @ x + b >= 0 (ties go to 1)."""

    weights: np.ndarray
    bias: float

    def __post_init__(self):
        object.__setattr__(self, "weights",
                           np.asarray(self.weights, dtype=np.float64))
        if self.weights.ndim != 1 or not np.isfinite(self.weights).all():
            raise ValueError("weights must be a finite 1-d vector")
        if not np.isfinite(self.bias):
            raise ValueError("bias must be finite")

    def predict(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.weights.shape:
            raise ValueError(
                f"feature vector of length {x.shape} does not match "
                f"weights of length {self.weights.shape}")
        return int(float(self.weights @ x) + self.bias >= 0.0)

    def predictions(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[1] != len(self.weights):
            raise ValueError("feature dimension mismatch")
        return (features @ self.weights + self.bias >= 0.0).astype(np.int8)

    def to_dict(self) -> dict:
        return {"type": "linear", "weights": [float(w) for w in self.weights],
                "bias": float(self.bias)}


@dataclass(frozen=True)
class TabularHypothesis:
    """A fixed labeling of one dataset's rows; predict takes a row index."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=np.int8))
        if self.values.ndim != 1 or not np.isin(self.values, (0, 1)).all():
            raise ValueError("tabular predictions must be a 1-d 0/1 vector")

    def predict(self, index) -> int:
        i = int(index)
        if not 0 <= i < len(self.values):
            raise ValueError(f"row index {i} out of range")
        return int(self.values[i])

    def predictions(self, features: np.ndarray) -> np.ndarray:
        if len(features) != len(self.values):
            raise ValueError(
                "tabular hypothesis is bound to a dataset of length "
                f"{len(self.values)}, got {len(features)} rows")
        return self.values

    def to_dict(self) -> dict:
        return {"type": "tabular", "values": [int(v) for v in self.values]}


def tabular_from_code(code: int, n: int) -> TabularHypothesis:
    """Labeling number `code` in the canonical enumeration: row i gets bit i."""
    bits = (code >> np.arange(n)) & 1
    return TabularHypothesis(bits.astype(np.int8))


def hypothesis_from_dict(payload: dict):
    kind = payload.get("type")
    if kind == "linear":
        return LinearThreshold(np.asarray(payload["weights"], dtype=np.float64),
                               float(payload["bias"]))
    if kind == "tabular":
        return TabularHypothesis(np.asarray(payload["values"], dtype=np.int8))
    raise ValueError(f"unknown hypothesis type {kind!r}")


@dataclass
class RandomizedClassifier:
    """A finite probability mixture over base hypotheses."""

    hypotheses: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.hypotheses) == 0:
            raise ValueError("mixture needs at least one component")
        if self.weights.shape != (len(self.hypotheses),):
            raise ValueError("one weight per hypothesis required")
        if (self.weights < 0).any():
            raise ValueError("mixture weights must be nonnegative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1 within 1e-9")

    def __len__(self) -> int:
        return len(self.hypotheses)

    def to_dict(self) -> dict:
        return {"components": [
            {**h.to_dict(), "weight": float(w)}
            for h, w in zip(self.hypotheses, self.weights)
        ]}

    @classmethod
    def from_dict(cls, payload: dict) -> "RandomizedClassifier":
        comps = payload["components"]
        return cls([hypothesis_from_dict(c) for c in comps],
                   np.array([c["weight"] for c in comps], dtype=np.float64))


def single(hypothesis) -> RandomizedClassifier:
    return RandomizedClassifier([hypothesis], np.array([1.0]))


def positive_rate(clf: RandomizedClassifier, x) -> float:
    """Probability of a positive label for one input under the mixture."""
    return float(sum(w * h.predict(x)
                     for h, w in zip(clf.hypotheses, clf.weights)))


def positive_rates(clf: RandomizedClassifier, features: np.ndarray) -> np.ndarray:
    """Per-row positive probability; shape (n,)."""
    rates = np.zeros(len(features), dtype=np.float64)
    for h, w in zip(clf.hypotheses, clf.weights):
        rates += w * h.predictions(features)
    return rates


def pair_disparity(clf: RandomizedClassifier, x, x_other) -> float:
    """positive_rate(x) - positive_rate(x_other); antisymmetric."""
    return positive_rate(clf, x) - positive_rate(clf, x_other)


def pair_disparities(clf: RandomizedClassifier, features: np.ndarray,
                     ordered_pairs: np.ndarray) -> np.ndarray:
    """Disparities for each ordered pair row, from one rates pass."""
    rates = positive_rates(clf, features)
    if not len(ordered_pairs):
        return np.empty(0, dtype=np.float64)
    return rates[ordered_pairs[:, 0]] - rates[ordered_pairs[:, 1]]


def compact(clf: RandomizedClassifier, features: np.ndarray) -> RandomizedClassifier:
    """Merge components with identical prediction vectors on the dataset.

    Keeps the first occurrence of each distinct labeling as the
    representative; weights are summed. positive_rate on every dataset row
    is unchanged.
    """
    groups: dict[bytes, int] = {}
    hyps: list = []
    weights: list[float] = []
    for h, w in zip(clf.hypotheses, clf.weights):
        key = np.ascontiguousarray(h.predictions(features)).tobytes()
        if key in groups:
            weights[groups[key]] += float(w)
        else:
            groups[key] = len(hyps)
            hyps.append(h)
            weights.append(float(w))
    return RandomizedClassifier(hyps, np.array(weights, dtype=np.float64))


def sparsify_size(n: int, eps: float) -> int:
    """Mixture size that preserves all pair disparities to eps (w.h.p.)."""
    return math.ceil(2.0 * math.log(2.0 * n * n) / (eps * eps) + 1.0)


@dataclass
class SparsifyResult:
    classifier: RandomizedClassifier
    deviation: float
    attempts: int
    k: int


def sparsify(clf: RandomizedClassifier, features: np.ndarray, eps: float,
             seed: int, max_retries: int = 100) -> SparsifyResult:
    """Replace a mixture by a uniform k-sample preserving pair disparities.

    Samples k hypotheses i.i.d. from the mixture, checks the realized max
    deviation of every ordered pair disparity, and retries with fresh draws
    until the deviation is <= eps or the retry budget runs out. The result
    is always an exactly uniform mixture of exactly k components.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = len(features)
    k = sparsify_size(n, eps)
    rates = positive_rates(clf, features)
    rng = np.random.default_rng(seed)
    probs = clf.weights / clf.weights.sum()
    for attempt in range(1, max_retries + 1):
        idx = rng.choice(len(clf.hypotheses), size=k, p=probs)
        sample_rates = np.zeros(n, dtype=np.float64)
        for i in idx:
            sample_rates += clf.hypotheses[i].predictions(features)
        sample_rates /= k
        # max over ordered pairs of |disp(clf) - disp(sample)| equals the
        # spread of the per-row rate differences
        delta = rates - sample_rates
        deviation = float(delta.max() - delta.min()) if n > 1 else 0.0
        if deviation <= eps:
            result = RandomizedClassifier(
                [clf.hypotheses[i] for i in idx],
                np.full(k, 1.0 / k, dtype=np.float64))
            return SparsifyResult(result, deviation, attempt, k)
    raise RuntimeError(
        f"sparsify failed to reach deviation <= {eps} in {max_retries} attempts; "
        "eps is too small for this retry budget")
