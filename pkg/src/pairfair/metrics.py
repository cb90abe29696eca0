"""Error and fairness-loss metrics plus the generalization-bound formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifiers import RandomizedClassifier, positive_rates
from .data import ConstraintSet, Dataset


def empirical_error(clf: RandomizedClassifier, dataset: Dataset) -> float:
    """Mixture-expected misclassification rate on the sample."""
    total = 0.0
    for h, w in zip(clf.hypotheses, clf.weights):
        preds = h.predictions(dataset.features)
        total += float(w) * float((preds != dataset.labels).mean())
    return total


def fairness_loss_pair(clf: RandomizedClassifier, weight: float, gamma: float,
                       x, x_other) -> float:
    """weight * max(0, |disparity| - gamma) for one pair of inputs."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must be in [0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    from .classifiers import pair_disparity

    return weight * max(0.0, abs(pair_disparity(clf, x, x_other)) - gamma)


@dataclass
class FairnessLossReport:
    per_pair: dict
    mean: float
    gamma: float
    pair_count: int


def fairness_loss_set(clf: RandomizedClassifier, dataset: Dataset,
                      constraints: ConstraintSet, gamma: float,
                      pairs: np.ndarray | None = None) -> FairnessLossReport:
    """Mean weighted over-gamma disparity across a pair collection.

    pairs defaults to the constrained ordered pairs; any explicit pair
    outside the constraint set contributes weight 0.
    """
    if pairs is None:
        pairs = constraints.ordered_pairs()
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        raise ValueError("pair collection is empty")
    rates = positive_rates(clf, dataset.features)
    disp = np.abs(rates[pairs[:, 0]] - rates[pairs[:, 1]])
    weights = np.array([constraints.weight(int(i), int(j)) for i, j in pairs])
    losses = weights * np.maximum(0.0, disp - gamma)
    per_pair = {(int(i), int(j)): float(v)
                for (i, j), v in zip(pairs, losses)}
    return FairnessLossReport(per_pair=per_pair, mean=float(losses.mean()),
                              gamma=gamma, pair_count=len(pairs))


def error_bound(vc_dim: int, n: int, delta: float) -> float:
    """Generalization gap sqrt((vc_dim + ln(1/delta)) / n).

    The unstated leading constant is fixed to 1; the value is for reporting,
    not certification.
    """
    if vc_dim < 1 or n < 1:
        raise ValueError("vc_dim and n must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")
    return math.sqrt((vc_dim + math.log(1.0 / delta)) / n)


@dataclass(frozen=True)
class BoundInputs:
    n: int           # training points
    m: int           # elicited pairs
    vc_dim: int
    epsilon: float
    delta: float = 0.05

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.vc_dim < 1:
            raise ValueError("n, m, vc_dim must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")


@dataclass
class BoundResult:
    value: float            # exp(log_value); inf when it overflows
    log_value: float
    k: float                # covering constant used inside the bound
    k_prime: float
    sparsify_k: int         # the (larger) constant the sparsifier uses
    vacuous: bool           # the value is >= 1, so it bounds nothing
    term1_log: float
    term2_log: float


def fairness_generalization_bound(inputs: BoundInputs) -> BoundResult:
    """Failure-probability bound for fairness-loss generalization.

    Evaluated in log-space:
        8 (e 2n / d)^(d k) exp(-n eps^2 / 32) + (e 2n / d)^(d k') exp(-8 m eps^2)
    with k = ln(2 n^2) / (8 eps^2) + 1 and k' = 2 ln(2 m) / eps^2 + 1.
    Two covering constants that differ by a factor of 16 appear here and in
    the sparsifier; both are reported rather than reconciled. delta is not
    part of this formula (it is carried for the companion error bound).
    """
    n, m, d, eps = inputs.n, inputs.m, inputs.vc_dim, inputs.epsilon
    k = math.log(2.0 * n * n) / (8.0 * eps * eps) + 1.0
    k_prime = 2.0 * math.log(2.0 * m) / (eps * eps) + 1.0
    log_base = 1.0 + math.log(2.0 * n / d)
    term1 = math.log(8.0) + d * k * log_base - n * eps * eps / 32.0
    term2 = d * k_prime * log_base - 8.0 * m * eps * eps
    log_value = float(np.logaddexp(term1, term2))
    value = math.exp(log_value) if log_value < 700.0 else math.inf
    from .classifiers import sparsify_size

    return BoundResult(value=value, log_value=log_value, k=k, k_prime=k_prime,
                       sparsify_k=sparsify_size(n, eps),
                       vacuous=log_value >= 0.0,
                       term1_log=term1, term2_log=term2)
