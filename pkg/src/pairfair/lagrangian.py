"""The constrained-training Lagrangian and both players' best responses.

Per-pair vectors (dual weights, slacks, disparities) are always aligned with
ConstraintSet.ordered_pairs(): the lexicographically sorted symmetric closure
of the constrained pairs. Pairs outside that set never need coordinates: their
aggregated weight is zero, so the slack player would set their alpha to 1,
turning the disparity constraint into disparity <= 1 + gamma, which always
holds, and dual mass on them can never produce positive penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import RandomizedClassifier, positive_rates, single
from .csc import CscInstance
from .data import ConstraintSet, Dataset


@dataclass(frozen=True)
class FairnessParams:
    """Per-pair disparity allowance gamma and weighted-slack budget eta."""

    gamma: float
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")


@dataclass(frozen=True)
class GuaranteeBudgets:
    """Dual caps and target approximation slack; trade accuracy for time."""

    c_lambda: float
    c_tau: float
    nu: float

    def __post_init__(self):
        if self.c_lambda <= 0 or self.c_tau <= 0 or self.nu <= 0:
            raise ValueError("c_lambda, c_tau, nu must all be positive")


@dataclass
class DualVars:
    """lam: one weight per ordered constrained pair; tau: slack-budget price."""

    lam: np.ndarray
    tau: float

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.float64).reshape(-1)
        if (self.lam < 0).any() or self.tau < 0:
            raise ValueError("dual variables must be nonnegative")


@dataclass
class PrimalVars:
    """classifier: the hypothesis distribution; alpha: per-ordered-pair slack.

    alpha for pairs outside the constrained set is implicitly 1.
    """

    classifier: RandomizedClassifier
    alpha: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64).reshape(-1)
        if ((self.alpha < 0) | (self.alpha > 1)).any():
            raise ValueError("alpha entries must lie in [0, 1]")


def error_from_rates(rates: np.ndarray, labels: np.ndarray) -> float:
    """Expected misclassification rate of a mixture from its positive rates."""
    labels = np.asarray(labels, dtype=np.float64)
    per_point = np.where(labels == 1.0, 1.0 - rates, rates)
    return float(per_point.mean())


def build_costs(dataset: Dataset, constraints: ConstraintSet,
                lam: np.ndarray) -> CscInstance:
    """Per-row label costs for the classifier player's best response.

    Row i with label 0 gets (c0, c1) = (0, 1/n + net_i); label 1 gets
    (1/n, net_i), where net_i = sum over constrained ordered pairs (i, j)
    of lam minus the sum over (j, i).
    """
    n = dataset.n
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    op = constraints.ordered_pairs()
    if lam.shape != (len(op),):
        raise ValueError("lam must have one entry per ordered constrained pair")
    net = np.zeros(n, dtype=np.float64)
    if len(op):
        np.add.at(net, op[:, 0], lam)
        np.subtract.at(net, op[:, 1], lam)
    zero_label = (dataset.labels == 0).astype(np.float64)
    costs1 = net + zero_label / n
    costs0 = (1.0 - zero_label) / n
    return CscInstance(dataset.features, costs0, costs1)


def _dual_terms(disparities: np.ndarray, alpha: np.ndarray, lam: np.ndarray,
                tau: float, weights: np.ndarray, eta: float,
                gamma: float) -> tuple[float, float]:
    """(pair-penalty term, slack-budget term); zero when no pairs exist."""
    q = len(weights)
    if q == 0:
        return 0.0, 0.0
    pair_term = float(lam @ (disparities - alpha - gamma))
    slack_term = tau * (float(weights @ alpha) / q - eta)
    return pair_term, slack_term


def lagrangian_value(primal: PrimalVars, dual: DualVars, dataset: Dataset,
                     constraints: ConstraintSet, params: FairnessParams) -> float:
    """err + sum_k lam_k (disp_k - alpha_k - gamma) + tau (w.alpha/|A| - eta)."""
    op = constraints.ordered_pairs()
    rates = positive_rates(primal.classifier, dataset.features)
    err = error_from_rates(rates, dataset.labels)
    disp = rates[op[:, 0]] - rates[op[:, 1]] if len(op) else np.empty(0)
    pair_term, slack_term = _dual_terms(
        disp, primal.alpha, dual.lam, dual.tau,
        constraints.ordered_weights(), params.eta, params.gamma)
    return err + pair_term + slack_term


def penalty(primal: PrimalVars, dual: DualVars, dataset: Dataset,
            constraints: ConstraintSet, params: FairnessParams) -> float:
    """lagrangian_value minus the classification error."""
    op = constraints.ordered_pairs()
    rates = positive_rates(primal.classifier, dataset.features)
    disp = rates[op[:, 0]] - rates[op[:, 1]] if len(op) else np.empty(0)
    pair_term, slack_term = _dual_terms(
        disp, primal.alpha, dual.lam, dual.tau,
        constraints.ordered_weights(), params.eta, params.gamma)
    return pair_term + slack_term


def best_response_alpha(lam: np.ndarray, tau: float,
                        constraints: ConstraintSet) -> np.ndarray:
    """alpha_k = 1 when tau * w_k / |A| - lam_k <= 0, else 0 (ties take 1)."""
    w = constraints.ordered_weights()
    q = len(w)
    if q == 0:
        return np.empty(0, dtype=np.float64)
    return np.where(tau * w / q - lam <= 0.0, 1.0, 0.0)


def best_response_primal(dual: DualVars, dataset: Dataset,
                         constraints: ConstraintSet, params: FairnessParams,
                         oracle) -> PrimalVars:
    """Classifier-player best response: one oracle call plus the alpha rule.

    The best response is always a deterministic classifier, so the returned
    mixture has a single component.
    """
    inst = build_costs(dataset, constraints, dual.lam)
    hypothesis = oracle.solve(inst)
    alpha = best_response_alpha(dual.lam, dual.tau, constraints)
    return PrimalVars(single(hypothesis), alpha)


def best_response_dual(primal: PrimalVars, dataset: Dataset,
                       constraints: ConstraintSet, params: FairnessParams,
                       budgets: GuaranteeBudgets) -> DualVars:
    """Dual best response over the budget region's vertices.

    All pair weight goes to the ordered pair with the largest violation
    margin, and only when that margin is strictly positive; tau jumps to its
    cap exactly when the weighted slack exceeds eta. Argmax ties break to
    the lowest position in the canonical pair order.
    """
    op = constraints.ordered_pairs()
    q = len(op)
    lam = np.zeros(q, dtype=np.float64)
    tau = 0.0
    if q == 0:
        return DualVars(lam, tau)
    rates = positive_rates(primal.classifier, dataset.features)
    margins = rates[op[:, 0]] - rates[op[:, 1]] - primal.alpha - params.gamma
    best = int(np.argmax(margins))
    if margins[best] > 0.0:
        lam[best] = budgets.c_lambda
    w = constraints.ordered_weights()
    if float(w @ primal.alpha) / q - params.eta > 0.0:
        tau = budgets.c_tau
    return DualVars(lam, tau)
