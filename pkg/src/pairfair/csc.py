"""Cost-sensitive classification: the oracle contract plus two implementations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import LinearThreshold, TabularHypothesis, tabular_from_code


@dataclass
class CscInstance:
    """Per-row label costs: costs0[i] for predicting 0, costs1[i] for 1."""

    features: np.ndarray        # (n, d)
    costs0: np.ndarray          # (n,)
    costs1: np.ndarray          # (n,)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.costs0 = np.asarray(self.costs0, dtype=np.float64)
        self.costs1 = np.asarray(self.costs1, dtype=np.float64)
        n = len(self.features)
        if self.costs0.shape != (n,) or self.costs1.shape != (n,):
            raise ValueError("cost vectors must have one entry per row")
        if not (np.isfinite(self.costs0).all() and np.isfinite(self.costs1).all()):
            raise ValueError("costs must be finite")

    @property
    def n(self) -> int:
        return len(self.features)


def csc_objective(hypothesis, inst: CscInstance) -> float:
    """Sum over rows of h(x_i) * c1_i + (1 - h(x_i)) * c0_i."""
    preds = hypothesis.predictions(inst.features).astype(np.float64)
    return float(preds @ inst.costs1 + (1.0 - preds) @ inst.costs0)


@dataclass
class HypothesisPool:
    """An explicit finite pool for the exact oracle.

    Must contain at least one constant labeling so the downstream program
    always has a feasible point; checked against a dataset on first use.
    """

    hypotheses: list

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError("pool must be non-empty")

    def prediction_matrix(self, features: np.ndarray) -> np.ndarray:
        mat = np.stack([h.predictions(features) for h in self.hypotheses])
        constant = ((mat == mat[:, :1]).all(axis=1)).any() if mat.shape[1] else True
        if not constant:
            raise ValueError("pool must contain a constant classifier")
        return mat.astype(np.float64)


def full_tabular_pool(n: int) -> HypothesisPool:
    """Every labeling of n rows, ordered by code (row i reads bit i)."""
    if n > 20:
        raise ValueError("full enumeration beyond n=20 is not sensible")
    return HypothesisPool([tabular_from_code(b, n) for b in range(2 ** n)])


def solve_exact(inst: CscInstance, pool: HypothesisPool):
    """Pool member with minimal objective; ties break to the lowest index."""
    mat = pool.prediction_matrix(inst.features)
    objectives = mat @ inst.costs1 + (1.0 - mat) @ inst.costs0
    return pool.hypotheses[int(np.argmin(objectives))]


@dataclass
class PoolOracle:
    """Exact oracle over a fixed pool, with the prediction matrix cached."""

    pool: HypothesisPool
    features: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self._matrix = self.pool.prediction_matrix(self.features)

    def solve(self, inst: CscInstance):
        objectives = self._matrix @ inst.costs1 + (1.0 - self._matrix) @ inst.costs0
        return self.pool.hypotheses[int(np.argmin(objectives))]


@dataclass
class ExhaustiveTabularOracle:
    """Exact oracle over all 2^n labelings, solved in closed form.

    The objective decomposes per row, so the argmin sets row i to 1 exactly
    when costs1[i] < costs0[i]; breaking per-row ties toward 0 picks the
    lowest-index member of the canonical full enumeration. Equivalent to
    PoolOracle(full_tabular_pool(n)) and tested as such.
    """

    n: int

    def solve(self, inst: CscInstance) -> TabularHypothesis:
        if inst.n != self.n:
            raise ValueError("instance size does not match oracle")
        return TabularHypothesis((inst.costs1 < inst.costs0).astype(np.int8))


@dataclass
class LeastSquaresOracle:
    """Heuristic oracle: linear threshold fitted to the cost advantage.

    Regresses c0 - c1 onto the features (with intercept) by ridge-stabilized
    normal equations and thresholds the fitted score at zero. Deterministic.
    """

    ridge: float = 1e-8

    def solve(self, inst: CscInstance) -> LinearThreshold:
        X = inst.features
        n, d = X.shape
        design = np.hstack([X, np.ones((n, 1))])
        target = inst.costs0 - inst.costs1
        gram = design.T @ design + self.ridge * np.eye(d + 1)
        try:
            beta = np.linalg.solve(gram, design.T @ target)
        except np.linalg.LinAlgError:
            raise ValueError(
                "degenerate design matrix even after ridge regularization "
                "(constant features with n < 2?)")
        return LinearThreshold(beta[:d], float(beta[d]))


def solve_heuristic(inst: CscInstance) -> LinearThreshold:
    """Module-level convenience for the default heuristic oracle."""
    return LeastSquaresOracle().solve(inst)
