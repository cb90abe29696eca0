"""Shared random-instance generator for small exact-oracle trials."""

from __future__ import annotations

import numpy as np

from pairfair import ConstraintSet, Dataset


def random_instance(rng: np.random.Generator, n_range=(4, 8),
                    max_pairs: int = 3, gammas=(0.0, 0.2), etas=(0.0, 0.1)):
    """One random dataset + constraint set + (gamma, eta) draw."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    labels = rng.integers(0, 2, size=n).astype(np.int8)
    features = rng.normal(size=(n, 2))
    dataset = Dataset(features, labels, ["f0", "f1"])

    num_pairs = int(rng.integers(1, max_pairs + 1))
    all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    idx = rng.choice(len(all_pairs), size=num_pairs, replace=False)
    pairs = np.array([all_pairs[k] for k in idx], dtype=np.int64)
    num_judges = int(rng.integers(1, 4))
    counts = rng.integers(1, num_judges + 1, size=num_pairs)
    constraints = ConstraintSet(n=n, pairs=pairs, counts=counts,
                                num_judges=num_judges)
    gamma = float(rng.choice(gammas))
    eta = float(rng.choice(etas))
    return dataset, constraints, gamma, eta
