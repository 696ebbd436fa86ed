"""Small datasets shared by several test modules."""

import numpy as np

from odrf.data import Dataset


def twelve_points():
    """Points on a line in three groups: low noisy values, a lone 5, two high plateaus.

    Deterministic growth with t_n = 6 splits nodes 0, 1, 2, 3, 5 in that order,
    carries the singleton node 4 into layer 3 and stops before dividing node 6.
    """
    X = (np.arange(12) / 11.0)[:, None]
    y = np.array([0, 1, 0, 1, 0, 5, 100, 100, 100, 110, 110, 110], dtype=float)
    return Dataset(X, y)


def ridge_data(n, p=3, seed=0, task="regression"):
    rng = np.random.default_rng(seed)
    X = rng.random((n, p))
    m = np.sin(4 * X.sum(axis=1) / np.sqrt(p))
    if task == "classification":
        return Dataset(X, (rng.random(n) < 0.5 + 0.4 * m).astype(float), task)
    return Dataset(X, m + 0.1 * rng.normal(size=n))
