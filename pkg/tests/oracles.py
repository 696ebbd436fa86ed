"""Independent reference implementations used by the tests.

These are written for clarity, not speed, and share no code with the package.
"""

import numpy as np


def variance_gain(y, left):
    y = np.asarray(y, dtype=float)
    left = np.asarray(left, dtype=bool)
    N = len(y)
    total = 0.0
    for side in (left, ~left):
        ys = y[side]
        total += len(ys) / N * np.var(ys)
    return np.var(y) - total


def gini(y):
    p1 = np.mean(y)
    return 1.0 - p1 ** 2 - (1.0 - p1) ** 2


def gini_gain(y, left):
    y = np.asarray(y, dtype=float)
    left = np.asarray(left, dtype=bool)
    N = len(y)
    return gini(y) - sum(side.sum() / N * gini(y[side]) for side in (left, ~left))


def exhaustive_threshold(z, y, criterion="variance", tie_atol=1e-10):
    """Try every midpoint between consecutive distinct values; smallest s among ties."""
    gain_fn = variance_gain if criterion == "variance" else gini_gain
    values = np.unique(z)
    best = []
    for a, b in zip(values[:-1], values[1:]):
        s = (a + b) / 2
        best.append((s, gain_fn(y, z <= s)))
    top = max(g for _, g in best)
    s = min(s for s, g in best if g >= top - tie_atol)
    return s, top


def sse(y):
    y = np.asarray(y, dtype=float)
    return float(((y - y.mean()) ** 2).sum()) if len(y) else 0.0
