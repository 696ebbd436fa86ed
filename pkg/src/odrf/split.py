"""Choosing one oblique cut ``theta^T x_S <= s`` for a node.

The gain criteria work on a node's target vector and a boolean mask of the
left daughter (the side with ``theta^T x_S <= s``). ``best_threshold`` scans
every midpoint between consecutive distinct projections in one sorted pass,
and ``propose_and_select`` compares a handful of candidate directions fitted
on random coordinate subsets, optionally alongside the exhaustive
axis-aligned (CART) split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import BadSpec, EmptySide, NonBinary, NoValidSplit

# Gains within TIE_RTOL * (parent impurity) of the best are treated as ties.
TIE_RTOL = 1e-12
NORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


def project(X: np.ndarray, subset, theta) -> np.ndarray:
    """Row-wise ``theta^T x_S``.

    Summed explicitly so that a row's projection does not depend on which
    other rows share the batch.
    """
    return (X[:, np.asarray(subset, dtype=np.intp)] * np.asarray(theta)).sum(axis=1)


@dataclass(frozen=True)
class SplitPlane:
    subset: tuple[int, ...]
    theta: np.ndarray
    s: float

    def __post_init__(self):
        subset = tuple(int(j) for j in self.subset)
        theta = np.array(self.theta, dtype=float).reshape(-1)
        theta.setflags(write=False)
        if not subset or any(b <= a for a, b in zip(subset, subset[1:])) or subset[0] < 0:
            raise ValueError(f"subset must be nonempty and strictly increasing, got {subset}")
        if theta.shape != (len(subset),):
            raise ValueError("theta needs one coefficient per subset coordinate")
        if abs(np.linalg.norm(theta) - 1.0) > NORM_TOL:
            raise ValueError(f"theta must be a unit vector, norm is {np.linalg.norm(theta)}")
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "s", float(self.s))

    @property
    def q(self) -> int:
        return len(self.subset)

    def project(self, X: np.ndarray) -> np.ndarray:
        return project(np.atleast_2d(X), self.subset, self.theta)

    def goes_left(self, X: np.ndarray) -> np.ndarray:
        return self.project(X) <= self.s

    def flipped(self) -> SplitPlane:
        return SplitPlane(self.subset, -self.theta, -self.s)

    def __eq__(self, other):
        if not isinstance(other, SplitPlane):
            return NotImplemented
        return (self.subset == other.subset and self.s == other.s
                and np.array_equal(self.theta, other.theta))

    def __hash__(self):
        return hash((self.subset, self.s, self.theta.tobytes()))


@dataclass(frozen=True)
class NodeData:
    indices: np.ndarray
    mean: float
    sse: float

    @classmethod
    def from_indices(cls, targets: np.ndarray, indices) -> NodeData:
        idx = np.asarray(indices, dtype=np.intp)
        y = targets[idx]
        mean = float(y.mean())
        return cls(idx, mean, float(((y - mean) ** 2).sum()))

    @property
    def count(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SplitCandidate:
    plane: SplitPlane
    gain: float
    left_count: int
    right_count: int


@dataclass(frozen=True)
class QRule:
    """How many coordinates each candidate direction may combine.

    ``practical`` draws q uniformly from 1..min(floor(sqrt(n)), p) with n the
    root training size, ``theory`` from 1..p, ``fixed`` always uses ``q`` and
    ``axis_aligned`` proposes only the exhaustive single-feature split.
    """

    kind: str = "practical"
    q: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("practical", "theory", "fixed", "axis_aligned"):
            raise BadSpec(f"unknown q rule {self.kind!r}")
        if self.kind == "fixed" and (self.q is None or self.q < 1):
            raise BadSpec("fixed q rule needs q >= 1")

    @classmethod
    def parse(cls, text: str) -> QRule:
        text = text.strip().lower()
        if text.startswith("fixed"):
            _, _, q = text.partition(":")
            if not q.isdigit():
                raise BadSpec(f"expected fixed:<q>, got {text!r}")
            return cls("fixed", int(q))
        if text in ("axis", "axis_aligned", "axis-aligned"):
            return cls("axis_aligned")
        return cls(text)

    def __str__(self):
        return f"fixed:{self.q}" if self.kind == "fixed" else self.kind


@dataclass(frozen=True)
class SplitConfig:
    n_candidates: int = 10
    q_rule: QRule = field(default_factory=QRule)
    ridge_lambda: float = 1e-6
    include_cart_candidate: bool = True
    min_gain: float = 0.0
    irls_steps: int = 5

    def __post_init__(self):
        if self.n_candidates < 1:
            raise BadSpec("n_candidates must be at least 1")
        if isinstance(self.q_rule, str):
            object.__setattr__(self, "q_rule", QRule.parse(self.q_rule))


# ---------------------------------------------------------------------------
# Gain criteria
# ---------------------------------------------------------------------------


def _sides(y, left_membership):
    y = np.asarray(y, dtype=float)
    left = np.asarray(left_membership, dtype=bool)
    if left.shape != y.shape:
        raise ValueError("mask must match the target vector")
    n_left = int(left.sum())
    if n_left == 0 or n_left == len(y):
        raise EmptySide("both daughters must contain at least one sample")
    return y, left


def impurity_gain(y, left_membership) -> float:
    """Decrease in within-node mean squared deviation caused by the split."""
    y, left = _sides(y, left_membership)
    N = len(y)
    yl, yr = y[left], y[~left]
    parent = np.mean((y - y.mean()) ** 2)
    children = (len(yl) / N) * np.mean((yl - yl.mean()) ** 2) + (len(yr) / N) * np.mean((yr - yr.mean()) ** 2)
    return max(float(parent - children), 0.0)


def stump_gain(y, left_membership) -> float:
    """Squared inner product of the centred response with the normalised stump.

    Mathematically identical to :func:`impurity_gain`; kept as an independent
    route for cross-checking it.
    """
    y, left = _sides(y, left_membership)
    p_left = left.mean()
    p_right = 1.0 - p_left
    stump = np.where(left, p_right, -p_left) / math.sqrt(p_left * p_right)
    return float(np.mean((y - y.mean()) * stump) ** 2)


def _sum_sq_props(y):
    p1 = y.mean()
    return p1 * p1 + (1.0 - p1) * (1.0 - p1)


def gini_gain(y, left_membership) -> float:
    y, left = _sides(y, left_membership)
    if not np.isin(y, (0.0, 1.0)).all():
        raise NonBinary("Gini gain needs labels in {0, 1}")
    N = len(y)
    yl, yr = y[left], y[~left]
    gain = -_sum_sq_props(y) + len(yl) / N * _sum_sq_props(yl) + len(yr) / N * _sum_sq_props(yr)
    return max(float(gain), 0.0)


# ---------------------------------------------------------------------------
# Threshold scan
# ---------------------------------------------------------------------------


def scan_columns(Z: np.ndarray, y: np.ndarray, criterion: str = "variance"):
    """Best midpoint threshold for every column of ``Z`` at once.

    Returns ``(s, gain, left_count)``; columns without two distinct values get
    ``gain = -inf``. Within a column the smallest threshold among (near-)tied
    gains wins.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    N, k = Z.shape
    if N < 2:
        return np.full(k, np.nan), np.full(k, -np.inf), np.zeros(k, dtype=np.intp)

    order = np.argsort(Z, axis=0, kind="stable")
    Zs = np.take_along_axis(Z, order, axis=0)
    n_left = np.arange(1, N, dtype=float)[:, None]
    n_right = N - n_left

    if criterion == "variance":
        if np.ptp(y) == 0:
            gains = np.zeros((N - 1, k))
            parent = 0.0
        else:
            yc = y - y.mean()
            total = yc.sum()
            left_sum = np.cumsum(yc[order], axis=0)[:-1]
            diff = left_sum / n_left - (total - left_sum) / n_right
            gains = (n_left * n_right / (N * N)) * diff * diff
            parent = float(np.mean(yc * yc))
    elif criterion == "gini":
        ones_left = np.cumsum(y[order], axis=0)[:-1]
        ones_right = y.sum() - ones_left
        zeros_left = n_left - ones_left
        zeros_right = n_right - ones_right
        sq_left = (ones_left ** 2 + zeros_left ** 2) / n_left
        sq_right = (ones_right ** 2 + zeros_right ** 2) / n_right
        parent_sq = _sum_sq_props(y)
        gains = (sq_left + sq_right) / N - parent_sq
        parent = 1.0 - parent_sq
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    gains = np.where(Zs[1:] > Zs[:-1], gains, -np.inf)
    best_gain = gains.max(axis=0)
    tied = gains >= (best_gain - TIE_RTOL * parent)[None, :]
    pos = np.argmax(tied, axis=0)
    cols = np.arange(k)
    lo, hi = Zs[pos, cols], Zs[pos + 1, cols]
    s = 0.5 * (lo + hi)
    s = np.where(s < hi, s, lo)
    gain = np.where(np.isfinite(best_gain), np.maximum(gains[pos, cols], 0.0), -np.inf)
    s = np.where(np.isfinite(best_gain), s, np.nan)
    return s, gain, pos + 1


def best_threshold(z, y, criterion: str = "variance") -> tuple[float, float]:
    """Threshold ``s`` maximising the gain of the cut ``z <= s``."""
    z = np.asarray(z, dtype=float).reshape(-1)
    s, gain, _ = scan_columns(z[:, None], y, criterion)
    if not np.isfinite(gain[0]):
        raise NoValidSplit("all projected values are equal")
    return float(s[0]), float(gain[0])


# ---------------------------------------------------------------------------
# Direction estimation
# ---------------------------------------------------------------------------


def _solve(A, b):
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(A, b, rcond=None)[0]


def _sigmoid(v):
    return 0.5 * (1.0 + np.tanh(0.5 * v))


def _axis_fallback(Xs, y, task):
    _, gain, _ = scan_columns(Xs, y, "gini" if task == "classification" else "variance")
    theta = np.zeros(Xs.shape[1])
    theta[int(np.argmax(gain))] = 1.0
    return theta


def fit_direction(features_on_subset, y, task: str = "regression",
                  lam: float = 1e-6, irls_steps: int = 5) -> np.ndarray:
    """Unit coefficient vector for projecting a node's samples.

    Regression uses ridge least squares on centred data; classification runs a
    few IRLS steps of ridge-penalised logistic regression. A numerically zero
    solution falls back to the best single coordinate.
    """
    Xs = np.asarray(features_on_subset, dtype=float)
    y = np.asarray(y, dtype=float)
    q = Xs.shape[1]
    if q == 1:
        return np.ones(1)
    if np.ptp(y) == 0:
        return _axis_fallback(Xs, y, task)

    Xc = Xs - Xs.mean(axis=0)
    if task == "classification":
        D = np.column_stack([np.ones(len(y)), Xc])
        penalty = np.full(q + 1, lam)
        penalty[0] = 0.0
        beta = np.zeros(q + 1)
        for _ in range(irls_steps):
            prob = _sigmoid(D @ beta)
            w = np.clip(prob * (1.0 - prob), 1e-6, 0.25)
            H = D.T @ (w[:, None] * D) + np.diag(penalty)
            g = D.T @ (y - prob) - penalty * beta
            beta = beta + _solve(H, g)
        coef = beta[1:]
    else:
        yc = y - y.mean()
        coef = _solve(Xc.T @ Xc + lam * np.eye(q), Xc.T @ yc)

    norm = float(np.linalg.norm(coef))
    if not np.isfinite(norm) or norm < 1e-12:
        return _axis_fallback(Xs, y, task)
    return coef / norm


# ---------------------------------------------------------------------------
# Candidate generation
# ---------------------------------------------------------------------------


def q_upper(p: int, q_rule: QRule, n: Optional[int] = None) -> int:
    if q_rule.kind == "theory":
        return p
    if q_rule.kind == "practical":
        if n is None:
            raise BadSpec("practical q rule needs the root sample size")
        return max(1, min(math.isqrt(int(n)), p))
    if q_rule.kind == "fixed":
        return q_rule.q
    return 1


def draw_subset(p: int, q_rule: QRule, rng: np.random.Generator,
                n: Optional[int] = None) -> tuple[int, np.ndarray]:
    """Draw the subset size q and then a uniform size-q coordinate subset."""
    if p < 1:
        raise BadSpec("need at least one coordinate")
    if q_rule.kind == "fixed":
        if q_rule.q > p:
            raise BadSpec(f"fixed q={q_rule.q} exceeds dimension p={p}")
        q = q_rule.q
    else:
        q = int(rng.integers(1, q_upper(p, q_rule, n) + 1))
    subset = np.sort(rng.permutation(p)[:q])
    return q, subset


def propose_and_select(node: NodeData, dataset: Dataset, config: SplitConfig,
                       rng: np.random.Generator, n_root: Optional[int] = None) -> Optional[SplitCandidate]:
    """Best of the candidate cuts for ``node``, or None if it cannot be split."""
    if node.count < 2:
        return None
    X = dataset.features[node.indices]
    y = dataset.targets[node.indices]
    if np.ptp(X, axis=0).max() == 0:
        return None
    task = dataset.task
    p = X.shape[1]
    n_root = dataset.n if n_root is None else n_root

    planes: list[tuple[tuple[int, ...], np.ndarray]] = []
    seen: set[tuple[int, ...]] = set()
    if config.q_rule.kind != "axis_aligned":
        for _ in range(config.n_candidates):
            _, subset = draw_subset(p, config.q_rule, rng, n_root)
            key = tuple(int(j) for j in subset)
            # same subset -> same deterministic direction -> same candidate
            if key in seen:
                continue
            seen.add(key)
            theta = fit_direction(X[:, subset], y, task, config.ridge_lambda, config.irls_steps)
            planes.append((key, theta))
    if config.include_cart_candidate or config.q_rule.kind == "axis_aligned":
        planes.extend(((j,), np.ones(1)) for j in range(p))

    Z = np.column_stack([project(X, subset, theta) for subset, theta in planes])
    criterion = "gini" if task == "classification" else "variance"
    s, gain, n_left = scan_columns(Z, y, criterion)
    ok = np.isfinite(gain) & (gain >= config.min_gain)
    if not ok.any():
        return None
    best = int(np.argmax(np.where(ok, gain, -np.inf)))
    subset, theta = planes[best]
    return SplitCandidate(SplitPlane(subset, theta, s[best]), float(gain[best]),
                          int(n_left[best]), int(node.count - n_left[best]))
