"""Metrics, synthetic targets, Monte-Carlo risk and the benchmarking protocol."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .data import Dataset, RawDataset, load_csv, partition, prepare
from .errors import BadSpec, LengthMismatch, ZeroDenominator
from .forest import ForestConfig, fit_forest
from .split import QRule, SplitConfig, project
from .tree import GrowConfig, PruneConfig, grow, prune

# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def rpe(predictions, y_test, y_train_mean: float) -> float:
    """Relative prediction error: squared error over that of the training mean."""
    pred = np.asarray(predictions, dtype=float)
    y = np.asarray(y_test, dtype=float)
    if pred.shape != y.shape:
        raise LengthMismatch("predictions and targets differ in length")
    if y.size == 0:
        raise ValueError("empty test set")
    denom = float(np.sum((y_train_mean - y) ** 2))
    if denom == 0:
        raise ZeroDenominator("every test target equals the training mean")
    return float(np.sum((pred - y) ** 2)) / denom


def mr(predicted_labels, true_labels) -> float:
    """Misclassification rate."""
    pred = np.asarray(predicted_labels)
    y = np.asarray(true_labels)
    if pred.shape != y.shape:
        raise LengthMismatch("predicted and true labels differ in length")
    if y.size == 0:
        raise ValueError("empty test set")
    return float(np.mean(pred != y))


# ---------------------------------------------------------------------------
# Synthetic targets
# ---------------------------------------------------------------------------

BASES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sigmoid": lambda v: 0.5 * (1.0 + np.tanh(0.5 * v)),
    "sine": np.sin,
    "quadratic": np.square,
    "linear": lambda v: v,
}


@dataclass(frozen=True)
class Component:
    """``amplitude * base(scale * theta^T x_S + offset)``."""

    subset: tuple[int, ...]
    theta: np.ndarray
    base: str = "linear"
    amplitude: float = 1.0
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if self.base not in BASES:
            raise BadSpec(f"unknown base function {self.base!r}")
        if theta.shape != (len(self.subset),) or not self.subset:
            raise BadSpec("theta needs one entry per subset coordinate")
        if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
            raise BadSpec("component directions must be unit vectors")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "subset", tuple(int(j) for j in self.subset))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        v = project(X, self.subset, self.theta)
        return self.amplitude * BASES[self.base](self.scale * v + self.offset)


@dataclass(frozen=True)
class SyntheticTarget:
    kind: str
    components: tuple[Component, ...]
    p: int
    noise_sigma: float = 0.0
    intercept: float = 0.0

    def __post_init__(self):
        if self.kind not in ("ridge_sum", "extended_additive"):
            raise BadSpec(f"unknown target kind {self.kind!r}")
        if self.p < 1 or not self.components:
            raise BadSpec("need p >= 1 and at least one component")
        if self.noise_sigma < 0:
            raise BadSpec("noise_sigma must be nonnegative")
        if any(max(c.subset) >= self.p for c in self.components):
            raise BadSpec("component uses a coordinate beyond p")
        object.__setattr__(self, "components", tuple(self.components))

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.intercept + sum(c(X) for c in self.components)

    @classmethod
    def ridge(cls, theta, base: str = "linear", *, scale: float = 1.0, amplitude: float = 1.0,
              offset: float = 0.0, intercept: float = 0.0, noise_sigma: float = 0.0) -> SyntheticTarget:
        """Single ridge function of all coordinates."""
        theta = np.asarray(theta, dtype=float)
        comp = Component(tuple(range(len(theta))), theta, base, amplitude, scale, offset)
        return cls("ridge_sum", (comp,), len(theta), noise_sigma, intercept)


def _direction(q: int, how: str, rng: np.random.Generator) -> np.ndarray:
    if how == "equal":
        return np.full(q, 1.0 / np.sqrt(q))
    if how == "random":
        v = rng.standard_normal(q)
        return v / np.linalg.norm(v)
    raise BadSpec(f"unknown direction rule {how!r}")


def make_target(kind: str = "ridge_sum", p: int = 5, n_components: int = 1, q: Optional[int] = None,
                bases: Sequence[str] = ("sine",), scale: float = 1.0, amplitude: float = 1.0,
                intercept: float = 0.0, noise_sigma: float = 0.0, direction: str = "random",
                seed: int = 0) -> SyntheticTarget:
    """Random member of the ridge-sum or extended-additive family.

    ``ridge_sum`` uses ``n_components`` ridge functions of all ``p``
    coordinates. ``extended_additive`` uses ``n_components`` functions that
    each touch exactly ``q`` coordinates; the coordinate groups are disjoint
    whenever ``n_components * q <= p``.
    """
    if p < 1 or n_components < 1 or not bases:
        raise BadSpec("need p >= 1, at least one component and one base function")
    rng = np.random.default_rng(seed)
    if kind == "ridge_sum":
        subsets = [tuple(range(p))] * n_components
    elif kind == "extended_additive":
        if q is None or not 1 <= q <= p:
            raise BadSpec("extended_additive needs 1 <= q <= p")
        if n_components * q <= p:
            perm = rng.permutation(p)
            subsets = [tuple(sorted(perm[k * q:(k + 1) * q])) for k in range(n_components)]
        else:
            from math import comb
            if n_components > comb(p, q):
                raise BadSpec("more components than distinct coordinate groups")
            chosen: list[tuple[int, ...]] = []
            while len(chosen) < n_components:
                s = tuple(sorted(rng.permutation(p)[:q]))
                if s not in chosen:
                    chosen.append(s)
            subsets = chosen
    else:
        raise BadSpec(f"unknown target kind {kind!r}")
    comps = tuple(
        Component(tuple(int(j) for j in s), _direction(len(s), direction, rng),
                  bases[k % len(bases)], amplitude, scale)
        for k, s in enumerate(subsets))
    return SyntheticTarget(kind, comps, p, noise_sigma, intercept)


def sample(target: SyntheticTarget, n: int, seed, task: str = "regression") -> Dataset:
    """Draw ``n`` points uniformly from the unit cube and noisy responses."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, target.p))
    m = target(X)
    if task == "classification":
        y = (rng.random(n) < np.clip(m, 0.0, 1.0)).astype(float)
    else:
        y = m + target.noise_sigma * rng.standard_normal(n)
    return Dataset(X, y, task)


def _as_function(model):
    return model.predict if hasattr(model, "predict") else model


def l2_risk(model, target: SyntheticTarget, n_mc: int = 20000, seed=0) -> float:
    """Monte-Carlo estimate of the integrated squared error under the uniform law."""
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    U = np.random.default_rng(seed).random((n_mc, target.p))
    diff = np.asarray(_as_function(model)(U), dtype=float) - target(U)
    return float(np.mean(diff * diff))


def bayes_rate(target: SyntheticTarget, n_mc: int = 20000, seed=0) -> float:
    """Misclassification rate of the Bayes classifier for ``Y ~ Bernoulli(m(X))``."""
    U = np.random.default_rng(seed).random((n_mc, target.p))
    eta = np.clip(target(U), 0.0, 1.0)
    return float(np.mean(np.minimum(eta, 1.0 - eta)))


# ---------------------------------------------------------------------------
# Methods
# ---------------------------------------------------------------------------

_METHOD_RE = re.compile(r"^(odt|cart|odrf)(?:-(q\d+|theory|practical))?(-pruned)?$")


@dataclass(frozen=True)
class Method:
    """A named recipe for fitting one predictor on a training set.

    ``odt`` grows one tree with full-dimensional directions, ``cart`` one
    axis-aligned tree, ``odrf`` a forest of randomized trees and ``mean`` the
    constant training-mean (or majority-class) predictor.
    """

    name: str
    kind: str
    pruned: bool = False
    q_rule: Optional[QRule] = None
    trees: int = 100
    t_n: Optional[int] = None
    alpha: Optional[float] = None
    split: SplitConfig = field(default_factory=SplitConfig)
    bootstrap: bool = False
    aggregation: str = "vote"

    @classmethod
    def parse(cls, name: str, **settings) -> Method:
        """Build from names like ``odrf``, ``odrf-q2-pruned``, ``cart`` or ``mean-baseline``."""
        name = name.strip()
        if name in ("mean", "mean-baseline"):
            return cls(name, "mean", **settings)
        match = _METHOD_RE.match(name)
        if match is None:
            raise BadSpec(f"unknown method {name!r}")
        kind, rule, pruned = match.groups()
        q_rule = None
        if rule is not None:
            q_rule = QRule("fixed", int(rule[1:])) if rule.startswith("q") else QRule(rule)
        return cls(name, kind, pruned is not None, q_rule, **settings)

    def _split_config(self) -> SplitConfig:
        if self.kind == "cart":
            return replace(self.split, q_rule=QRule("fixed", 1), include_cart_candidate=True)
        if self.q_rule is not None:
            return replace(self.split, q_rule=self.q_rule)
        return self.split

    def fit(self, dataset: Dataset, seed: int = 0, threads: int = 1) -> Fitted:
        if self.kind == "mean":
            return Fitted(_ConstantModel(dataset), dataset.task)
        prune_config = PruneConfig(self.alpha) if self.pruned else None
        grow_config = GrowConfig(self.t_n, self._split_config(), seed)
        if self.kind == "odrf":
            config = ForestConfig(self.trees, grow_config, prune_config, self.bootstrap, seed,
                                  aggregation=self.aggregation)
            return Fitted(fit_forest(dataset, None, config, threads), dataset.task)
        randomized = self.kind == "cart" or self.q_rule is not None
        tree = grow(dataset, None, grow_config, randomized=randomized, rng=np.random.default_rng(seed))
        if prune_config is not None:
            tree = prune(tree, prune_config)
        return Fitted(tree, dataset.task)


class _ConstantModel:
    def __init__(self, dataset: Dataset):
        self.value = float(dataset.targets.mean())
        self.task = dataset.task

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.value)


@dataclass
class Fitted:
    """A fitted model with a uniform ``predict``: values for regression, labels for classification."""

    model: object
    task: str

    def regress(self, X) -> np.ndarray:
        """Real-valued output (leaf means averaged over trees)."""
        m = self.model
        if hasattr(m, "tree_predictions"):
            return m.tree_predictions(X).mean(axis=0)
        return m.predict(X)

    def predict(self, X) -> np.ndarray:
        if self.task == "regression":
            return self.regress(X)
        m = self.model
        if hasattr(m, "tree_predictions"):
            return m.predict(X)
        return (m.predict(X) >= 0.5).astype(int)


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# Consistency curves
# ---------------------------------------------------------------------------


@dataclass
class RiskReport:
    method: str
    n_values: list[int]
    risks: np.ndarray  # (len(n_values), repetitions)

    @property
    def summary(self) -> np.ndarray:
        return np.median(self.risks, axis=1)

    def rows(self) -> list[tuple]:
        return [(self.method, n, "median_l2_risk", float(v)) for n, v in zip(self.n_values, self.summary)]

    def detail_rows(self) -> list[tuple]:
        return [(self.method, n, r + 1, "l2_risk", float(v))
                for n, row in zip(self.n_values, self.risks) for r, v in enumerate(row)]


def consistency_curve(target: SyntheticTarget, n_values: Sequence[int], method: Method,
                      repetitions: int = 5, n_mc: int = 20000, seed: int = 0,
                      threads: int = 1) -> RiskReport:
    """L2 risk of ``method`` on fresh samples of growing size.

    Each (n, repetition) pair uses seeds derived from ``(seed, n, repetition)``
    only, so different methods see identical samples and Monte-Carlo points.
    """
    n_values = [int(n) for n in n_values]
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be increasing")
    risks = np.empty((len(n_values), repetitions))
    for i, n in enumerate(n_values):
        for r in range(repetitions):
            data = sample(target, n, [seed, n, r, 0])
            fitted = method.fit(data, derive_seed(seed, n, r, 1), threads)
            risks[i, r] = l2_risk(fitted.regress, target, n_mc, [seed, n, r, 2])
    return RiskReport(method.name, n_values, risks)


# ---------------------------------------------------------------------------
# Benchmark protocol
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkResult:
    metric: str
    values: dict[str, np.ndarray]  # method -> per-partition metric

    @property
    def means(self) -> dict[str, float]:
        return {m: float(v.mean()) for m, v in self.values.items()}

    def rows(self) -> list[tuple]:
        out = []
        for method, vals in self.values.items():
            out += [(method, r + 1, self.metric, float(v)) for r, v in enumerate(vals)]
            out.append((method, "mean", self.metric, float(vals.mean())))
        return out


def benchmark(data: RawDataset | str | Path, methods: Sequence[Method], repetitions: int = 100,
              seed: int = 0, scaling: str = "train", threads: int = 1,
              target_name: Optional[str] = None, task: str = "regression") -> BenchmarkResult:
    """Repeated random train/test partitions; RPE for regression, MR for classification."""
    raw = data if isinstance(data, RawDataset) else load_csv(data, target_name, task)
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    metric = "RPE" if raw.task == "regression" else "MR"
    values = {m.name: np.empty(repetitions) for m in methods}
    for r in range(1, repetitions + 1):
        part = partition(raw.n, [seed, r])
        train, test, _ = prepare(raw, part, scaling)
        for m in methods:
            fitted = m.fit(train, derive_seed(seed, r), threads)
            pred = fitted.predict(test.features)
            if raw.task == "regression":
                values[m.name][r - 1] = rpe(pred, test.targets, train.targets.mean())
            else:
                values[m.name][r - 1] = mr(pred, test.targets)
    return BenchmarkResult(metric, values)
