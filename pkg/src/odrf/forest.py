"""Oblique random forests: averages (or votes) of randomized oblique trees.

Tree ``b`` (1-based) draws all of its randomness from a generator seeded by
``(seed, b)``, so the fitted forest does not depend on the order or the
threads in which trees are grown.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import BadSpec, DimensionMismatch
from .split import QRule, draw_subset  # noqa: F401  (draw_subset is part of this module's surface)
from .tree import GrowConfig, ObliqueTree, PruneConfig, grow, prune


@dataclass(frozen=True)
class ForestConfig:
    B: int = 100
    grow: GrowConfig = field(default_factory=GrowConfig)
    prune: Optional[PruneConfig] = None
    bootstrap: bool = False
    seed: int = 0
    randomized: bool = True
    aggregation: str = "vote"  # classification only: "vote" or "mean"

    def __post_init__(self):
        if self.B < 1:
            raise BadSpec("a forest needs at least one tree")
        if self.aggregation not in ("vote", "mean"):
            raise BadSpec(f"unknown aggregation {self.aggregation!r}")

    @property
    def q_rule(self) -> QRule:
        return self.grow.split.q_rule


@dataclass
class Forest:
    trees: list[ObliqueTree]
    task: str
    aggregation: str = "vote"

    def __post_init__(self):
        if not self.trees:
            raise BadSpec("empty forest")
        if len({(t.task, t.n_features) for t in self.trees}) != 1:
            raise BadSpec("all trees must share task and dimension")

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def tree_predictions(self, X) -> np.ndarray:
        """(B, n) matrix of per-tree leaf means."""
        return np.stack([t.predict(X) for t in self.trees])

    def vote_fraction(self, X) -> np.ndarray:
        return (self.tree_predictions(X) >= 0.5).mean(axis=0)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        preds = self.tree_predictions(X)
        if self.task == "regression":
            return preds.mean(axis=0)
        if self.aggregation == "mean":
            return (preds.mean(axis=0) >= 0.5).astype(int)
        return aggregate_votes((preds >= 0.5).astype(int))


def aggregate_votes(votes) -> np.ndarray:
    """Majority class per column of a (B, n) 0/1 vote matrix; exact ties go to 0."""
    votes = np.asarray(votes)
    return (2 * votes.sum(axis=0) > votes.shape[0]).astype(int)


def tree_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng([seed, b])


def _fit_one(dataset: Dataset, idx: np.ndarray, config: ForestConfig, b: int) -> ObliqueTree:
    rng = tree_rng(config.seed, b)
    rows = idx
    if config.bootstrap:
        rows = np.sort(rng.choice(idx, size=len(idx), replace=True))
    tree = grow(dataset, rows, config.grow, randomized=config.randomized, rng=rng)
    if config.prune is not None:
        tree = prune(tree, config.prune)
    return tree


def fit_forest(dataset: Dataset, train_indices=None, config: ForestConfig = ForestConfig(),
               threads: int = 1) -> Forest:
    idx = np.arange(dataset.n) if train_indices is None else np.asarray(train_indices, dtype=np.intp)
    bs = range(1, config.B + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(lambda b: _fit_one(dataset, idx, config, b), bs))
    else:
        trees = [_fit_one(dataset, idx, config, b) for b in bs]
    return Forest(trees, dataset.task, config.aggregation)


def predict_forest(forest: Forest, x) -> np.ndarray | float | int:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        out = forest.predict(x[None, :])[0]
        return float(out) if forest.task == "regression" else int(out)
    return forest.predict(x)
