"""Oblique decision trees grown breadth-first under a leaf budget.

Nodes are processed layer by layer in insertion order. A node holding a
single sample (or one that admits no split) is carried unchanged into the
next layer; every successful split adds one leaf, and growth stops as soon as
the tree holds ``t_n`` leaves, even in the middle of a layer. Each split is
recorded in ``ObliqueTree.trace`` together with the training loss after it,
so any prefix of the trace is itself a valid smaller tree. Pruning picks the
prefix length minimising a penalised training loss.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import BadTau, BudgetExceedsData, DimensionMismatch, WrongTask
from .split import NodeData, QRule, SplitConfig, SplitPlane, propose_and_select


@dataclass
class Node:
    id: int
    born: int          # layer at which the node was created
    layer: int         # layer at which it was split, or its final layer if a leaf
    count: int
    value: float       # node mean of the training targets
    sse: float
    errors: int        # training misclassifications under the >= 0.5 vote
    plane: Optional[SplitPlane] = None
    left: Optional[int] = None
    right: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.plane is None


@dataclass(frozen=True)
class SplitEvent:
    node: int
    layer: int
    plane: SplitPlane
    gain: float
    sse_after: float
    errors_after: int


@dataclass
class ObliqueTree:
    nodes: list[Node]
    trace: list[SplitEvent]
    task: str
    n_features: int
    n_train: int
    t_n: int
    carried: list[tuple[int, int]] = field(default_factory=list)

    @property
    def n_leaves(self) -> int:
        return sum(node.is_leaf for node in self.nodes)

    @property
    def leaves(self) -> list[Node]:
        return [node for node in self.nodes if node.is_leaf]

    @property
    def depth(self) -> int:
        return max(node.layer for node in self.nodes)

    def training_sse(self) -> np.ndarray:
        """Training SSE of the trees with 1, 2, ..., n_leaves leaves."""
        return np.array([self.nodes[0].sse] + [e.sse_after for e in self.trace])

    def training_errors(self) -> np.ndarray:
        return np.array([self.nodes[0].errors] + [e.errors_after for e in self.trace])

    def apply(self, X) -> np.ndarray:
        """Leaf id reached by every row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        out = np.empty(X.shape[0], dtype=np.intp)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            nid, idx = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                out[idx] = nid
                continue
            go_left = node.plane.project(X[idx]) <= node.plane.s
            stack.append((node.right, idx[~go_left]))
            stack.append((node.left, idx[go_left]))
        return out

    def predict(self, X) -> np.ndarray:
        values = np.array([node.value for node in self.nodes])
        return values[self.apply(X)]

    def classify(self, X) -> np.ndarray:
        if self.task != "classification":
            raise WrongTask("classify needs a classification tree")
        return (self.predict(X) >= 0.5).astype(int)


@dataclass(frozen=True)
class GrowConfig:
    t_n: Optional[int] = None      # None -> ceil(n ** 0.8)
    split: SplitConfig = field(default_factory=SplitConfig)
    seed: int = 0

    def leaf_budget(self, n: int) -> int:
        if self.t_n is not None:
            return self.t_n
        return default_leaf_budget(n)


def default_leaf_budget(n: int) -> int:
    return max(1, min(n, math.ceil(n ** 0.8)))


@dataclass(frozen=True)
class PruneConfig:
    alpha: Optional[float] = None  # None -> task default, see default_alpha

    def __post_init__(self):
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


def _errors(y: np.ndarray) -> int:
    ones = int(y.sum())
    return len(y) - ones if ones * 2 >= len(y) else ones


def grow(dataset: Dataset, train_indices=None, config: GrowConfig = GrowConfig(),
         randomized: bool = True, rng: Optional[np.random.Generator] = None) -> ObliqueTree:
    """Grow one tree on ``dataset.features[train_indices]``.

    With ``randomized=False`` every candidate direction uses all coordinates.
    """
    idx = np.arange(dataset.n) if train_indices is None else np.asarray(train_indices, dtype=np.intp)
    n = len(idx)
    if n < 1:
        raise BudgetExceedsData("cannot grow a tree without training samples")
    t_n = config.leaf_budget(n)
    if t_n > n:
        raise BudgetExceedsData(f"leaf budget t_n={t_n} exceeds training size n={n}")
    if t_n < 1:
        raise BudgetExceedsData("leaf budget must be at least 1")
    split_config = config.split
    if not randomized:
        split_config = replace(split_config, q_rule=QRule("fixed", dataset.p))
    if rng is None:
        rng = np.random.default_rng(config.seed)

    y = dataset.targets
    is_clf = dataset.task == "classification"

    def make_node(nid, born, members):
        data = NodeData.from_indices(y, members)
        return Node(nid, born, born, data.count, data.mean, data.sse,
                    _errors(y[members]) if is_clf else 0), data

    root, root_data = make_node(0, 0, idx)
    nodes = [root]
    members = {0: root_data}
    trace: list[SplitEvent] = []
    carried: list[tuple[int, int]] = []
    queues: dict[int, deque] = defaultdict(deque)
    queues[0].append(0)
    layer, leaves, progressed = 0, 1, False
    sse, errors = root.sse, root.errors

    while leaves < t_n:
        if not queues[layer]:
            if not progressed:
                break  # a whole layer went by without a split: nothing left to divide
            layer += 1
            progressed = False
            continue
        nid = queues[layer].popleft()
        node = nodes[nid]
        cand = propose_and_select(members[nid], dataset, split_config, rng, n_root=n)
        if cand is None:
            node.layer = layer + 1
            queues[layer + 1].append(nid)
            carried.append((nid, layer + 1))
            continue

        rows = members[nid].indices
        go_left = cand.plane.goes_left(dataset.features[rows])
        left, left_data = make_node(len(nodes), layer + 1, rows[go_left])
        right, right_data = make_node(len(nodes) + 1, layer + 1, rows[~go_left])
        nodes += [left, right]
        members[left.id], members[right.id] = left_data, right_data
        node.plane, node.left, node.right, node.layer = cand.plane, left.id, right.id, layer
        queues[layer + 1].extend((left.id, right.id))
        del members[nid]

        sse -= max(node.sse - left.sse - right.sse, 0.0)
        errors += left.errors + right.errors - node.errors
        trace.append(SplitEvent(nid, layer, cand.plane, cand.gain, sse, errors))
        leaves += 1
        progressed = True

    return ObliqueTree(nodes, trace, dataset.task, dataset.p, n, t_n, carried)


def predict(tree: ObliqueTree, x) -> np.ndarray | float:
    """Leaf mean for a point or for every row of a matrix."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(tree.predict(x[None, :])[0])
    return tree.predict(x)


def classify(tree: ObliqueTree, x) -> np.ndarray | int:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return int(tree.classify(x[None, :])[0])
    return tree.classify(x)


def truncate_to_leaves(tree: ObliqueTree, tau: int) -> ObliqueTree:
    """The tree made of the first ``tau - 1`` recorded splits."""
    if not 1 <= tau <= tree.n_leaves:
        raise BadTau(f"tau must lie in 1..{tree.n_leaves}, got {tau}")
    kept = tree.trace[: tau - 1]
    split_nodes = {e.node for e in kept}
    # split k creates nodes 2k+1 and 2k+2, so a prefix of splits is a prefix of nodes
    n_nodes = 2 * (tau - 1) + 1
    last_layer = kept[-1].layer + 1 if kept else 0
    carried = [(nid, l) for nid, l in tree.carried
               if nid < n_nodes and nid not in split_nodes and l <= last_layer]
    nodes = []
    for node in tree.nodes[:n_nodes]:
        if node.id in split_nodes:
            nodes.append(replace(node))
        else:
            final = max([node.born] + [l for nid, l in carried if nid == node.id])
            nodes.append(replace(node, plane=None, left=None, right=None, layer=final))
    return ObliqueTree(nodes, list(kept), tree.task, tree.n_features, tree.n_train, tree.t_n, carried)


def default_alpha(tree: ObliqueTree) -> float:
    n = tree.n_train
    if tree.task == "classification":
        return n ** -0.5
    return n ** -0.5 * tree.nodes[0].sse / n


def select_leaf_count(losses, alpha: float) -> int:
    """1-based tau minimising ``losses[tau - 1] + alpha * tau``; smallest tau on ties."""
    losses = np.asarray(losses, dtype=float)
    objective = losses + alpha * np.arange(1, len(losses) + 1)
    return int(np.argmin(objective)) + 1


def pruning_losses(tree: ObliqueTree) -> np.ndarray:
    """Average training loss (squared or 0-1) of every trace prefix."""
    if tree.task == "classification":
        return tree.training_errors() / tree.n_train
    return tree.training_sse() / tree.n_train


def prune(tree: ObliqueTree, config: PruneConfig = PruneConfig()) -> ObliqueTree:
    alpha = default_alpha(tree) if config.alpha is None else config.alpha
    return truncate_to_leaves(tree, select_leaf_count(pruning_losses(tree), alpha))


class InvariantViolation(AssertionError):
    pass


def check_tree_invariants(tree: ObliqueTree, rtol: float = 1e-8) -> None:
    """Structural and bookkeeping checks on a grown (or truncated) tree."""
    internal = [node for node in tree.nodes if not node.is_leaf]
    if tree.n_leaves != len(internal) + 1:
        raise InvariantViolation("leaf count must equal internal count + 1")
    if tree.n_leaves > tree.t_n:
        raise InvariantViolation("leaf count exceeds the budget")
    if [e.node for e in tree.trace] != [node.id for node in sorted(internal, key=lambda nd: nd.left)]:
        raise InvariantViolation("trace order disagrees with node creation order")
    for node in internal:
        for child in (tree.nodes[node.left], tree.nodes[node.right]):
            if child.born != node.layer + 1:
                raise InvariantViolation(f"child {child.id} not one layer below its parent")
        if tree.nodes[node.left].count + tree.nodes[node.right].count != node.count:
            raise InvariantViolation(f"children of node {node.id} do not partition its samples")
    sse = tree.training_sse()
    scale = max(sse[0], 1e-300)
    for k, e in enumerate(tree.trace, start=1):
        gain = e.gain / 2 if tree.task == "classification" else e.gain
        expected = sse[k - 1] - tree.nodes[e.node].count * gain
        if abs(sse[k] - expected) > rtol * scale:
            raise InvariantViolation(f"SSE bookkeeping off at split {k}: {sse[k]} vs {expected}")
