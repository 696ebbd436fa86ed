"""Oblique decision trees (ODT) and oblique random forests (ODRF)."""

__version__ = "0.1.0"

from .data import Dataset, RawDataset, ScalingTransform, apply_scaler, fit_minmax, load_csv, partition
from .split import QRule, SplitConfig, SplitPlane, best_threshold, gini_gain, impurity_gain, stump_gain
from .tree import GrowConfig, ObliqueTree, PruneConfig, grow, prune, truncate_to_leaves
from .forest import Forest, ForestConfig, fit_forest, predict_forest
from .evaluation import Method, SyntheticTarget, consistency_curve, l2_risk, make_target, mr, rpe, sample

__all__ = [
    "Dataset", "RawDataset", "ScalingTransform", "apply_scaler", "fit_minmax", "load_csv", "partition",
    "QRule", "SplitConfig", "SplitPlane", "best_threshold", "gini_gain", "impurity_gain", "stump_gain",
    "GrowConfig", "ObliqueTree", "PruneConfig", "grow", "prune", "truncate_to_leaves",
    "Forest", "ForestConfig", "fit_forest", "predict_forest",
    "Method", "SyntheticTarget", "consistency_curve", "l2_risk", "make_target", "mr", "rpe", "sample",
]
