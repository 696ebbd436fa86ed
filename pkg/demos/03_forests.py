# %% [markdown]
# # Oblique random forests
#
# Each tree draws, at every candidate split, a random coordinate subset whose
# size follows a q rule, fits a direction on it and keeps the best cut. The
# forest averages trees for regression and takes a majority vote for
# classification. Tree `b` uses its own generator seeded by `(seed, b)`.

# %%
import numpy as np

from odrf.evaluation import Method, SyntheticTarget, mr, sample
from odrf.forest import ForestConfig, fit_forest
from odrf.split import QRule, SplitConfig
from odrf.tree import GrowConfig

theta = np.ones(5) / np.sqrt(5)
target = SyntheticTarget.ridge(theta, "sine", scale=4.0, noise_sigma=0.1)
train, test = sample(target, 600, 0), sample(target, 3000, 1)

# %% [markdown]
# ## One oblique tree, one axis-aligned tree, one forest

# %%
def test_mse(name, **kw):
    fitted = Method.parse(name, **kw).fit(train, seed=0)
    return np.mean((fitted.predict(test.features) - test.targets) ** 2)


for name in ("cart", "odt", "odrf"):
    print(f"{name:5s} test MSE {test_mse(name, trees=10):.4f}")

# %% [markdown]
# ## Averaging never hurts the squared error
#
# The forest's squared error is at most the mean of its trees' errors.

# %%
config = ForestConfig(B=10, grow=GrowConfig(split=SplitConfig(q_rule=QRule("theory"))), seed=3)
forest = fit_forest(train, config=config)
per_tree = ((forest.tree_predictions(test.features) - test.targets) ** 2).mean(axis=1)
print("mean tree MSE", per_tree.mean().round(4), "forest MSE",
      np.mean((forest.predict(test.features) - test.targets) ** 2).round(4))

# %% [markdown]
# ## Classification by vote

# %%
clf_target = SyntheticTarget.ridge(theta, "sine", scale=4.0, amplitude=0.4, intercept=0.5)
ctrain = sample(clf_target, 600, 2, "classification")
ctest = sample(clf_target, 3000, 3, "classification")
eta = clf_target(ctest.features)
votes = Method.parse("odrf", trees=10).fit(ctrain, seed=0)
print("MR", mr(votes.predict(ctest.features), ctest.targets), "Bayes rate", np.minimum(eta, 1 - eta).mean().round(3))
