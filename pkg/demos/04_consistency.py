# %% [markdown]
# # Risk against sample size
#
# With a known target we can estimate the L2 risk `E|m_hat(X) - m(X)|^2` by
# Monte Carlo and watch it shrink as `n` grows, with the leaf budget set to
# `ceil(n^0.8)`.

# %%
import numpy as np

from odrf.evaluation import Method, SyntheticTarget, consistency_curve, make_target

ridge = SyntheticTarget.ridge(np.ones(5) / np.sqrt(5), "sine", scale=4.0, noise_sigma=0.1)
report = consistency_curve(ridge, [250, 500, 1000, 2000], Method.parse("odt"), repetitions=3, n_mc=10000)
for n, risk in zip(report.n_values, report.summary):
    print(f"n={n:5d}  median risk {risk:.4f}")

# %% [markdown]
# ## Additive targets and a fixed subset size
#
# When the target is a sum of functions of two coordinates each, a forest
# that always combines `q = 2` coordinates is a natural match.

# %%
additive = make_target("extended_additive", p=6, n_components=3, q=2, scale=4.0,
                       noise_sigma=0.1, direction="equal", seed=0)
print([c.subset for c in additive.components])
report = consistency_curve(additive, [250, 1000], Method.parse("odrf-q2", trees=5), repetitions=2, n_mc=5000)
print({n: round(float(r), 4) for n, r in zip(report.n_values, report.summary)})

# %% [markdown]
# ## Pruning strength
#
# The default penalty `n^{-1/2} Var(y)` is strong for a smooth target at this
# scale: the pruned tree keeps only a handful of leaves.

# %%
pruned = consistency_curve(ridge, [2000], Method.parse("odt-pruned"), repetitions=3, n_mc=10000)
print("pruned median risk at n=2000:", pruned.summary.round(4))
