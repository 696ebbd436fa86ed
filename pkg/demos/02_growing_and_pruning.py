# %% [markdown]
# # Growing a tree breadth-first under a leaf budget
#
# Nodes are split layer by layer. A node that cannot be divided (one sample,
# or identical feature rows) is carried to the next layer unchanged. Growth
# stops as soon as the tree has `t_n` leaves, possibly in the middle of a layer.

# %%
import numpy as np

from odrf.data import Dataset
from odrf.tree import GrowConfig, PruneConfig, grow, prune, truncate_to_leaves

X = (np.arange(12) / 11.0)[:, None]
y = np.array([0, 1, 0, 1, 0, 5, 100, 100, 100, 110, 110, 110], dtype=float)
data = Dataset(X, y)

tree = grow(data, config=GrowConfig(t_n=6), randomized=False)
for e in tree.trace:
    print(f"layer {e.layer}: split node {e.node} at s={e.plane.s:.3f}, SSE after {e.sse_after:.2f}")

# %% [markdown]
# Node 4 holds a single point, so it is carried into layer 3. Node 6 was
# queued in layer 2 but the budget ran out before its turn.

# %%
for leaf in tree.leaves:
    print(f"leaf {leaf.id}: born in layer {leaf.born}, {leaf.count} samples, mean {leaf.value:.2f}")
print("carried:", tree.carried)

# %% [markdown]
# ## Every prefix of the trace is a smaller tree
#
# Split decisions never look at `t_n`, so stopping after `tau - 1` splits
# gives exactly the tree grown with budget `tau`. Pruning uses this: it
# scores each prefix by training loss plus `alpha * tau`.

# %%
small = grow(data, config=GrowConfig(t_n=3), randomized=False)
print(truncate_to_leaves(tree, 3).trace == small.trace)

print("training SSE by leaf count:", tree.training_sse().round(2))
for alpha in (0.0, 1.0, 50.0, float(np.var(y))):
    print(f"alpha {alpha:8.2f} -> {prune(tree, PruneConfig(alpha=alpha)).n_leaves} leaves")

# %% [markdown]
# With `alpha = 0` pruning keeps the smallest tree that already reaches the
# full tree's loss; the last split here separates a constant node, so it is
# dropped.
