# %% [markdown]
# # CSV benchmarks and the command line
#
# A benchmark repeats a random train/test partition, scales every predictor to
# [0, 1] on the training rows and reports RPE (squared error relative to the
# training mean) or MR (misclassification rate).

# %%
import tempfile
from pathlib import Path

import numpy as np

from odrf.cli import main
from odrf.data import load_csv
from odrf.evaluation import Method, benchmark

workdir = Path(tempfile.mkdtemp())
rng = np.random.default_rng(0)
X = rng.random((300, 4)) * [1, 10, 100, 1000]
y = np.sin(X[:, 0] + X[:, 1] / 10) + 0.1 * rng.normal(size=300)
csv_path = workdir / "ridge.csv"
with open(csv_path, "w") as fh:
    fh.write("a,b,c,d,y\n")
    for row, t in zip(X, y):
        fh.write(",".join(repr(float(v)) for v in (*row, t)) + "\n")

raw = load_csv(csv_path, "y")
methods = [Method.parse(name, trees=10) for name in ("mean-baseline", "cart", "odt", "odrf")]
result = benchmark(raw, methods, repetitions=3, seed=0)
for name, value in result.means.items():
    print(f"{name:14s} mean {result.metric} {value:.3f}")

# %% [markdown]
# ## The same through the `odrf` command
#
# `fit` writes a JSON model document, `predict` applies it to any CSV holding
# the same feature columns.

# %%
model = workdir / "model.json"
main(["fit", "--data", str(csv_path), "--target", "y", "--trees", "10", "--out", str(model)])
main(["predict", "--model", str(model), "--data", str(csv_path), "--out", str(workdir / "pred.csv")])
print((workdir / "pred.csv").read_text().splitlines()[:4])

# %%
main(["benchmark", "--data", str(csv_path), "--target", "y", "--methods", "odt,cart",
      "--repetitions", "2", "--out", str(workdir / "bench.csv")])
print((workdir / "bench.csv").read_text())
