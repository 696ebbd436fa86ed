"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line that is repeated in the terminal summary.
"""

import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from datasets import ridge_data, twelve_points
from odrf.cli import main
from odrf.evaluation import (
    Method,
    SyntheticTarget,
    consistency_curve,
    l2_risk,
    make_target,
    mr,
    sample,
)
from odrf.forest import ForestConfig, fit_forest
from odrf.split import QRule, SplitConfig, best_threshold, gini_gain, impurity_gain, stump_gain
from odrf.tree import (
    GrowConfig,
    PruneConfig,
    check_tree_invariants,
    grow,
    prune,
    pruning_losses,
    truncate_to_leaves,
)

THETA5 = np.ones(5) / np.sqrt(5)
SINE_RIDGE = SyntheticTarget.ridge(THETA5, "sine", scale=4.0, noise_sigma=0.1)
N_VALUES = [250, 500, 1000, 2000, 4000]
SEEDS = range(5)


def record(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_gain_identities():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst_stump = worst_gini = 0.0
    nodes = 0
    for i in range(1200):
        n = int(rng.integers(2, 51))
        mask = rng.random(n) < rng.uniform(0.1, 0.9)
        mask[rng.integers(n)] = True
        mask[(np.flatnonzero(mask)[0] + 1) % n] = False
        if i % 2:
            y = rng.integers(0, 2, n).astype(float)
            worst_gini = max(worst_gini, abs(gini_gain(y, mask) - 2 * impurity_gain(y, mask)))
        else:
            y = rng.normal(size=n)
        worst_stump = max(worst_stump, abs(impurity_gain(y, mask) - stump_gain(y, mask)))
        nodes += 1
    elapsed = time.perf_counter() - start
    ok = worst_stump <= 1e-10 and worst_gini <= 1e-10 and elapsed < 5.0
    record(1, ok, f"{nodes} nodes, max|Δ-stump|={worst_stump:.1e}, max|Gini-2Δ|={worst_gini:.1e}, {elapsed:.2f}s")


def test_criterion_02_threshold_oracle():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    gain_err, s_mismatch, done = 0.0, 0, 0
    while done < 500:
        n = int(rng.integers(2, 201))
        z = np.round(rng.random(n), int(rng.integers(1, 4)))
        if np.ptp(z) == 0:
            continue
        binary = done % 2 == 1
        y = rng.integers(0, 2, n).astype(float) if binary else rng.normal(size=n)
        criterion = "gini" if binary else "variance"
        s, g = best_threshold(z, y, criterion)
        s_ref, g_ref = oracles.exhaustive_threshold(z, y, criterion)
        gain_err = max(gain_err, abs(g - g_ref))
        s_mismatch += s != s_ref
        done += 1
    elapsed = time.perf_counter() - start
    ok = gain_err <= 1e-10 and s_mismatch == 0 and elapsed < 10.0
    record(2, ok, f"{done} instances, max gain error {gain_err:.1e}, threshold mismatches {s_mismatch}, {elapsed:.2f}s")


def test_criterion_03_growth_fidelity():
    data = twelve_points()
    problems = []
    for t_n in (1, 2, 4, 6):
        tree = grow(data, config=GrowConfig(t_n=t_n), randomized=False)
        check_tree_invariants(tree)
        if tree.n_leaves != min(t_n, 12):
            problems.append(f"t_n={t_n}: {tree.n_leaves} leaves")
    tree = grow(data, config=GrowConfig(t_n=6), randomized=False)
    if [e.node for e in tree.trace] != [0, 1, 2, 3, 5]:
        problems.append(f"trace {[e.node for e in tree.trace]}")
    single = tree.nodes[4]
    if not (single.count == 1 and single.is_leaf and (4, 3) in tree.carried):
        problems.append("singleton not carried")
    last = tree.nodes[6]
    if not (last.is_leaf and last.born == 2 and last.count > 1):
        problems.append("last queued node was split")
    record(3, not problems, "; ".join(problems) or "leaves 1/2/4/6, singleton carried, node 6 left unsplit")


def _suite_trees():
    for seed in range(6):
        for task in ("regression", "classification"):
            data = ridge_data(int(60 + 40 * seed), p=1 + seed % 4, seed=seed, task=task)
            yield data, grow(data, config=GrowConfig(seed=seed), randomized=seed % 2 == 0)
    yield twelve_points(), grow(twelve_points(), config=GrowConfig(t_n=6), randomized=False)


def test_criterion_04_trace_and_pruning():
    worst, trees, full, prune_ok = 0.0, 0, 0, True
    for data, tree in _suite_trees():
        sse = tree.training_sse()
        for k, e in enumerate(tree.trace, start=1):
            gain = e.gain / 2 if tree.task == "classification" else e.gain
            expected = sse[k - 1] - tree.nodes[e.node].count * gain
            worst = max(worst, abs(sse[k] - expected) / sse[0])
        # bookkeeping equals the leaf SSE of the truncated tree
        for tau in {1, tree.n_leaves // 2 + 1, tree.n_leaves}:
            cut = truncate_to_leaves(tree, tau)
            leaf_of = cut.apply(data.features)
            ref = sum(oracles.sse(data.targets[leaf_of == leaf.id]) for leaf in cut.leaves)
            worst = max(worst, abs(ref - sse[tau - 1]) / sse[0])
        # alpha = 0: smallest tau reaching the full tree's loss; that is the full tree
        # unless the final splits left the loss unchanged
        losses = pruning_losses(tree)
        tau0 = prune(tree, PruneConfig(alpha=0.0)).n_leaves
        prune_ok &= tau0 == int(np.flatnonzero(losses == losses[-1])[0]) + 1
        full += tau0 == tree.n_leaves
        # largest possible loss reduction: Var(y) for squared loss, the root error rate for 0-1 loss
        if tree.task == "regression":
            alpha_root = float(np.var(data.targets))
        else:
            alpha_root = tree.training_errors()[0] / tree.n_train
        prune_ok &= prune(tree, PruneConfig(alpha=alpha_root)).n_leaves == 1
        trees += 1
    ok = worst <= 1e-8 and prune_ok
    record(4, ok, f"{trees} trees, max relative SSE bookkeeping error {worst:.1e}, pruning extremes ok={prune_ok} "
                  f"(alpha=0 kept every leaf in {full}/{trees})")


def test_criterion_05_consistency_trend():
    report = consistency_curve(SINE_RIDGE, N_VALUES, Method.parse("odt"), repetitions=5, n_mc=20000, seed=0)
    med = report.summary
    steps = med[1:] / med[:-1] - 1.0
    inversions = steps[steps > 0]
    trend = len(inversions) == 0 or (len(inversions) == 1 and inversions[0] <= 0.05)
    ok = trend and med[-1] < 0.5 * med[0]
    record(5, ok, "median risks " + ", ".join(f"{n}:{v:.4g}" for n, v in zip(N_VALUES, med)))


def test_criterion_06_odt_beats_axis_aligned():
    wins, pairs = 0, []
    for s in SEEDS:
        train, test = sample(SINE_RIDGE, 1000, [s, 0]), sample(SINE_RIDGE, 5000, [s, 1])
        odt = Method.parse("odt").fit(train, s)
        axis = Method("axis", "odt", q_rule=QRule("fixed", 1), split=SplitConfig(include_cart_candidate=True))
        cart = axis.fit(train, s)
        e_odt = np.mean((odt.predict(test.features) - test.targets) ** 2)
        e_cart = np.mean((cart.predict(test.features) - test.targets) ** 2)
        wins += e_odt < e_cart
        pairs.append(f"{e_odt:.4f}/{e_cart:.4f}")
    record(6, wins >= 4, f"ODT wins {wins}/5 (ODT/axis test MSE {', '.join(pairs)})")


def test_criterion_07_forest_jensen_bound():
    gaps = []
    for s in SEEDS:
        train, test = sample(SINE_RIDGE, 1000, [s, 0]), sample(SINE_RIDGE, 2000, [s, 1])
        config = ForestConfig(B=20, grow=GrowConfig(split=SplitConfig(q_rule=QRule("theory"))), seed=s)
        forest = fit_forest(train, config=config)
        per_tree = ((forest.tree_predictions(test.features) - test.targets) ** 2).mean(axis=1)
        mse = np.mean((forest.predict(test.features) - test.targets) ** 2)
        gaps.append(per_tree.mean() - mse)
    ok = all(g >= -1e-10 for g in gaps)
    record(7, ok, "mean tree MSE minus forest MSE per seed: " + ", ".join(f"{g:.4f}" for g in gaps))


def test_criterion_08_fixed_q_forest_on_additive_model():
    target = make_target("extended_additive", p=6, n_components=3, q=2, bases=("sine",), scale=4.0,
                         noise_sigma=0.1, direction="equal", seed=0)
    method = Method.parse("odrf-q2", trees=20)
    report = consistency_curve(target, [250, 2000], method, repetitions=5, n_mc=20000, seed=0)
    lo, hi = report.summary
    record(8, hi < 0.6 * lo, f"median risk n=250 {lo:.4g}, n=2000 {hi:.4g} (bound {0.6 * lo:.4g}), B=20")


def test_criterion_09_pruned_tree():
    n = 2000
    pruned_risk, full_risk, taus, budgets = [], [], [], []
    for s in SEEDS:
        data = sample(SINE_RIDGE, n, [0, n, s, 0])
        tree = grow(data, config=GrowConfig(), randomized=False)
        alpha = n ** -0.5 * float(np.var(data.targets))
        cut = prune(tree, PruneConfig(alpha=alpha))
        mc_seed = [0, n, s, 2]
        full_risk.append(l2_risk(tree, SINE_RIDGE, 20000, mc_seed))
        pruned_risk.append(l2_risk(cut, SINE_RIDGE, 20000, mc_seed))
        taus.append(cut.n_leaves)
        budgets.append(tree.t_n)
    ratio = np.median(pruned_risk) / np.median(full_risk)
    engages = all(t < b for t, b in zip(taus, budgets))
    ok = ratio <= 1.2 and engages
    record(9, ok, f"median pruned/unpruned risk {np.median(pruned_risk):.4g}/{np.median(full_risk):.4g} "
                  f"= {ratio:.2f} (bound 1.2); tau* {taus} of t_n {budgets[0]}")


def test_criterion_10_classification_near_bayes():
    target = SyntheticTarget.ridge(THETA5, "sine", scale=4.0, amplitude=0.4, intercept=0.5)
    gaps = []
    for s in range(3):
        train = sample(target, 2000, [s, 0], "classification")
        test = sample(target, 20000, [s, 1], "classification")
        eta = target(test.features)
        bayes = float(np.mean(np.minimum(eta, 1.0 - eta)))
        forest = Method.parse("odrf", trees=20).fit(train, s)
        gaps.append(mr(forest.predict(test.features), test.targets) - bayes)
    ok = all(abs(g) <= 0.05 for g in gaps)
    record(10, ok, "forest vote MR minus Bayes rate per seed: " + ", ".join(f"{g:+.4f}" for g in gaps))


@pytest.fixture
def ridge_csv(tmp_path):
    data = sample(SINE_RIDGE, 200, 5)
    path = tmp_path / "ridge.csv"
    lines = ["x0,x1,x2,x3,x4,y"]
    lines += [",".join(repr(float(v)) for v in (*row, t)) for row, t in zip(data.features, data.targets)]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_criterion_11_determinism(ridge_csv, tmp_path, capsys):
    commands = {
        "fit.json": ["fit", "--data", ridge_csv, "--target", "y", "--trees", "6", "--seed", "3"],
        "fit_pruned.json": ["fit", "--data", ridge_csv, "--target", "y", "--mode", "odt", "--prune",
                            "--q-rule", "theory"],
        "bench.csv": ["benchmark", "--data", ridge_csv, "--target", "y", "--methods", "odt,cart,odrf",
                      "--trees", "4", "--repetitions", "2", "--seed", "1"],
        "cons.csv": ["consistency", "--n", "60,120", "--reps", "2", "--n-mc", "1000", "--method", "odrf",
                     "--trees", "4"],
    }
    outputs = {}
    for threads in ("1", "1", "3"):
        for name, argv in commands.items():
            out = tmp_path / f"{threads}-{name}"
            assert main(argv + ["--threads", threads, "--out", str(out)]) == 0
            outputs.setdefault(name, []).append(out.read_bytes())
    for threads in ("1", "3"):
        pred = tmp_path / f"pred-{threads}.csv"
        main(["predict", "--model", str(tmp_path / f"{threads}-fit.json"), "--data", ridge_csv, "--out", str(pred)])
        outputs.setdefault("pred.csv", []).append(pred.read_bytes())
    differing = [name for name, blobs in outputs.items() if len(set(blobs)) != 1]
    record(11, not differing, f"{len(outputs)} outputs compared over runs with 1, 1 and 3 threads; "
                              f"differing: {differing or 'none'}")
