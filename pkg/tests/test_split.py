import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from odrf.data import Dataset
from odrf.errors import BadSpec, EmptySide, NonBinary, NoValidSplit
from odrf.split import (
    NodeData,
    QRule,
    SplitConfig,
    SplitPlane,
    best_threshold,
    draw_subset,
    fit_direction,
    gini_gain,
    impurity_gain,
    propose_and_select,
    q_upper,
    scan_columns,
    stump_gain,
)


@st.composite
def node_and_mask(draw, binary=False):
    n = draw(st.integers(2, 50))
    if binary:
        y = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    else:
        y = draw(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=n, max_size=n))
    mask = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    k = draw(st.integers(0, n - 1))
    mask[k] = True
    mask[(k + 1) % n] = False
    return np.array(y, dtype=float), np.array(mask)


class TestGains:
    def test_hand_example(self):
        y = np.array([0.0, 0.0, 1.0, 1.0])
        mask = np.array([True, True, False, False])
        assert impurity_gain(y, mask) == pytest.approx(0.25)
        assert stump_gain(y, mask) == pytest.approx(0.25)
        assert gini_gain(y, mask) == pytest.approx(0.5)

    @settings(max_examples=300, deadline=None)
    @given(node_and_mask())
    def test_stump_identity(self, case):
        y, mask = case
        scale = max(1.0, float(np.var(y)))
        assert abs(impurity_gain(y, mask) - stump_gain(y, mask)) <= 1e-10 * scale
        assert abs(impurity_gain(y, mask) - oracles.variance_gain(y, mask)) <= 1e-10 * scale

    @settings(max_examples=300, deadline=None)
    @given(node_and_mask(binary=True))
    def test_gini_is_twice_variance_gain(self, case):
        y, mask = case
        np.testing.assert_allclose(gini_gain(y, mask), 2 * impurity_gain(y, mask), atol=1e-12)
        np.testing.assert_allclose(gini_gain(y, mask), oracles.gini_gain(y, mask), atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(node_and_mask())
    def test_gain_nonnegative_and_bounded(self, case):
        y, mask = case
        g = impurity_gain(y, mask)
        assert 0.0 <= g <= np.var(y) * (1 + 1e-9) + 1e-12

    def test_empty_side(self):
        with pytest.raises(EmptySide):
            impurity_gain([1.0, 2.0], [True, True])

    def test_non_binary(self):
        with pytest.raises(NonBinary):
            gini_gain([0.0, 2.0], [True, False])


class TestThreshold:
    def test_matches_exhaustive_on_random_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            n = int(rng.integers(2, 120))
            z = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
            if np.ptp(z) == 0:
                continue
            binary = rng.random() < 0.5
            y = rng.integers(0, 2, n).astype(float) if binary else rng.normal(size=n)
            criterion = "gini" if binary else "variance"
            s, g = best_threshold(z, y, criterion)
            s_ref, g_ref = oracles.exhaustive_threshold(z, y, criterion)
            assert abs(g - g_ref) <= 1e-10
            assert s == s_ref

    def test_tie_takes_smallest_threshold(self):
        z = np.array([0.0, 1.0, 2.0, 3.0])
        y = np.array([0.0, 5.0, 5.0, 0.0])  # cuts at 0.5 and 2.5 give the same gain
        s, _ = best_threshold(z, y)
        assert s == 0.5

    def test_constant_target_splits_at_first_gap(self):
        s, g = best_threshold([3.0, 1.0, 2.0], [4.0, 4.0, 4.0])
        assert (s, g) == (1.5, 0.0)

    def test_constant_projection(self):
        with pytest.raises(NoValidSplit):
            best_threshold([1.0, 1.0], [0.0, 1.0])

    def test_threshold_separates_the_two_sides(self):
        z = np.array([0.1, 0.1, 0.4, 0.4, 0.9])
        y = np.array([0.0, 0.0, 1.0, 1.0, 1.0])
        s, g = best_threshold(z, y)
        assert 0.1 < s < 0.4
        np.testing.assert_allclose(g, impurity_gain(y, z <= s))

    def test_scan_columns_agrees_columnwise(self):
        rng = np.random.default_rng(3)
        Z = rng.random((40, 6))
        Z[:, 2] = 0.5
        y = rng.normal(size=40)
        s, g, n_left = scan_columns(Z, y)
        assert g[2] == -np.inf
        for j in (0, 1, 3, 4, 5):
            sj, gj = best_threshold(Z[:, j], y)
            assert (s[j], g[j]) == (sj, gj)
            assert n_left[j] == (Z[:, j] <= s[j]).sum()


class TestSplitPlane:
    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            SplitPlane((0, 1), [1.0, 1.0], 0.0)

    def test_rejects_unsorted_subset(self):
        with pytest.raises(ValueError):
            SplitPlane((1, 0), [0.6, 0.8], 0.0)

    def test_goes_left_is_inclusive(self):
        plane = SplitPlane((0, 2), [0.6, 0.8], 0.7)
        X = np.array([[0.5, 9.0, 0.5], [1.0, 0.0, 0.5]])
        np.testing.assert_array_equal(plane.goes_left(X), [True, False])

    def test_flip_mirrors_membership_off_the_plane(self):
        plane = SplitPlane((0, 1), [0.6, 0.8], 0.5)
        X = np.random.default_rng(0).random((50, 2))
        np.testing.assert_array_equal(plane.goes_left(X), ~plane.flipped().goes_left(X))

    def test_projection_independent_of_batch(self):
        plane = SplitPlane((0, 1, 2), np.ones(3) / np.sqrt(3), 0.0)
        X = np.random.default_rng(1).random((64, 3))
        whole = plane.project(X)
        single = np.array([plane.project(x)[0] for x in X])
        assert whole.tobytes() == single.tobytes()


class TestFitDirection:
    def test_linear_target_recovers_direction(self):
        rng = np.random.default_rng(0)
        X = rng.random((200, 3))
        theta = np.array([2.0, -1.0, 2.0]) / 3.0
        y = X @ theta
        np.testing.assert_allclose(fit_direction(X, y, lam=0.0), theta, atol=1e-9)

    def test_ridge_closed_form(self):
        rng = np.random.default_rng(1)
        X = rng.random((30, 4))
        y = rng.normal(size=30)
        lam = 0.3
        Xc, yc = X - X.mean(0), y - y.mean()
        ref = np.linalg.solve(Xc.T @ Xc + lam * np.eye(4), Xc.T @ yc)
        np.testing.assert_allclose(fit_direction(X, y, lam=lam), ref / np.linalg.norm(ref), atol=1e-12)

    def test_classification_points_toward_ones(self):
        rng = np.random.default_rng(2)
        X = rng.random((400, 2))
        y = (X[:, 0] + X[:, 1] > 1.0).astype(float)
        theta = fit_direction(X, y, "classification")
        np.testing.assert_allclose(theta, np.ones(2) / np.sqrt(2), atol=0.05)

    def test_unit_norm_and_fallback(self):
        X = np.random.default_rng(3).random((10, 3))
        theta = fit_direction(X, np.ones(10))
        assert np.count_nonzero(theta) == 1 and np.linalg.norm(theta) == 1.0
        np.testing.assert_array_equal(fit_direction(X[:, :1], np.arange(10.0)), [1.0])


class TestSubsets:
    def test_q_upper(self):
        assert q_upper(10, QRule("practical"), 16) == 4
        assert q_upper(3, QRule("practical"), 100) == 3
        assert q_upper(7, QRule("theory")) == 7
        assert q_upper(7, QRule("fixed", 2)) == 2

    @pytest.mark.parametrize("rule, upper", [("theory", 4), ("practical", 3)])
    def test_draws_are_valid(self, rule, upper):
        rng = np.random.default_rng(0)
        for _ in range(200):
            q, subset = draw_subset(4, QRule(rule), rng, n=9)
            assert 1 <= q <= upper and len(subset) == q
            assert list(subset) == sorted(set(subset.tolist()))

    def test_fixed_exceeding_p(self):
        with pytest.raises(BadSpec):
            draw_subset(2, QRule("fixed", 3), np.random.default_rng(0))

    def test_parse_round_trip(self):
        for text in ("practical", "theory", "fixed:3", "axis_aligned"):
            assert str(QRule.parse(text)) == text
        with pytest.raises(BadSpec):
            QRule.parse("fixed:x")


class TestProposeAndSelect:
    def _dataset(self, n=60, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.random((n, 3))
        return Dataset(X, np.sin(4 * X.sum(axis=1) / np.sqrt(3)))

    def test_unsplittable_nodes(self):
        data = self._dataset()
        rng = np.random.default_rng(0)
        assert propose_and_select(NodeData.from_indices(data.targets, [4]), data, SplitConfig(), rng) is None
        X = np.full((3, 2), 0.5)
        same = Dataset(X, np.array([0.0, 1.0, 2.0]))
        assert propose_and_select(NodeData.from_indices(same.targets, [0, 1, 2]), same, SplitConfig(), rng) is None

    def test_choice_is_best_candidate_and_counts_add_up(self):
        data = self._dataset()
        node = NodeData.from_indices(data.targets, np.arange(data.n))
        cand = propose_and_select(node, data, SplitConfig(), np.random.default_rng(5))
        left = cand.plane.goes_left(data.features)
        assert cand.left_count == left.sum() and cand.left_count + cand.right_count == data.n
        np.testing.assert_allclose(cand.gain, impurity_gain(data.targets, left), atol=1e-12)
        # the exhaustive axis candidates are always in the pool
        for j in range(3):
            assert cand.gain >= best_threshold(data.features[:, j], data.targets)[1] - 1e-12

    def test_axis_aligned_rule(self):
        data = self._dataset()
        node = NodeData.from_indices(data.targets, np.arange(data.n))
        cand = propose_and_select(node, data, SplitConfig(q_rule=QRule("axis_aligned")), np.random.default_rng(0))
        assert cand.plane.q == 1

    def test_min_gain_blocks_split(self):
        data = self._dataset()
        node = NodeData.from_indices(data.targets, np.arange(data.n))
        config = SplitConfig(min_gain=10.0)
        assert propose_and_select(node, data, config, np.random.default_rng(0)) is None
