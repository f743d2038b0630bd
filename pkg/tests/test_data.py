import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abdd.data import (Hypothesis, LabeledSample, balance, balanced_distribution,
                       conditional_entropy_given_hypothesis, edge, entropy, format_sample_text,
                       frontier_entropy, load_sample, parse_sample_text, pseudo_entropy,
                       sample_from_json, sample_to_json, training_error, uniform)
from abdd.diagram import Diagram
from abdd.errors import PureNode

from conftest import all_points


def sample_of(fn, n):
    X = all_points(n)
    return LabeledSample(X, np.array([fn(x) for x in X]))


class TestPseudoEntropy:
    @pytest.mark.parametrize("q,expected", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0), (0.2, 0.8)])
    def test_values(self, q, expected):
        assert pseudo_entropy(q) == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            pseudo_entropy(1.5)
        with pytest.raises(ValueError):
            pseudo_entropy(-0.1)

    def test_dominates_min(self):
        q = np.linspace(0, 1, 100_001)
        assert np.all(np.minimum(q, 1 - q) <= pseudo_entropy(q) + 1e-15)

    def test_symmetric_and_concave(self):
        q = np.linspace(0, 1, 1001)
        g = pseudo_entropy(q)
        np.testing.assert_allclose(g, g[::-1], atol=1e-15)
        assert np.all(np.diff(g, 2) <= 1e-12)


class TestEdge:
    def setup_method(self):
        self.S = sample_of(lambda x: x[0], 2)

    def test_perfect_hypothesis(self, rng):
        d = rng.dirichlet(np.ones(self.S.m))
        assert edge(d, self.S, Hypothesis.projection(0)) == pytest.approx(1.0)
        assert edge(d, self.S, Hypothesis.negated(0)) == pytest.approx(-1.0)

    def test_balanced_cancellation(self):
        assert edge(uniform(4), self.S, Hypothesis.constant(1)) == pytest.approx(0.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            edge(uniform(3), self.S, Hypothesis.projection(0))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 1), st.integers(0, 2**32 - 1))
    def test_linear_in_distribution(self, alpha, seed):
        r = np.random.default_rng(seed)
        S = LabeledSample(all_points(3), r.choice([-1, 1], size=8))
        d1, d2 = r.dirichlet(np.ones(8)), r.dirichlet(np.ones(8))
        h = Hypothesis.projection(int(r.integers(3)))
        lhs = edge(alpha * d1 + (1 - alpha) * d2, S, h)
        assert lhs == pytest.approx(alpha * edge(d1, S, h) + (1 - alpha) * edge(d2, S, h), abs=1e-12)


class TestBalancedDistribution:
    def test_three_to_one(self):
        S = LabeledSample(np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]), np.array([1, 1, 1, -1]))
        d = balanced_distribution([0, 1, 2, 3], S)
        np.testing.assert_allclose(d, [1 / 6, 1 / 6, 1 / 6, 1 / 2])

    def test_one_each_and_outside_zero(self):
        S = LabeledSample(np.array([[1, 1], [1, -1], [-1, 1]]), np.array([1, -1, 1]))
        d = balanced_distribution([0, 1], S)
        np.testing.assert_allclose(d, [0.5, 0.5, 0.0])
        assert edge(d, S, Hypothesis.constant(1)) == pytest.approx(0.0)

    def test_pure_node(self):
        S = LabeledSample(np.array([[1], [-1]]), np.array([1, -1]))
        with pytest.raises(PureNode):
            balanced_distribution([0], S)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_class_mass_half(self, seed):
        r = np.random.default_rng(seed)
        y = r.choice([-1, 1], size=16)
        y[:2] = [1, -1]
        d = balance(r.dirichlet(np.ones(16)), y)
        assert d[y == 1].sum() == pytest.approx(0.5, abs=1e-12)
        assert d.sum() == pytest.approx(1.0, abs=1e-12)


class TestConditionalEntropy:
    def test_perfect_split(self):
        S = sample_of(lambda x: x[0], 2)
        assert conditional_entropy_given_hypothesis(uniform(4), S, Hypothesis.projection(0)) == 0.0

    def test_independent(self):
        S = sample_of(lambda x: x[0], 2)
        h = Hypothesis.projection(1)
        assert conditional_entropy_given_hypothesis(uniform(4), S, h) == pytest.approx(1.0)

    def test_half(self):
        # f = AND-like: positive only at (+1,+1); h = x1 gives q+ = 1/2, q- = 0
        S = sample_of(lambda x: 1 if x[0] > 0 and x[1] > 0 else -1, 2)
        val = conditional_entropy_given_hypothesis(uniform(4), S, Hypothesis.projection(0))
        assert val == pytest.approx(0.5)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_takimoto_bound(self, seed):
        r = np.random.default_rng(seed)
        n = 4
        X = all_points(n)
        y = r.choice([-1, 1], size=X.shape[0])
        y[:2] = [1, -1]
        S = LabeledSample(X, y)
        d = r.dirichlet(np.ones(S.m) * 0.5)
        d = np.clip(d, 1e-12, None)
        d /= d.sum()
        d_bar = balance(d, y)
        for h in [Hypothesis.projection(i) for i in range(n)] + [Hypothesis.negated(i) for i in range(n)]:
            gamma = edge(d_bar, S, h)
            bound = (1 - gamma ** 2 / 2) * entropy(d, S)
            assert conditional_entropy_given_hypothesis(d, S, h) <= bound + 1e-12


class TestFrontierEntropy:
    def test_root_only(self):
        S = sample_of(lambda x: x[0], 2)
        assert frontier_entropy(Diagram.open_root(2), S) == pytest.approx(1.0)

    def test_two_nodes(self):
        # 10 points; x1 splits them 5/5 with positive fractions 0.2 and 0.8
        X = np.array([[1, i % 2 * 2 - 1, (i // 2) % 2 * 2 - 1, (i // 4) % 2 * 2 - 1] for i in range(5)] +
                     [[-1, i % 2 * 2 - 1, (i // 2) % 2 * 2 - 1, (i // 4) % 2 * 2 - 1] for i in range(5)])
        y = np.array([1, -1, -1, -1, -1, 1, 1, 1, 1, -1])
        S = LabeledSample(X, y)
        T = Diagram.open_root(4)
        T.expand(T.root, Hypothesis.projection(0))
        assert frontier_entropy(T, S) == pytest.approx(0.8)

    def test_absorbed(self):
        S = sample_of(lambda x: x[0], 2)
        T = Diagram(2)
        T.root = T.add_node(Hypothesis.projection(0), 0, 1)
        assert frontier_entropy(T, S) == 0.0
        assert training_error(T, S) == 0.0


class TestSampleIO:
    def test_text_roundtrip(self, tmp_path):
        text = "# comment\n++- +1\n--- -1  # trailing\n\n+-+ -1\n"
        S = parse_sample_text(text)
        assert S.m == 3 and S.n == 3
        assert S.y.tolist() == [1, -1, -1]
        p = tmp_path / "s.txt"
        p.write_text(format_sample_text(S))
        S2 = load_sample(p)
        np.testing.assert_array_equal(S.X, S2.X)

    def test_json_roundtrip(self, tmp_path):
        S = sample_of(lambda x: x[1], 3)
        obj = sample_to_json(S)
        S2 = sample_from_json(obj)
        np.testing.assert_array_equal(S2.y, S.y)
        p = tmp_path / "s.json"
        p.write_text(json.dumps(obj))
        assert load_sample(p).m == 8

    def test_inconsistent_duplicate(self):
        with pytest.raises(ValueError):
            LabeledSample.from_items([([1, 1], 1), ([1, 1], -1)])

    def test_bad_values(self):
        with pytest.raises(ValueError):
            LabeledSample(np.array([[0, 1]]), np.array([1]))
        with pytest.raises(ValueError):
            parse_sample_text("+x+ +1\n")
