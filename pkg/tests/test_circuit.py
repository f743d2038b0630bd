import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abdd.boosting import BoostConfig, boost
from abdd.circuit import (Circuit, CircuitBuilder, Gate, compose_network, conjoin,
                          dd_to_circuit, eval_circuit, eval_pm, gate_count, hamming_circuit,
                          negate, simplify)
from abdd.compare import random_ltf
from abdd.data import Hypothesis
from abdd.diagram import ONE, ZERO, Diagram
from abdd.errors import StructuralError
from abdd.ltf import ThresholdFunction, full_sample, lifted_hypotheses

from conftest import all_points, random_circuit, truth_table


def chain(k, negated=False):
    """x1 AND ... AND xk as a k-node chain."""
    T = Diagram(k)
    nxt = ONE
    for i in reversed(range(k)):
        h = Hypothesis.negated(i) if negated else Hypothesis.projection(i)
        nxt = T.add_node(h, ZERO, nxt, i)
    T.root = nxt
    return T


def exact_dd(f):
    S = full_sample(f)
    T, _ = boost(S, BoostConfig(2.0 ** -f.n, lifted_hypotheses(f.n)))
    return T


def const_circuit(value):
    b = CircuitBuilder(["x0"])
    return b.build(b.const(value))


class TestDDToCircuit:
    def test_leaf_only(self):
        C = dd_to_circuit(Diagram.constant(2, 1))
        assert C.gates[C.output] == Gate("const", (True,))
        assert gate_count(C) == 0

    def test_single_node_four_gates(self):
        T = chain(1)
        C = dd_to_circuit(T, raw=True)
        assert gate_count(C) == 4
        np.testing.assert_array_equal(eval_pm(C, all_points(1)), [-1, 1])
        # folding reduces the same node to the bare variable
        assert gate_count(dd_to_circuit(T)) == 0

    @pytest.mark.parametrize("k", [1, 2, 5, 9])
    def test_chain_count(self, k):
        T = chain(k)
        C = dd_to_circuit(T, raw=True)
        assert gate_count(C) == 4 * k
        expected = np.where(np.all(all_points(k) > 0, axis=1), 1, -1)
        np.testing.assert_array_equal(eval_pm(C, all_points(k)), expected)

    def test_negated_labels(self):
        T = chain(3, negated=True)
        X = all_points(3)
        for raw in (True, False):
            np.testing.assert_array_equal(eval_pm(dd_to_circuit(T, raw=raw), X),
                                          T.evaluate_many(X))

    def test_maj3(self):
        T = exact_dd(ThresholdFunction((1.0, 1.0, 1.0)))
        X = all_points(3)
        np.testing.assert_array_equal(eval_pm(dd_to_circuit(T), X), np.sign(X.sum(axis=1)))

    @pytest.mark.parametrize("seed", range(10))
    def test_random_ltf_diagrams(self, seed):
        f = random_ltf(np.random.default_rng(seed), 8)
        T = exact_dd(f)
        X = all_points(8)
        raw, folded = dd_to_circuit(T, raw=True), dd_to_circuit(T)
        np.testing.assert_array_equal(eval_pm(raw, X), T.evaluate_many(X))
        np.testing.assert_array_equal(eval_pm(folded, X), T.evaluate_many(X))
        negated = sum(nd.label.kind == "neg" for nd in T.nodes.values())
        assert gate_count(folded) <= gate_count(raw) == 4 * T.size + negated

    def test_names(self):
        C = dd_to_circuit(chain(2), names=["a", "b"])
        assert C.inputs == ("a", "b")
        with pytest.raises(ValueError):
            dd_to_circuit(chain(2), names=["a"])


class TestEvaluation:
    def test_constant(self):
        assert eval_circuit(const_circuit(True), {"x0": False}) is True

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_against_python_walk(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 7))
        C = random_circuit(r, n, int(r.integers(1, 25)))
        np.testing.assert_array_equal(eval_pm(C, all_points(n)), truth_table(C, n))
        np.testing.assert_array_equal(eval_pm(simplify(C), all_points(n)), truth_table(C, n))
        assert gate_count(simplify(C)) <= gate_count(C)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_negate_and_conjoin(self, seed):
        r = np.random.default_rng(seed)
        A, B = random_circuit(r, 3, 8), random_circuit(r, 3, 8)
        X = all_points(3)
        np.testing.assert_array_equal(eval_pm(negate(A), X), -truth_table(A, 3))
        both = np.where((truth_table(A, 3) > 0) & (truth_table(B, 3) > 0), 1, -1)
        np.testing.assert_array_equal(eval_pm(conjoin(A, B), X), both)

    def test_conjoin_merges_inputs(self):
        b = CircuitBuilder(["a"])
        A = b.build(b.var("a"))
        b = CircuitBuilder(["c"])
        B = b.build(b.var("c"))
        C = conjoin(A, B)
        assert set(C.inputs) == {"a", "c"}
        assert eval_circuit(C, {"a": True, "c": True}) is True
        assert eval_circuit(C, {"a": True, "c": False}) is False

    def test_complement_folding(self):
        b = CircuitBuilder(["a"])
        a = b.var("a")
        assert b.and_(a, b.not_(a)) == b.const(False)
        assert b.or_(a, b.not_(a)) == b.const(True)
        assert b.not_(b.not_(a)) == a


class TestHamming:
    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_model_count(self, n, rng):
        x = rng.choice([-1, 1], size=n)
        X = all_points(n)
        dist = np.sum(X != x, axis=1)
        for k in range(n + 1):
            got = eval_pm(hamming_circuit(x, k), X)
            np.testing.assert_array_equal(got > 0, dist <= k)
            assert int((got > 0).sum()) == sum(comb(n, j) for j in range(k + 1))

    def test_small_ball(self):
        got = eval_pm(hamming_circuit([1, 1], 1), all_points(2))
        assert got.tolist() == [-1, 1, 1, 1]

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            hamming_circuit([1, 1], 3)


class TestCompose:
    def test_identity(self):
        T = chain(2)
        C = dd_to_circuit(T)
        net = compose_network([{"o": C}])
        X = all_points(2)
        np.testing.assert_array_equal(eval_pm(net, X), T.evaluate_many(X))

    def test_projection_layer(self):
        A = dd_to_circuit(exact_dd(ThresholdFunction((1.0, -2.0, 1.0), 0.5)))
        B = dd_to_circuit(exact_dd(ThresholdFunction((1.0, 1.0, 1.0))))
        b = CircuitBuilder(["h0", "h1"])
        proj = b.build(b.var("h0"))
        net = compose_network([{"h0": A, "h1": B}, {"o": proj}])
        X = all_points(3)
        np.testing.assert_array_equal(eval_pm(net, X), eval_pm(A, X))

    def test_random_two_layer(self, rng):
        n = 8
        hidden = [random_ltf(rng, n) for _ in range(3)]
        top = random_ltf(rng, 3)
        layer1 = {f"h{j}": dd_to_circuit(exact_dd(f)) for j, f in enumerate(hidden)}
        layer2 = {"o": dd_to_circuit(exact_dd(top), names=["h0", "h1", "h2"])}
        net = compose_network([layer1, layer2])
        X = all_points(n)
        H = np.stack([f.evaluate_many(X) for f in hidden], axis=1)
        np.testing.assert_array_equal(eval_pm(net, X), top.evaluate_many(H))

    def test_associative(self, rng):
        # (L1 ; L2) ; L3 == L1 ; (L2 ; L3) as functions
        n = 4
        f1 = {f"a{j}": dd_to_circuit(exact_dd(random_ltf(rng, n))) for j in range(2)}
        f2 = {f"b{j}": dd_to_circuit(exact_dd(random_ltf(rng, 2)), names=["a0", "a1"])
              for j in range(2)}
        f3 = {"o": dd_to_circuit(exact_dd(random_ltf(rng, 2)), names=["b0", "b1"])}
        left = compose_network([{k: compose_network([f1, {k: v}]) for k, v in f2.items()}, f3])
        right = compose_network([f1, {"o": compose_network([f2, f3], inputs=["a0", "a1"])}])
        X = all_points(n)
        np.testing.assert_array_equal(eval_pm(left, X), eval_pm(right, X))

    def test_errors(self):
        with pytest.raises(ValueError):
            compose_network([])
        C = dd_to_circuit(chain(2))
        with pytest.raises(StructuralError):
            compose_network([{"a": C, "b": C}])
        b = CircuitBuilder(["zz"])
        with pytest.raises(StructuralError):
            compose_network([{"a": C}, {"o": b.build(b.var("zz"))}])


class TestSerialization:
    def test_roundtrip(self, rng):
        C = random_circuit(rng, 4, 12)
        C2 = Circuit.from_json(json.loads(C.dumps()))
        assert C2 == C

    def test_rejects_malformed(self):
        with pytest.raises(StructuralError):
            Circuit(("a",), (Gate("var", ("b",)),), 0)
        with pytest.raises(StructuralError):
            Circuit(("a",), (Gate("var", ("a",)), Gate("and", (0, 1))), 1)
        with pytest.raises(StructuralError):
            Circuit(("a",), (Gate("xor", (0,)),), 0)
