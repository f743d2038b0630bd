import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abdd.circuit import CircuitBuilder, eval_circuit
from abdd.sat import CNF, SAT, TIMEOUT, UNSAT, solve, solve_circuit, tseitin

from conftest import enumerate_cnf, random_circuit, truth_table


def random_3cnf(rng, n, ratio=4.26):
    clauses = []
    for _ in range(int(round(ratio * n))):
        vs = rng.choice(np.arange(1, n + 1), size=3, replace=False)
        signs = rng.choice([-1, 1], size=3)
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CNF(n, clauses)


def pigeonhole(holes):
    """holes+1 pigeons into ``holes`` holes; unsatisfiable."""
    var = lambda p, h: p * holes + h + 1
    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(holes + 1)]
    for h in range(holes):
        for p, q in itertools.combinations(range(holes + 1), 2):
            clauses.append((-var(p, h), -var(q, h)))
    return CNF((holes + 1) * holes, clauses)


class TestSolve:
    def test_empty_formula(self):
        res = solve(CNF(0, []))
        assert res.status == SAT

    def test_contradiction(self):
        assert solve(CNF(1, [(1,), (-1,)])).status == UNSAT

    def test_empty_clause(self):
        cnf = CNF(2, [(1, 2), ()])
        assert cnf.has_empty_clause
        assert solve(cnf).status == UNSAT

    def test_model_checks(self):
        cnf = CNF(3, [(1, 2), (-1, 3), (-3, -2)])
        res = solve(cnf)
        assert res.sat and cnf.satisfied_by(res.model)

    def test_pigeonhole(self):
        assert solve(pigeonhole(4)).status == UNSAT

    def test_timeout_distinct_from_unsat(self):
        res = solve(pigeonhole(8), timeout=0.0)
        assert res.status == TIMEOUT and res.model is None

    @pytest.mark.parametrize("seed", range(25))
    def test_random_3cnf_vs_enumeration(self, seed):
        r = np.random.default_rng(seed)
        cnf = random_3cnf(r, 20)
        res = solve(cnf)
        assert res.sat == enumerate_cnf(20, cnf.clauses)
        if res.sat:
            assert cnf.satisfied_by(res.model)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_small_random_cnf(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 9))
        clauses = [tuple(int(v) * int(s) for v, s in
                         zip(r.integers(1, n + 1, size=k), r.choice([-1, 1], size=k)))
                   for k in r.integers(1, 4, size=int(r.integers(0, 30)))]
        cnf = CNF(n, clauses)
        res = solve(cnf)
        assert res.sat == enumerate_cnf(n, cnf.clauses)


class TestDimacs:
    def test_roundtrip(self, rng):
        cnf = random_3cnf(rng, 10)
        again = CNF.from_dimacs(cnf.to_dimacs())
        assert again.num_vars == cnf.num_vars and again.clauses == cnf.clauses

    def test_comments_and_multiline(self):
        cnf = CNF.from_dimacs("c hello\np cnf 3 2\n1 -2\n0 3 0\n")
        assert cnf.clauses == [(1, -2), (3,)]

    @pytest.mark.parametrize("text", ["1 2 0\n", "p cnf 2 3\n1 0\n", "p cnf 1 1\n2 0\n"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            CNF.from_dimacs(text)


class TestTseitin:
    def test_constant_true(self):
        b = CircuitBuilder(["x0"])
        res, _ = solve_circuit(b.build(b.const(True)))
        assert res.sat

    def test_x_and_not_x(self):
        b = CircuitBuilder(["x0"], simplify=False)
        x = b.var("x0")
        res, assignment = solve_circuit(b.build(b.and_(x, b.not_(x))))
        assert res.status == UNSAT and assignment is None

    def test_variable_count(self, rng):
        C = random_circuit(rng, 5, 10)
        cnf, varmap = tseitin(C)
        assert varmap == {f"x{i}": i + 1 for i in range(5)}
        assert cnf.num_vars == 5 + sum(g.op != "var" for g in C.gates)

    @pytest.mark.parametrize("seed", range(30))
    def test_random_circuits_vs_enumeration(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 15))
        C = random_circuit(r, n, int(r.integers(1, 30)))
        res, assignment = solve_circuit(C)
        assert res.sat == bool(np.any(truth_table(C, n) > 0))
        if res.sat:
            assert eval_circuit(C, assignment) is True
