"""Independent oracles shared by the test modules.

Nothing here calls into the code paths these oracles check.
"""
import itertools

import numpy as np
import pytest


def all_points(n):
    return np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.int8)


def brute_radius(labels_fn, x):
    """min Hamming distance from ``x`` to a point with a different label."""
    x = np.asarray(x)
    n = x.size
    fx = labels_fn(x)
    best = None
    for p in all_points(n):
        if labels_fn(p) != fx:
            d = int(np.sum(p != x))
            best = d if best is None else min(best, d)
    return best


def brute_radii_table(labels):
    """Pairwise popcount distances on a full labeled cube (itertools order)."""
    labels = np.asarray(labels)
    n = int(np.log2(labels.size))
    idx = np.arange(labels.size)
    xor = idx[:, None] ^ idx[None, :]
    dist = np.zeros_like(xor)
    for b in range(n):
        dist += (xor >> b) & 1
    dist = np.where(labels[:, None] != labels[None, :], dist, n + 1)
    return dist.min(axis=1)


def dual_margin_by_vertices(y, HX):
    """Minimum of max_i sum_x d_x y_x h_i(x) over class-balanced d, by vertex enumeration.

    Variables ``(d_1..d_M, gamma)``; a vertex makes ``M + 1`` linearly
    independent constraints tight, two of which are the class-mass equalities.
    """
    M = len(y)
    K = HX.shape[1]
    eq = np.zeros((2, M + 1))
    eq[0, :M] = (y == 1)
    eq[1, :M] = (y == -1)
    eq_rhs = np.array([0.5, 0.5])
    ineq = []                      # rows r with r . z <= rhs
    for i in range(M):
        row = np.zeros(M + 1)
        row[i] = -1.0
        ineq.append((row, 0.0))
    for k in range(K):
        row = np.zeros(M + 1)
        row[:M] = y * HX[:, k]
        row[M] = -1.0
        ineq.append((row, 0.0))
    best = np.inf
    for active in itertools.combinations(range(len(ineq)), M - 1):
        A = np.vstack([eq] + [ineq[a][0] for a in active])
        rhs = np.concatenate([eq_rhs, [ineq[a][1] for a in active]])
        if abs(np.linalg.det(A)) < 1e-10:
            continue
        z = np.linalg.solve(A, rhs)
        if all(r @ z <= b + 1e-9 for r, b in ineq):
            best = min(best, z[M])
    return best


def enumerate_cnf(num_vars, clauses):
    """Satisfiability by scanning every assignment (bit v-1 is variable v)."""
    total = 1 << num_vars
    chunk = 1 << min(num_vars, 16)
    for start in range(0, total, chunk):
        a = np.arange(start, min(total, start + chunk), dtype=np.int64)
        alive = np.ones(a.size, dtype=bool)
        for c in clauses:
            sat = np.zeros(a.size, dtype=bool)
            for lit in c:
                bit = ((a >> (abs(lit) - 1)) & 1).astype(bool)
                sat |= bit if lit > 0 else ~bit
            alive &= sat
            if not alive.any():
                break
        if alive.any():
            return True
    return False


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def random_circuit(rng, n, size):
    """A random AND/OR/NOT circuit over ``x0..x{n-1}`` built without simplification."""
    from abdd.circuit import CircuitBuilder, default_names

    names = default_names(n)
    b = CircuitBuilder(names, simplify=False)
    pool = [b.var(v) for v in names]
    for _ in range(size):
        op = rng.choice(["and", "or", "not"], p=[0.4, 0.4, 0.2])
        if op == "not":
            pool.append(b.not_(pool[int(rng.integers(len(pool)))]))
        else:
            k = int(rng.integers(2, 4))
            args = [pool[int(i)] for i in rng.integers(len(pool), size=k)]
            pool.append(b.and_(*args) if op == "and" else b.or_(*args))
    return b.build(pool[-1])


def truth_table(C, n):
    """Output of ``C`` on every point of the cube, evaluated gate by gate in Python."""
    X = all_points(n)
    out = []
    for x in X:
        env = {name: bool(v > 0) for name, v in zip(C.inputs, x)}
        vals = []
        for g in C.gates:
            if g.op == "var":
                vals.append(env[g.args[0]])
            elif g.op == "const":
                vals.append(g.args[0])
            elif g.op == "not":
                vals.append(not vals[g.args[0]])
            elif g.op == "and":
                vals.append(all(vals[a] for a in g.args))
            else:
                vals.append(any(vals[a] for a in g.args))
        out.append(1 if vals[C.output] else -1)
    return np.array(out)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
