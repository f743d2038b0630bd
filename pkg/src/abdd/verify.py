"""Instance, sample and model robustness of Boolean classifiers given as circuits."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, conjoin, eval_pm, hamming_circuit, negate
from .data import as_bitvector
from .errors import DimensionCapError, Indeterminate, TrivialFunction
from .ltf import cube, dimension_cap
from .sat import TIMEOUT, solve_circuit


@dataclass
class RobustnessReport:
    instances: np.ndarray
    radii: list[int]
    seconds: list[float] = field(default_factory=list)

    @property
    def value(self) -> float:
        return float(np.mean(self.radii))

    def to_json(self) -> dict:
        return {"sr": self.value,
                "instances": [{"x": x.tolist(), "r": r, "seconds": s}
                              for x, r, s in zip(self.instances, self.radii, self.seconds)]}


def instance_robustness(f: Circuit, x, timeout: float | None = 60.0) -> int:
    """Smallest Hamming radius around ``x`` containing a differently classified point.

    Scans ``k = 1..n`` and asks the solver whether the radius-``k`` ball
    meets the opposite class. Negative instances are handled by running the
    same scan on the negated circuit.
    """
    x = as_bitvector(x, f.n)
    g = f if eval_pm(f, x)[0] > 0 else negate(f)
    flipped = negate(g)
    for k in range(1, f.n + 1):
        ball = hamming_circuit(x, k, f.inputs)
        result, assignment = solve_circuit(conjoin(ball, flipped), timeout)
        if result.status == TIMEOUT:
            raise Indeterminate(f"solver timed out at radius {k}", k)
        if result.sat:
            witness = np.array([1 if assignment[v] else -1 for v in f.inputs], dtype=np.int8)
            if int(np.sum(witness != x)) > k or eval_pm(g, witness)[0] > 0:
                raise AssertionError("solver witness is not an adversarial point")
            if k < f.n and eval_pm(hamming_circuit(x, k + 1, f.inputs), witness)[0] < 0:
                raise AssertionError("Hamming balls failed to nest")
            return k
    raise TrivialFunction("circuit is constant; robustness is undefined")


def _radius_timed(args):
    f, x, timeout = args
    start = time.perf_counter()
    r = instance_robustness(f, x, timeout)
    return r, time.perf_counter() - start


def robustness_report(f: Circuit, X, timeout: float | None = 60.0, jobs: int = 1) -> RobustnessReport:
    """Per-instance radii over the rows of ``X``, in input order."""
    X = np.atleast_2d(np.asarray(X, dtype=np.int8))
    if X.shape[0] == 0:
        raise ValueError("instance set is empty")
    tasks = [(f, x, timeout) for x in X]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_radius_timed, tasks))
    else:
        results = [_radius_timed(t) for t in tasks]
    return RobustnessReport(X, [r for r, _ in results], [s for _, s in results])


def sample_robustness(f: Circuit, X, timeout: float | None = 60.0, jobs: int = 1) -> float:
    """Mean instance robustness over the rows of ``X``."""
    return robustness_report(f, X, timeout, jobs).value


def radii_on_cube(labels: np.ndarray, n: int) -> np.ndarray:
    """Distance from each cube point to the nearest oppositely labeled point.

    ``labels`` follow :func:`abdd.ltf.cube` order, where coordinate ``i``
    is bit ``n - 1 - i`` of the row index.
    """
    labels = np.asarray(labels)
    if np.all(labels == labels[0]):
        raise TrivialFunction("function is constant on the cube")
    idx = np.arange(1 << n)
    big = n + 1
    out = np.empty(1 << n, dtype=np.int64)
    for side in (1, -1):
        dist = np.where(labels == -side, 0, big)
        for _ in range(n):
            relaxed = dist.copy()
            for b in range(n):
                np.minimum(relaxed, dist[idx ^ (1 << b)] + 1, out=relaxed)
            if np.array_equal(relaxed, dist):
                break
            dist = relaxed
        out[labels == side] = dist[labels == side]
    return out


def model_robustness(f: Circuit, cap: int | None = None) -> float:
    """Mean robustness over the whole cube, by enumeration."""
    cap = dimension_cap(cap)
    if f.n > cap:
        raise DimensionCapError(f"n={f.n} exceeds the dimension cap {cap}")
    return float(np.mean(radii_on_cube(eval_pm(f, cube(f.n)), f.n)))
