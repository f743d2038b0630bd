"""Linear threshold functions over the ±1 cube and their L1 margin."""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .data import Hypothesis, LabeledSample, as_bitvector
from .errors import DimensionCapError, TrivialFunction

DEFAULT_CAP = 16
HARD_CAP = 24


def dimension_cap(cap: int | None = None) -> int:
    """Resolve the enumeration cap from the argument or ``ABDD_CAP``."""
    if cap is None:
        cap = int(os.environ.get("ABDD_CAP", DEFAULT_CAP))
    if not 1 <= cap <= HARD_CAP:
        raise ValueError(f"dimension cap must lie in [1, {HARD_CAP}]")
    return cap


@dataclass(frozen=True)
class ThresholdFunction:
    """``f(x) = +1`` iff ``w . x + b >= 0``."""

    weights: tuple[float, ...]
    bias: float = 0.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not all(math.isfinite(v) for v in w) or not math.isfinite(self.bias):
            raise ValueError("weights and bias must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n(self) -> int:
        return len(self.weights)

    def __call__(self, x) -> int:
        return eval_ltf(self, x)

    def evaluate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.where(X @ np.asarray(self.weights) + self.bias >= 0, 1, -1).astype(np.int8)

    def to_json(self) -> dict:
        return {"n": self.n, "weights": list(self.weights), "bias": self.bias}

    @classmethod
    def from_json(cls, obj: dict) -> "ThresholdFunction":
        f = cls(tuple(obj["weights"]), obj.get("bias", 0.0))
        if "n" in obj and int(obj["n"]) != f.n:
            raise ValueError(f"declared n={obj['n']} but {f.n} weights given")
        return f


def eval_ltf(f: ThresholdFunction, x) -> int:
    x = as_bitvector(x, f.n)
    return 1 if float(np.dot(f.weights, x)) + f.bias >= 0 else -1


def cube(n: int) -> np.ndarray:
    """All ``2**n`` points of ``{-1,1}^n`` in lexicographic order (-1 before +1)."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.int8)


def full_sample(f: ThresholdFunction, cap: int | None = None) -> LabeledSample:
    """The whole cube labeled by ``f``."""
    cap = dimension_cap(cap)
    if f.n > cap:
        raise DimensionCapError(f"n={f.n} exceeds the dimension cap {cap}")
    X = cube(f.n)
    return LabeledSample(X, f.evaluate_many(X))


def lifted_hypotheses(n: int) -> list[Hypothesis]:
    """``x_1..x_n`` followed by ``-x_1..-x_n``."""
    return [Hypothesis.projection(i) for i in range(n)] + \
        [Hypothesis.negated(i) for i in range(n)]


@dataclass
class MarginCertificate:
    rho: float
    lifted_weights: np.ndarray
    bias: float
    dual: np.ndarray          # distribution over the cube rows (lexicographic)
    dual_value: float
    gap: float

    @property
    def dual_support(self) -> int:
        return int(np.count_nonzero(self.dual > 1e-12))

    def to_json(self) -> dict:
        return {"rho": self.rho, "lifted_weights": self.lifted_weights.tolist(),
                "bias": self.bias, "dual_value": self.dual_value,
                "dual_support": self.dual_support, "gap": self.gap}


def margin(f: ThresholdFunction, cap: int | None = None) -> MarginCertificate:
    """Solve the L1 margin LP over the lifted projections, with its dual.

    Primal: maximize rho subject to ``f(x)(sum_i w_i h_i(x) + b) >= rho`` on
    the cube, ``w >= 0``, ``sum w = 1``. The dual is a class-balanced
    distribution minimizing the best hypothesis edge.
    """
    S = full_sample(f, cap)
    if np.all(S.y == S.y[0]):
        raise TrivialFunction("f is constant on the cube; margin is undefined")
    n = f.n
    HX = np.hstack([S.X, -S.X]).astype(np.float64)        # (2^n, 2n)
    fy = S.y.astype(np.float64)[:, None]
    # variables: w (2n), b, rho ; minimize -rho
    A_ub = np.hstack([-fy * HX, -fy, np.ones((S.m, 1))])
    b_ub = np.zeros(S.m)
    A_eq = np.zeros((1, 2 * n + 2))
    A_eq[0, :2 * n] = 1.0
    c = np.zeros(2 * n + 2)
    c[-1] = -1.0
    bounds = [(0, None)] * (2 * n) + [(None, None), (None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                  method="highs")
    if res.status != 0:
        raise RuntimeError(f"margin LP failed: {res.message}")
    w = np.clip(res.x[:2 * n], 0.0, None)
    b = float(res.x[2 * n])
    rho = float(res.x[-1])
    d = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
    d = d / d.sum()
    # rebalance the classes exactly; solver marginals carry ~1e-12 noise
    d = np.where(S.y == 1, d / (2 * d[S.y == 1].sum()), d / (2 * d[S.y == -1].sum()))
    dual_value = float(np.max((d * S.y) @ HX))
    return MarginCertificate(rho, w, b, d, dual_value, abs(rho - dual_value))


def integer_scale(weights: Sequence, bias, p: int) -> tuple[list[int], int]:
    """Scale by ``10**p / max|.|`` and floor toward minus infinity.

    Arithmetic is exact: decimal strings are parsed as rationals and floats
    are taken at their exact binary value.
    """
    if p < 1:
        raise ValueError("precision p must be at least 1")
    vals = [Fraction(v) for v in weights]
    b = Fraction(bias)
    alpha = max([abs(v) for v in vals] + [abs(b)])
    if alpha == 0:
        raise ValueError("weights and bias are all zero")
    scale = Fraction(10 ** p) / alpha
    return [math.floor(scale * v) for v in vals], math.floor(scale * b)
