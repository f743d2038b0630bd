"""Seeded fixtures and the aligned-vs-per-node size/entropy comparison."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .boosting import BoostConfig, IterationTrace, boost, boost_mm_baseline
from .circuit import dd_to_circuit, gate_count
from .ltf import ThresholdFunction, full_sample, lifted_hypotheses, margin


def random_ltf(rng: np.random.Generator, n: int, low: int = -5, high: int = 5,
               require_nonconstant: bool = True) -> ThresholdFunction:
    """Integer weights and bias drawn uniformly from ``[low, high]``."""
    while True:
        w = rng.integers(low, high + 1, size=n)
        b = int(rng.integers(low, high + 1))
        f = ThresholdFunction(tuple(float(v) for v in w), float(b))
        if not require_nonconstant:
            return f
        y = full_sample(f).y
        if 0 < np.sum(y == 1) < y.size:
            return f


def random_network_json(rng: np.random.Generator, input_shape=(3, 3), hidden: int = 2,
                        low: int = -3, high: int = 3) -> dict:
    """A dense two-layer network over a small image."""
    n = input_shape[0] * input_shape[1]
    w1 = rng.integers(low, high + 1, size=(hidden, n)).tolist()
    b1 = rng.integers(low, high + 1, size=hidden).tolist()
    w2 = rng.integers(low, high + 1, size=(1, hidden)).tolist()
    b2 = rng.integers(low, high + 1, size=1).tolist()
    return {"input_shape": list(input_shape),
            "layers": [{"type": "dense", "weights": w1, "bias": b1},
                       {"type": "dense", "weights": w2, "bias": b2}]}


@dataclass
class ComparisonRow:
    seed: int
    rho: float
    abdd_size: int
    mm_size: int
    abdd_gates: int
    mm_gates: int
    abdd_iterations: int
    mm_iterations: int
    abdd_entropy: list[float]
    mm_entropy: list[float]
    abdd_absorb_depth: int | None
    mm_absorb_depth: int | None


def _first_absorb(trace: IterationTrace) -> int | None:
    return next((r.iter for r in trace if r.absorbed), None)


def compare_one(f: ThresholdFunction, seed: int = 0) -> ComparisonRow:
    S = full_sample(f)
    rho = margin(f).rho
    cfg = BoostConfig(2.0 ** -f.n, lifted_hypotheses(f.n), margin=rho)
    Ta, ta = boost(S, cfg)
    Tm, tm = boost_mm_baseline(S, cfg)
    return ComparisonRow(seed, rho, Ta.size, Tm.size,
                         gate_count(dd_to_circuit(Ta)), gate_count(dd_to_circuit(Tm)),
                         len(ta), len(tm), ta.entropy_by_depth(), tm.entropy_by_depth(),
                         _first_absorb(ta), _first_absorb(tm))


def entropy_trend_holds(row: ComparisonRow, tol: float = 1e-12) -> bool:
    """ABDD entropy <= per-node entropy at every depth from the first absorption on."""
    starts = [d for d in (row.abdd_absorb_depth, row.mm_absorb_depth) if d is not None]
    if not starts:
        return True
    start = min(starts)
    depth = max(len(row.abdd_entropy), len(row.mm_entropy))
    a = row.abdd_entropy + [0.0] * (depth - len(row.abdd_entropy))
    m = row.mm_entropy + [0.0] * (depth - len(row.mm_entropy))
    return all(a[d] <= m[d] + tol for d in range(start, depth))


def compare_batch(seeds, n: int = 10, low: int = -5, high: int = 5) -> list[ComparisonRow]:
    rows = []
    for seed in seeds:
        f = random_ltf(np.random.default_rng(seed), n, low, high)
        rows.append(compare_one(f, seed))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "rho", "abdd_size", "mm_size", "abdd_gates", "mm_gates",
                "abdd_iterations", "mm_iterations", "abdd_entropy", "mm_entropy"])
    for r in rows:
        w.writerow([r.seed, f"{r.rho:.12g}", r.abdd_size, r.mm_size, r.abdd_gates, r.mm_gates,
                    r.abdd_iterations, r.mm_iterations,
                    " ".join(f"{h:.6g}" for h in r.abdd_entropy),
                    " ".join(f"{h:.6g}" for h in r.mm_entropy)])
    return buf.getvalue()


def size_envelope(epsilon: float, gamma: float) -> float:
    """Unit-constant size bound ``(ln(1/eps)/gamma^4)(ln(1/eps) + ln(1/gamma))``."""
    le = math.log(1.0 / epsilon)
    return le / gamma ** 4 * (le + math.log(1.0 / gamma))
