"""Layer-by-layer boosting of aligned decision diagrams.

Each iteration splits every frontier node on one shared hypothesis, sends
pure children to the leaves and merges the remaining children whose
positive fractions fall into the same interval of a ``(delta, lambda)``-net.
The per-node variant (:func:`boost_mm_baseline`) lets every frontier node
pick its own hypothesis, which yields an unaligned BDD.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Hypothesis, LabeledSample, hypothesis_matrix, pseudo_entropy
from .diagram import ONE, ZERO, Diagram
from .errors import AbddError, Diverged, WeakLearnerFailure

TRACE_COLUMNS = ("iter", "hypothesis", "edge", "lambda_hat", "delta_hat",
                 "H_before", "H_split", "H_merged", "width")


# -- (delta, lambda)-nets ----------------------------------------------------

def _g_preimage_low(g: float) -> float:
    """Smaller root of ``G(q) = g``, written to avoid cancellation for small g."""
    return g * g / (2.0 * (1.0 + math.sqrt(max(0.0, 1.0 - g * g))))


@dataclass(frozen=True)
class Net:
    """Interval partition of the unit interval, symmetric about 1/2.

    ``lows`` holds ``0 = v_0 < v_1 < ... < v_J < 1/2``; the partition is
    these points, 1/2 and their mirror images ``1 - v_j``.  Membership on
    the upper half is decided through ``1 - q``, which is exact in floating
    point, so both halves are true mirror images.  Empty ``lows`` is the
    single interval ``[0, 1]``.
    """

    lows: tuple[float, ...]
    delta: float
    lam: float

    @property
    def _half(self) -> tuple[float, ...]:
        return self.lows + (0.5,)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if not self.lows:
            return (0.0, 1.0)
        return self._half + tuple(1.0 - v for v in reversed(self.lows))

    @property
    def length(self) -> int:
        return max(1, 2 * len(self.lows))

    def intervals(self) -> list[tuple[float, float]]:
        b = self.breakpoints
        return [(b[k], b[k + 1]) for k in range(self.length)]

    def _fold(self, k: int) -> int:
        """Index of the lower-half interval mirroring interval ``k``."""
        return k if k < len(self.lows) else self.length - 1 - k

    def interval_of(self, q: float) -> int:
        """Zero-based interval index; a breakpoint belongs to the interval it closes."""
        return int(self.intervals_of(np.array([q], dtype=float))[0])

    def intervals_of(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if np.any((q < 0.0) | (q > 1.0)):
            raise ValueError("q must lie in [0, 1]")
        if not self.lows:
            return np.zeros(q.shape, dtype=np.int64)
        half = np.array(self._half)
        low = np.maximum(0, np.searchsorted(half, q, side="left") - 1)
        high = self.length - np.searchsorted(half, 1.0 - q, side="right")
        return np.where(q <= 0.5, low, high)

    def max_entropy(self, k: int) -> float:
        if not self.lows:
            return 1.0
        j = self._fold(k)
        hi = self._half[j + 1]
        return 1.0 if hi == 0.5 else float(pseudo_entropy(hi))

    def check(self, samples: int = 10_000, tol: float = 1e-12) -> bool:
        """Dense-sampling test of the net property on every interval."""
        b = np.array(self.breakpoints)
        s = np.linspace(0.0, 1.0, samples)
        q = b[:-1, None] + (b[1:] - b[:-1])[:, None] * s[None, :]
        q = np.clip(q, b[:-1, None], b[1:, None])
        t = np.minimum(q, 1.0 - q)
        bound = np.maximum(self.delta, (1.0 + self.lam) * pseudo_entropy(t))
        top = np.array([self.max_entropy(k) for k in range(self.length)])
        inside = self.intervals_of(q) == np.arange(self.length)[:, None]
        return not np.any(inside & (top[:, None] > bound + tol))


def build_net(delta: float, lam: float) -> Net:
    """Geometric net: breakpoints where ``G`` crosses ``delta * (1 + lam)**j``."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if delta >= 1.0:
        return Net((), delta, lam)
    lows = [0.0]
    g = delta
    while g < 1.0:
        v = _g_preimage_low(g)
        if v < 0.5:
            lows.append(v)
        g *= 1.0 + lam
    return Net(tuple(sorted(set(lows))), delta, lam)


def net_length_bound(delta: float, lam: float) -> int:
    """Upper bound on the number of breakpoints produced by :func:`build_net`."""
    return 2 * math.ceil(math.log(1.0 / delta) / math.log(1.0 + lam)) + 3


# -- configuration and trace ------------------------------------------------

@dataclass
class BoostConfig:
    epsilon: float
    hypotheses: Sequence[Hypothesis]
    max_iterations: int | None = None
    margin: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if len(self.hypotheses) == 0:
            raise ValueError("hypothesis set must be nonempty")
        if self.max_iterations is None:
            if self.margin:
                self.max_iterations = 10 * math.ceil(
                    4 * math.log(1 / self.epsilon) / self.margin ** 2)
            else:
                self.max_iterations = 1000


@dataclass
class IterationRecord:
    iter: int
    hypothesis: str
    edge: float
    lambda_hat: float
    delta_hat: float
    H_before: float
    H_split: float
    H_merged: float
    width: int
    jensen: float = 0.0            # sum_u p'_u * gamma_u**2
    net: Net | None = field(default=None, repr=False)
    absorbed: bool = False         # some child went straight to a leaf


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    H_initial: float = 0.0

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def min_edge(self) -> float:
        return min((r.edge for r in self.records), default=1.0)

    def entropy_by_depth(self) -> list[float]:
        """Frontier entropy after each layer, starting with the root (depth 0)."""
        return [self.H_initial] + [r.H_merged for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.iter, r.hypothesis, f"{r.edge:.12g}", f"{r.lambda_hat:.12g}",
                        f"{r.delta_hat:.12g}", f"{r.H_before:.12g}", f"{r.H_split:.12g}",
                        f"{r.H_merged:.12g}", r.width])
        return buf.getvalue()


# -- frontier bookkeeping ---------------------------------------------------

def _frontier_pq(at: np.ndarray, y: np.ndarray, frontier: list[int], m: int):
    """Reach probability and positive fraction of each frontier node."""
    idx = {u: k for k, u in enumerate(frontier)}
    pos = np.zeros(len(frontier))
    cnt = np.zeros(len(frontier))
    for k, u in enumerate(frontier):
        mask = at == u
        cnt[k] = mask.sum()
        pos[k] = (y[mask] == 1).sum()
    q = np.divide(pos, cnt, out=np.zeros_like(pos), where=cnt > 0)
    return cnt / m, q, pos, cnt, idx


def _node_balanced(at, y, u, pos, neg):
    mask = at == u
    return np.where(mask & (y == 1), 0.5 / max(pos, 1), 0.0) + \
        np.where(mask & (y == -1), 0.5 / max(neg, 1), 0.0)


def _mixture(at, y, frontier, p, q, pos, cnt):
    """Weights ``p'_u`` and the mixture of node-balanced distributions."""
    weight = p * pseudo_entropy(q)
    total = weight.sum()
    if total <= 0:
        raise AbddError("frontier has zero entropy; nothing to split")
    p_prime = weight / total
    d_hat = np.zeros(at.shape[0])
    per_node = []
    for k, u in enumerate(frontier):
        if weight[k] <= 0:
            per_node.append(None)
            continue
        du = _node_balanced(at, y, u, pos[k], cnt[k] - pos[k])
        per_node.append(du)
        d_hat += p_prime[k] * du
    return p_prime, d_hat, per_node


def split_select(T: Diagram, H: Sequence[Hypothesis], S: LabeledSample):
    """Pick the hypothesis with the largest edge under the frontier mixture.

    Returns ``(h, d_hat, edge)``. Ties go to the lowest index.
    """
    frontier = T.frontier()
    if not frontier:
        raise AbddError("diagram has an empty frontier")
    at = T.route_many(S.X)
    p, q, pos, cnt, _ = _frontier_pq(at, S.y, frontier, S.m)
    _, d_hat, _ = _mixture(at, S.y, frontier, p, q, pos, cnt)
    edges = (d_hat * S.y) @ hypothesis_matrix(S, H)
    j = int(np.argmax(edges))
    if edges[j] <= 0:
        raise WeakLearnerFailure(f"best edge {edges[j]:.3g} is not positive")
    return H[j], d_hat, float(edges[j])


def _merge_in_place(T: Diagram, at: np.ndarray, y: np.ndarray, net: Net | None, m: int):
    """Absorb pure frontier nodes, then merge by net interval. Returns the new frontier."""
    frontier = T.frontier()
    p, q, pos, cnt, _ = _frontier_pq(at, y, frontier, m)
    mapping = {}
    groups: dict[int, list[int]] = {}
    for k, u in enumerate(frontier):
        if cnt[k] == 0 or pos[k] == 0:
            mapping[u] = ZERO
        elif pos[k] == cnt[k]:
            mapping[u] = ONE
        elif net is None:
            groups.setdefault(k, []).append(u)
        else:
            groups.setdefault(net.interval_of(q[k]), []).append(u)
    absorbed = bool(mapping)
    for group in groups.values():
        rep = min(group)
        for u in group:
            if u != rep:
                mapping[u] = rep
    T.replace(mapping)
    if mapping:
        for old, new in mapping.items():
            at[at == old] = new
    new_frontier = T.frontier()
    for u in new_frontier:
        mask = at == u
        T.nodes[u].value = 1 if 2 * (y[mask] == 1).sum() >= mask.sum() else -1
    return new_frontier, absorbed


def merge_frontier(T_split: Diagram, S: LabeledSample, net: Net | None) -> Diagram:
    """Send pure frontier nodes to leaves and merge the rest by net interval."""
    T = T_split.copy()
    at = T.route_many(S.X)
    _merge_in_place(T, at, S.y, net, S.m)
    return T


def _entropy_of(at, y, frontier, m):
    p, q, *_ = _frontier_pq(at, y, frontier, m)
    return float(np.dot(p, pseudo_entropy(q))) if len(frontier) else 0.0


# -- main loop --------------------------------------------------------------

def _run(S: LabeledSample, cfg: BoostConfig, per_node: bool,
         callback: Callable | None = None):
    kind = "bdd" if per_node else "abdd"
    H = list(cfg.hypotheses)
    HX = hypothesis_matrix(S, H)
    y = S.y
    m = S.m
    T = Diagram.open_root(S.n, kind)
    at = np.full(m, T.root, dtype=np.int64)
    frontier, _ = _merge_in_place(T, at, y, None, m)
    trace = IterationTrace()
    H_cur = _entropy_of(at, y, frontier, m)
    trace.H_initial = H_cur
    k = 0
    while H_cur >= cfg.epsilon and frontier:
        if k >= cfg.max_iterations:
            raise Diverged(f"no convergence after {k} iterations", T.finalize(), trace)
        k += 1
        p, q, pos, cnt, _ = _frontier_pq(at, y, frontier, m)
        p_prime, d_hat, d_nodes = _mixture(at, y, frontier, p, q, pos, cnt)

        if per_node:
            choice = {}
            gammas = np.zeros(len(frontier))
            for i, u in enumerate(frontier):
                if d_nodes[i] is None:
                    choice[u] = 0
                    continue
                e = (d_nodes[i] * y) @ HX
                choice[u] = int(np.argmax(e))
                gammas[i] = e[choice[u]]
            gamma = float(np.dot(p_prime, gammas))
            label = "per-node"
        else:
            edges = (d_hat * y) @ HX
            j = int(np.argmax(edges))
            gamma = float(edges[j])
            if gamma <= 0:
                raise WeakLearnerFailure(
                    f"iteration {k}: best edge {gamma:.3g} is not positive")
            choice = {u: j for u in frontier}
            gammas = np.array([0.0 if d is None else float((d * y) @ HX[:, j])
                               for d in d_nodes])
            label = str(H[j])

        for u in frontier:
            j = choice[u]
            lo, hi = T.expand(u, H[j])
            mask = at == u
            at[mask] = np.where(HX[mask, j] > 0, hi, lo)
        children = T.frontier()
        H_split = _entropy_of(at, y, children, m)
        lam_hat = 1.0 - H_split / H_cur

        net = None
        delta_hat = 0.0
        if lam_hat <= 0:
            if not per_node:
                raise WeakLearnerFailure(f"iteration {k}: split did not reduce entropy")
        elif H_split > 0:
            delta_hat = lam_hat * H_cur / 6.0
            net = build_net(min(delta_hat, 1.0), min(lam_hat, 1.0) / 3.0)
        frontier, absorbed = _merge_in_place(T, at, y, net, m)
        H_new = _entropy_of(at, y, frontier, m)

        rec = IterationRecord(k, label, gamma, lam_hat, delta_hat, H_cur, H_split, H_new,
                              len(frontier), float(np.dot(p_prime, gammas ** 2)), net, absorbed)
        trace.records.append(rec)
        if callback is not None:
            callback(T, rec)
        H_cur = H_new
    return T.finalize(), trace


def boost(S: LabeledSample, cfg: BoostConfig, callback: Callable | None = None):
    """Grow an aligned diagram until the frontier entropy drops below ``epsilon``.

    ``callback(T, record)`` is invoked after every iteration with the
    in-progress diagram (open frontier nodes vote by majority).
    Returns ``(T, trace)``.
    """
    return _run(S, cfg, per_node=False, callback=callback)


def boost_mm_baseline(S: LabeledSample, cfg: BoostConfig, callback: Callable | None = None):
    """Same loop with per-node hypothesis choice; produces an unaligned BDD.

    A layer that does not lower the entropy is kept without merging rather
    than treated as a failure.
    """
    return _run(S, cfg, per_node=True, callback=callback)
