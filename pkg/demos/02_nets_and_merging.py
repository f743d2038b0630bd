"""
Merging frontier nodes with a (delta, lambda)-net
=================================================

After a split, children whose positive fraction q lands in the same net
interval are merged. Inside one interval the pseudo-entropy
G(q) = 2 sqrt(q (1 - q)) varies by at most a factor 1 + lambda, so a merge
inflates the frontier entropy by at most that factor (or up to delta).
"""

import numpy as np

from abdd.boosting import build_net, merge_frontier, net_length_bound
from abdd.data import Hypothesis, LabeledSample, frontier_entropy, pseudo_entropy
from abdd.diagram import Diagram
from abdd.ltf import cube

net = build_net(delta=0.05, lam=0.3)
print(f"{net.length} intervals (bound {net_length_bound(0.05, 0.3) - 1})")
for k, (lo, hi) in enumerate(net.intervals()):
    print(f"  [{lo:.4f}, {hi:.4f}]  max G = {net.max_entropy(k):.3f}")
print("net property on 10^4 points per interval:", net.check())

# a random labeling of the 5-cube, split three times on x0, x1, x2
rng = np.random.default_rng(1)
X = cube(5)
S = LabeledSample(X, rng.choice([-1, 1], size=len(X)))
T = Diagram.open_root(5)
for i in range(3):
    for u in T.frontier():
        T.expand(u, Hypothesis.projection(i))

before = frontier_entropy(T, S)
merged = merge_frontier(T, S, net)
after = frontier_entropy(merged, S)
print(f"\nfrontier nodes {len(T.frontier())} -> {len(merged.frontier())}")
print(f"entropy {before:.4f} -> {after:.4f}  "
      f"(allowed up to {max(net.delta, (1 + net.lam) * before):.4f})")

q = np.linspace(0, 1, 5)
print("\nG at", q, "=", np.round(pseudo_entropy(q), 3))
