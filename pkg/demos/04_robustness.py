"""
Robustness radii with a SAT solver
==================================

The robustness of an instance x is the smallest number of flipped
inputs that changes the output. It is found by growing a Hamming ball
around x and asking the solver whether the ball meets the other class.
On a small cube the answer can be checked by brute force.
"""

from pathlib import Path

import numpy as np

from abdd.bnn import compile_network, forward_many, load_network
from abdd.cli import load_instances
from abdd.ltf import cube
from abdd.verify import model_robustness, radii_on_cube, robustness_report

here = Path(__file__).parent
spec = load_network(here / "data" / "two_layer.json")
C = compile_network(spec).circuit

X = load_instances(here / "data" / "sample.txt")
report = robustness_report(C, X)
for x, r, s in zip(X, report.radii, report.seconds):
    print("".join("+" if v > 0 else "-" for v in x), "radius", r, f"({s * 1e3:.1f} ms)")
print(f"sample robustness {report.value:.3f}")

# brute force over the whole cube
labels = forward_many(spec, cube(spec.n_inputs))
radii = radii_on_cube(labels, spec.n_inputs)
print(f"model robustness {model_robustness(C):.4f} (brute force {radii.mean():.4f})")
values, counts = np.unique(radii, return_counts=True)
print("radius histogram:", {int(v): int(c) for v, c in zip(values, counts)})
