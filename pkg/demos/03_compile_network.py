"""
From a binary network to one Boolean circuit
============================================

Each neuron is a threshold function of its fan-in. It is compiled to an
exact diagram and then lowered node by node into
(lit AND hi) OR (NOT lit AND lo). The neuron circuits are substituted
into each other along the network layout.
"""

from pathlib import Path

import numpy as np

from abdd.bnn import compile_network, forward_many, load_network
from abdd.circuit import dd_to_circuit, eval_pm, gate_count
from abdd.ltf import cube

here = Path(__file__).parent
spec = load_network(here / "data" / "two_layer.json")
print("layer shapes (channels, height, width):", spec.shapes)

net = compile_network(spec)
print(f"{sum(len(r) for r in net.neurons)} neurons, {len(net.compiled)} distinct")
print(net.stats_csv())

X = cube(spec.n_inputs)
agree = np.mean(eval_pm(net.circuit, X) == forward_many(spec, X))
print(f"composed circuit: {gate_count(net.circuit)} gates, agrees on {agree:.0%} "
      f"of {len(X)} inputs")

# without folding every diagram node costs four gates
cn = next(iter(net.compiled.values()))
raw = dd_to_circuit(cn.diagram, raw=True)
print(f"first neuron: {cn.diagram.size} nodes -> {gate_count(raw)} raw gates, "
      f"{gate_count(cn.circuit)} after folding")
