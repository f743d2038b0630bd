"""Binary neural networks with step activations and their compilation to circuits.

Every neuron is a threshold function of its fan-in. Compilation boosts one
exact diagram per distinct neuron over its full input cube, lowers it to a
circuit and wires the circuits together following the network layout.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boosting import BoostConfig, boost, boost_mm_baseline
from .circuit import Circuit, CircuitBuilder, compose_network, dd_to_circuit, eval_pm, gate_count
from .diagram import Diagram
from .errors import AbddError, DimensionCapError, TrivialFunction, WeakLearnerFailure
from .ltf import ThresholdFunction, cube, dimension_cap, full_sample, integer_scale, \
    lifted_hypotheses, margin

EXHAUSTIVE_LIMIT = 16
RANDOM_CHECKS = 100_000


@dataclass
class ConvLayer:
    kernel: int
    stride: int
    filters: np.ndarray   # (F, C, k, k)
    bias: np.ndarray      # (F,)


@dataclass
class DenseLayer:
    weights: np.ndarray   # (out, in)
    bias: np.ndarray      # (out,)


@dataclass
class Neuron:
    name: str
    layer: int
    inputs: list[str]
    ltf: ThresholdFunction


@dataclass
class NetworkSpec:
    input_shape: tuple[int, int]
    layers: list

    def __post_init__(self):
        self.shapes = [(1, *self.input_shape)]
        for i, layer in enumerate(self.layers):
            c, h, w = self.shapes[-1]
            if isinstance(layer, ConvLayer):
                k, s = layer.kernel, layer.stride
                if layer.filters.shape[1:] != (c, k, k):
                    raise ValueError(f"layer {i}: filters must have shape (F, {c}, {k}, {k})")
                if layer.bias.shape != (layer.filters.shape[0],):
                    raise ValueError(f"layer {i}: one bias per filter required")
                if k > h or k > w or s < 1:
                    raise ValueError(f"layer {i}: kernel {k}/stride {s} do not fit {h}x{w}")
                self.shapes.append((layer.filters.shape[0], (h - k) // s + 1, (w - k) // s + 1))
            else:
                if layer.weights.ndim != 2 or layer.weights.shape[1] != c * h * w:
                    raise ValueError(f"layer {i}: dense weights must have {c * h * w} columns")
                if layer.bias.shape != (layer.weights.shape[0],):
                    raise ValueError(f"layer {i}: one bias per output required")
                self.shapes.append((layer.weights.shape[0], 1, 1))
            arrays = (layer.filters if isinstance(layer, ConvLayer) else layer.weights, layer.bias)
            if not all(np.all(np.isfinite(a)) for a in arrays):
                raise ValueError(f"layer {i}: non-finite weights")
        if not self.layers:
            raise ValueError("network has no layers")
        if math.prod(self.shapes[-1]) != 1:
            raise ValueError("network must end in a single output neuron")

    @property
    def n_inputs(self) -> int:
        return self.input_shape[0] * self.input_shape[1]

    def input_names(self) -> list[str]:
        return [f"x{i}" for i in range(self.n_inputs)]

    def neurons(self) -> list[list[Neuron]]:
        """Neurons layer by layer; names of layer ``L`` outputs are ``l{L}_{j}``."""
        prev = np.array(self.input_names(), dtype=object).reshape(self.shapes[0])
        out = []
        for li, layer in enumerate(self.layers):
            F, H, W = self.shapes[li + 1]
            names = np.array([f"l{li}_{j}" for j in range(F * H * W)], dtype=object)
            row = []
            if isinstance(layer, ConvLayer):
                k, s = layer.kernel, layer.stride
                for f in range(F):
                    w = layer.filters[f].reshape(-1)
                    for i in range(H):
                        for j in range(W):
                            patch = prev[:, i * s:i * s + k, j * s:j * s + k].reshape(-1)
                            name = names[(f * H + i) * W + j]
                            row.append(Neuron(name, li, list(patch),
                                              ThresholdFunction(tuple(w), float(layer.bias[f]))))
            else:
                flat = list(prev.reshape(-1))
                for o in range(F):
                    row.append(Neuron(names[o], li, flat,
                                      ThresholdFunction(tuple(layer.weights[o]),
                                                        float(layer.bias[o]))))
            out.append(row)
            prev = names.reshape(F, H, W)
        return out

    def integer_scaled(self, p: int) -> "NetworkSpec":
        """Copy with every neuron's weights and bias scaled to integers."""
        layers = []
        for layer in self.layers:
            if isinstance(layer, ConvLayer):
                fl, bs = [], []
                for f in range(layer.filters.shape[0]):
                    w, b = integer_scale(layer.filters[f].reshape(-1).tolist(), float(layer.bias[f]), p)
                    fl.append(np.array(w, dtype=float).reshape(layer.filters.shape[1:]))
                    bs.append(b)
                layers.append(ConvLayer(layer.kernel, layer.stride, np.array(fl), np.array(bs, float)))
            else:
                ws, bs = [], []
                for o in range(layer.weights.shape[0]):
                    w, b = integer_scale(layer.weights[o].tolist(), float(layer.bias[o]), p)
                    ws.append(w)
                    bs.append(b)
                layers.append(DenseLayer(np.array(ws, float), np.array(bs, float)))
        return NetworkSpec(self.input_shape, layers)

    def to_json(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, ConvLayer):
                layers.append({"type": "conv", "kernel": layer.kernel, "stride": layer.stride,
                               "filters": layer.filters.tolist(), "bias": layer.bias.tolist()})
            else:
                layers.append({"type": "dense", "weights": layer.weights.tolist(),
                               "bias": layer.bias.tolist()})
        return {"input_shape": list(self.input_shape), "layers": layers}

    @classmethod
    def from_json(cls, obj: dict) -> "NetworkSpec":
        h, w = (int(v) for v in obj["input_shape"])
        channels = 1
        size = (h, w)
        layers = []
        for i, entry in enumerate(obj["layers"]):
            kind = entry.get("type")
            bias = np.asarray(entry["bias"], dtype=float).reshape(-1)
            if kind == "conv":
                k, s = int(entry["kernel"]), int(entry["stride"])
                raw = [np.asarray(f, dtype=float) for f in entry["filters"]]
                if any(f.size != channels * k * k for f in raw):
                    raise ValueError(f"layer {i}: each filter needs {channels * k * k} weights")
                filters = np.array([f.reshape(channels, k, k) for f in raw])
                layers.append(ConvLayer(k, s, filters, bias))
                channels = filters.shape[0]
                size = ((size[0] - k) // s + 1, (size[1] - k) // s + 1)
            elif kind == "dense":
                weights = np.asarray(entry["weights"], dtype=float)
                if weights.ndim == 1:
                    weights = weights[None, :]
                layers.append(DenseLayer(weights, bias))
                channels, size = weights.shape[0], (1, 1)
            else:
                raise ValueError(f"layer {i}: unknown layer type {kind!r}")
        return cls((h, w), layers)


def load_network(path) -> NetworkSpec:
    return NetworkSpec.from_json(json.loads(Path(path).read_text()))


def forward(spec: NetworkSpec, x) -> int:
    """Reference evaluation: step activation (``>= 0`` gives +1) layer by layer."""
    return int(forward_many(spec, np.atleast_2d(x))[0])


def forward_many(spec: NetworkSpec, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != spec.n_inputs:
        raise ValueError(f"expected {spec.n_inputs} inputs")
    act = X.reshape(X.shape[0], *spec.shapes[0])
    for li, layer in enumerate(spec.layers):
        F, H, W = spec.shapes[li + 1]
        if isinstance(layer, ConvLayer):
            k, s = layer.kernel, layer.stride
            z = np.empty((X.shape[0], F, H, W))
            for i in range(H):
                for j in range(W):
                    patch = act[:, :, i * s:i * s + k, j * s:j * s + k]
                    z[:, :, i, j] = np.einsum("bckl,fckl->bf", patch, layer.filters) + layer.bias
        else:
            z = (act.reshape(X.shape[0], -1) @ layer.weights.T + layer.bias).reshape(-1, F, 1, 1)
        act = np.where(z >= 0, 1.0, -1.0)
    return act.reshape(X.shape[0]).astype(np.int8)


# -- compilation ------------------------------------------------------------

@dataclass
class CompiledNeuron:
    ltf: ThresholdFunction
    diagram: Diagram
    circuit: Circuit          # over inputs x0..x{n-1}
    rho: float | None
    iterations: int


@dataclass
class CompiledNetwork:
    spec: NetworkSpec
    neurons: list[list[Neuron]]
    compiled: dict[tuple, CompiledNeuron]
    circuit: Circuit
    algo: str = "abdd"
    mismatches: int = 0
    checked: int = 0
    stats: list[dict] = field(default_factory=list)

    def stats_csv(self) -> str:
        buf = io.StringIO()
        cols = ["neuron", "layer", "fan_in", "rho", "iterations", "size", "width", "depth", "gates"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(self.stats)
        return buf.getvalue()

    def save(self, out_dir) -> Path:
        """Write per-neuron diagrams, the composed circuit and a stats CSV."""
        out = Path(out_dir)
        (out / "diagrams").mkdir(parents=True, exist_ok=True)
        for row in self.neurons:
            for nr in row:
                cn = self.compiled[_key(nr.ltf)]
                doc = cn.diagram.to_json()
                doc["inputs"] = nr.inputs
                (out / "diagrams" / f"{nr.name}.json").write_text(json.dumps(doc, sort_keys=True))
        (out / "circuit.json").write_text(json.dumps(self.circuit.to_json()))
        (out / "stats.csv").write_text(self.stats_csv())
        (out / "network.json").write_text(json.dumps(self.spec.to_json()))
        return out


def load_bundle_circuit(bundle) -> Circuit:
    return Circuit.from_json(json.loads((Path(bundle) / "circuit.json").read_text()))


def _key(f: ThresholdFunction) -> tuple:
    return (f.weights, f.bias)


def compile_neuron(f: ThresholdFunction, epsilon: float | None = None, algo: str = "abdd",
                   cap: int | None = None, raw: bool = False) -> CompiledNeuron:
    """Exact diagram and circuit for one threshold function."""
    S = full_sample(f, cap)
    try:
        rho = margin(f, cap).rho
    except TrivialFunction:
        rho = None
    eps = epsilon if epsilon is not None else 2.0 ** -f.n
    cfg = BoostConfig(eps, lifted_hypotheses(f.n), margin=rho)
    run = boost if algo == "abdd" else boost_mm_baseline
    try:
        T, trace = run(S, cfg)
    except WeakLearnerFailure as exc:
        raise WeakLearnerFailure(f"{exc} (neuron margin {rho})") from exc
    return CompiledNeuron(f, T, dd_to_circuit(T, raw=raw), rho, len(trace))


def _compile_task(args):
    f, epsilon, algo, cap = args
    return compile_neuron(f, epsilon, algo, cap)


def rename_inputs(C: Circuit, names) -> Circuit:
    b = CircuitBuilder(list(names), simplify=False)
    subst = {old: b.var(new) for old, new in zip(C.inputs, names)}
    return b.build(b.embed(C, subst))


def compile_network(spec: NetworkSpec, epsilon: float | None = None, algo: str = "abdd",
                    cap: int | None = None, int_precision: int | None = None,
                    jobs: int = 1, check: bool = True, seed: int = 0) -> CompiledNetwork:
    """Compile every neuron, compose the circuits and check against :func:`forward`.

    ``epsilon`` defaults to ``2**-n`` per neuron, which forces exact
    diagrams on full-cube samples.
    """
    cap = dimension_cap(cap)
    if int_precision is not None:
        spec = spec.integer_scaled(int_precision)
    neurons = spec.neurons()
    unique = {}
    for row in neurons:
        for nr in row:
            if len(nr.inputs) > cap:
                raise DimensionCapError(
                    f"neuron {nr.name} has fan-in {len(nr.inputs)} above the cap {cap}")
            unique.setdefault(_key(nr.ltf), nr.ltf)
    tasks = [(f, epsilon, algo, cap) for f in unique.values()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compile_task, tasks))
    else:
        results = [_compile_task(t) for t in tasks]
    compiled = dict(zip(unique.keys(), results))

    layers = []
    stats = []
    for row in neurons:
        layer = {}
        for nr in row:
            cn = compiled[_key(nr.ltf)]
            layer[nr.name] = rename_inputs(cn.circuit, nr.inputs)
            T = cn.diagram
            stats.append({"neuron": nr.name, "layer": nr.layer, "fan_in": len(nr.inputs),
                          "rho": "" if cn.rho is None else f"{cn.rho:.12g}",
                          "iterations": cn.iterations, "size": T.size, "width": T.width,
                          "depth": T.depth, "gates": gate_count(cn.circuit)})
        layers.append(layer)
    circuit = compose_network(layers, spec.input_names())
    result = CompiledNetwork(spec, neurons, compiled, circuit, algo, stats=stats)
    if check:
        result.mismatches, result.checked = check_equivalence(result, seed)
        if result.mismatches:
            raise AbddError(f"compiled circuit disagrees with the network on "
                            f"{result.mismatches} of {result.checked} inputs")
    return result


def check_equivalence(net: CompiledNetwork, seed: int = 0) -> tuple[int, int]:
    """Mismatches between circuit and forward pass: exhaustive up to 16 inputs."""
    n = net.spec.n_inputs
    if n <= EXHAUSTIVE_LIMIT:
        X = cube(n)
    else:
        rng = np.random.default_rng(seed)
        X = rng.choice(np.array([-1, 1], dtype=np.int8), size=(RANDOM_CHECKS, n))
    got = eval_pm(net.circuit, X)
    want = forward_many(net.spec, X)
    return int(np.sum(got != want)), X.shape[0]
