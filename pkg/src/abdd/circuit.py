"""(AND, OR, NOT)-circuits: compilation from diagrams, composition, evaluation.

A circuit is a list of gates in topological order. Instance values map to
Boolean inputs by ``+1 -> True``.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .diagram import ONE, ZERO, Diagram, is_leaf
from .errors import StructuralError

OPS = ("var", "const", "not", "and", "or")


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple  # gate ids for not/and/or; (name,) for var; (bool,) for const


@dataclass(frozen=True)
class Circuit:
    inputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    output: int

    def __post_init__(self):
        names = set(self.inputs)
        if len(names) != len(self.inputs):
            raise StructuralError("duplicate input names")
        for i, g in enumerate(self.gates):
            if g.op not in OPS:
                raise StructuralError(f"gate {i}: unknown op {g.op!r}")
            if g.op == "var":
                if g.args[0] not in names:
                    raise StructuralError(f"gate {i}: undeclared input {g.args[0]!r}")
            elif g.op == "const":
                if not isinstance(g.args[0], bool):
                    raise StructuralError(f"gate {i}: constant must be boolean")
            else:
                if g.op == "not" and len(g.args) != 1:
                    raise StructuralError(f"gate {i}: NOT takes one input")
                if g.op in ("and", "or") and len(g.args) < 2:
                    raise StructuralError(f"gate {i}: {g.op.upper()} needs at least two inputs")
                if any(not 0 <= a < i for a in g.args):
                    raise StructuralError(f"gate {i}: inputs must precede the gate")
        if not 0 <= self.output < len(self.gates):
            raise StructuralError("output gate out of range")

    @property
    def n(self) -> int:
        return len(self.inputs)

    def reachable(self) -> set[int]:
        seen = set()
        stack = [self.output]
        while stack:
            g = stack.pop()
            if g in seen:
                continue
            seen.add(g)
            if self.gates[g].op in ("not", "and", "or"):
                stack.extend(self.gates[g].args)
        return seen

    def to_json(self) -> dict:
        gates = []
        for i, g in enumerate(self.gates):
            if g.op == "var":
                gates.append({"id": i, "op": "var", "name": g.args[0]})
            elif g.op == "const":
                gates.append({"id": i, "op": "const", "value": g.args[0]})
            else:
                gates.append({"id": i, "op": g.op, "in": list(g.args)})
        return {"inputs": list(self.inputs), "gates": gates, "output": self.output}

    @classmethod
    def from_json(cls, obj: dict) -> "Circuit":
        gates = []
        for i, entry in enumerate(obj["gates"]):
            if int(entry.get("id", i)) != i:
                raise StructuralError("gate ids must be dense and in order")
            op = entry["op"]
            if op == "var":
                gates.append(Gate("var", (entry["name"],)))
            elif op == "const":
                gates.append(Gate("const", (bool(entry["value"]),)))
            else:
                gates.append(Gate(op, tuple(int(a) for a in entry["in"])))
        return cls(tuple(obj["inputs"]), tuple(gates), int(obj["output"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


class CircuitBuilder:
    """Incremental construction with optional constant folding and hashing."""

    def __init__(self, inputs: Sequence[str], simplify: bool = True):
        self.inputs = list(inputs)
        self.simplify = simplify
        self.gates: list[Gate] = []
        self._table: dict[Gate, int] = {}

    def _add(self, gate: Gate) -> int:
        if self.simplify:
            hit = self._table.get(gate)
            if hit is not None:
                return hit
        self.gates.append(gate)
        gid = len(self.gates) - 1
        if self.simplify:
            self._table[gate] = gid
        return gid

    def _const_of(self, g: int):
        gate = self.gates[g]
        return gate.args[0] if gate.op == "const" else None

    def var(self, name: str) -> int:
        if name not in self.inputs:
            self.inputs.append(name)
        return self._add(Gate("var", (name,)))

    def const(self, value: bool) -> int:
        return self._add(Gate("const", (bool(value),)))

    def not_(self, a: int) -> int:
        if self.simplify:
            c = self._const_of(a)
            if c is not None:
                return self.const(not c)
            if self.gates[a].op == "not":
                return self.gates[a].args[0]
        return self._add(Gate("not", (a,)))

    def _nary(self, op: str, args) -> int:
        args = list(args)
        if not self.simplify:
            if len(args) == 1:
                return args[0]
            return self._add(Gate(op, tuple(args)))
        absorbing = op == "or"  # OR absorbs True, AND absorbs False
        kept = []
        for a in args:
            c = self._const_of(a)
            if c is None:
                if a not in kept:
                    kept.append(a)
            elif c == absorbing:
                return self.const(absorbing)
        negated = {self.gates[a].args[0] for a in kept if self.gates[a].op == "not"}
        if any(a in negated for a in kept):
            return self.const(absorbing)
        if not kept:
            return self.const(not absorbing)
        if len(kept) == 1:
            return kept[0]
        return self._add(Gate(op, tuple(sorted(kept))))

    def and_(self, *args: int) -> int:
        return self._nary("and", args)

    def or_(self, *args: int) -> int:
        return self._nary("or", args)

    def embed(self, C: Circuit, subst: Mapping[str, int] | None = None) -> int:
        """Copy ``C`` into this builder; ``subst`` maps input names to gate ids."""
        subst = subst or {}
        ids = []
        for g in C.gates:
            if g.op == "var":
                name = g.args[0]
                ids.append(subst[name] if name in subst else self.var(name))
            elif g.op == "const":
                ids.append(self.const(g.args[0]))
            elif g.op == "not":
                ids.append(self.not_(ids[g.args[0]]))
            else:
                ids.append(self._nary(g.op, [ids[a] for a in g.args]))
        return ids[C.output]

    def build(self, output: int) -> Circuit:
        """Keep the gates reachable from ``output``, renumbered densely."""
        keep = set()
        stack = [output]
        while stack:
            g = stack.pop()
            if g in keep:
                continue
            keep.add(g)
            if self.gates[g].op in ("not", "and", "or"):
                stack.extend(self.gates[g].args)
        remap = {}
        gates = []
        for g in sorted(keep):
            gate = self.gates[g]
            if gate.op in ("not", "and", "or"):
                gate = Gate(gate.op, tuple(remap[a] for a in gate.args))
            remap[g] = len(gates)
            gates.append(gate)
        return Circuit(tuple(self.inputs), tuple(gates), remap[output])


def default_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def dd_to_circuit(T: Diagram, names: Sequence[str] | None = None, raw: bool = False) -> Circuit:
    """Compile ``T`` node by node into ``(lit & C(hi)) | (~lit & C(lo))``.

    With ``raw=True`` nothing is folded or shared, so every node costs four
    gates (plus a NOT for negated labels). Shared diagram nodes compile once
    in either mode.
    """
    names = list(names) if names is not None else default_names(T.n)
    if len(names) != T.n:
        raise ValueError(f"expected {T.n} input names")
    b = CircuitBuilder(names, simplify=not raw)
    for name in names:
        b.var(name)
    compiled = {ONE: b.const(True), ZERO: b.const(False)}
    order = T._topological()
    for u in reversed(order):
        nd = T.nodes[u]
        if nd.is_open:
            compiled[u] = b.const(nd.value > 0)
            continue
        for c in (nd.lo, nd.hi):
            if not is_leaf(c) and c not in compiled:
                raise StructuralError(f"node {u} points at missing node {c}")
        label = nd.label
        if label.kind == "const":
            compiled[u] = compiled[nd.hi] if label.value > 0 else compiled[nd.lo]
            continue
        lit = b.var(names[label.index])
        if label.kind == "neg":
            lit = b.not_(lit)
        hi_branch = b.and_(lit, compiled[nd.hi])
        lo_branch = b.and_(b.not_(lit), compiled[nd.lo])
        compiled[u] = b.or_(hi_branch, lo_branch)
    return b.build(compiled[T.root])


def negate(C: Circuit) -> Circuit:
    b = CircuitBuilder(C.inputs, simplify=False)
    out = b.embed(C)
    return b.build(b._add(Gate("not", (out,))))


def conjoin(C1: Circuit, C2: Circuit) -> Circuit:
    """AND of two circuits; inputs are matched by name."""
    b = CircuitBuilder(C1.inputs, simplify=False)
    a = b.embed(C1)
    c = b.embed(C2)
    for name in C2.inputs:
        if name not in b.inputs:
            b.inputs.append(name)
    return b.build(b._add(Gate("and", (a, c))))


def simplify(C: Circuit) -> Circuit:
    """Constant propagation, double-negation removal and structural hashing."""
    b = CircuitBuilder(C.inputs, simplify=True)
    return b.build(b.embed(C))


def compose_network(layers: Sequence[Mapping[str, Circuit]],
                    inputs: Sequence[str] | None = None,
                    simplify: bool = True) -> Circuit:
    """Substitute each layer's outputs for the next layer's input variables.

    ``layers[0]`` reads the primary ``inputs``; ``layers[k]`` reads the
    output names of ``layers[k-1]``. The last layer must hold one circuit.
    """
    if not layers:
        raise ValueError("network has no layers")
    if len(layers[-1]) != 1:
        raise StructuralError("final layer must have a single output")
    if inputs is None:
        inputs = []
        for C in layers[0].values():
            inputs.extend(v for v in C.inputs if v not in inputs)
    b = CircuitBuilder(inputs, simplify=simplify)
    available = {name: b.var(name) for name in inputs}
    for depth, layer in enumerate(layers):
        produced = {}
        for out_name, C in layer.items():
            missing = [v for v in C.inputs if v not in available]
            if missing:
                raise StructuralError(
                    f"layer {depth} neuron {out_name!r} reads unknown inputs {missing}")
            produced[out_name] = b.embed(C, available)
        available = produced
    (out,) = available.values()
    return b.build(out)


def hamming_circuit(x, k: int, names: Sequence[str] | None = None) -> Circuit:
    """True exactly on the radius-``k`` Hamming ball around ``x``.

    Each coordinate contributes a literal that is true when it differs from
    ``x``; a sequential counter then checks that at most ``k`` are true.
    """
    x = [int(v) for v in x]
    n = len(x)
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    names = list(names) if names is not None else default_names(n)
    b = CircuitBuilder(names)
    for name in names:
        b.var(name)
    diff = [b.not_(b.var(names[i])) if x[i] > 0 else b.var(names[i]) for i in range(n)]
    # reach[j]: at least j of the literals seen so far are true, j = 0..k+1
    reach = [b.const(True)] + [b.const(False)] * (k + 1)
    for d in diff:
        reach = [reach[0]] + [b.or_(reach[j], b.and_(d, reach[j - 1]))
                              for j in range(1, k + 2)]
    return b.build(b.not_(reach[k + 1]))


def eval_circuit(C: Circuit, assignment: Mapping[str, object]):
    """Evaluate on a name -> bool mapping; boolean arrays evaluate a batch."""
    vals = []
    for g in C.gates:
        if g.op == "var":
            vals.append(assignment[g.args[0]])
        elif g.op == "const":
            vals.append(g.args[0])
        elif g.op == "not":
            vals.append(np.logical_not(vals[g.args[0]]))
        elif g.op == "and":
            vals.append(functools.reduce(np.logical_and, [vals[a] for a in g.args]))
        else:
            vals.append(functools.reduce(np.logical_or, [vals[a] for a in g.args]))
    out = vals[C.output]
    return bool(out) if np.ndim(out) == 0 else np.asarray(out, dtype=bool)


def eval_pm(C: Circuit, X) -> np.ndarray:
    """Evaluate on ±1 rows ordered like ``C.inputs``; returns ±1."""
    X = np.atleast_2d(np.asarray(X))
    if X.shape[1] != C.n:
        raise ValueError(f"expected {C.n} columns")
    assignment = {name: X[:, i] > 0 for i, name in enumerate(C.inputs)}
    out = eval_circuit(C, assignment)
    out = np.broadcast_to(out, (X.shape[0],))
    return np.where(out, 1, -1).astype(np.int8)


def gate_count(C: Circuit) -> int:
    """Number of reachable AND/OR/NOT gates."""
    return sum(1 for g in C.reachable() if C.gates[g].op in ("and", "or", "not"))
