"""Binary decision diagrams whose nodes are labeled by hypotheses.

Node ids 0 and 1 are the 0-leaf and the 1-leaf; internal nodes start at 2.
A node may be *open*: it has no label or children yet and sits on the
growth frontier of a diagram that is still being built. Open nodes answer
with a stored majority value, which is how the boosting analysis treats
unexpanded nodes. A finished diagram has no open nodes.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .data import Hypothesis, LabeledSample, as_bitvector
from .errors import StructuralError

ZERO = 0
ONE = 1
KINDS = ("bdd", "obdd", "abdd")


@dataclass
class Node:
    label: Hypothesis | None
    lo: int | None
    hi: int | None
    depth: int
    value: int = 1  # answer of an open node

    @property
    def is_open(self) -> bool:
        return self.label is None


@dataclass
class NodeStats:
    p: float
    q: float
    sample_ids: np.ndarray = field(repr=False)


@dataclass
class ValidationReport:
    ok: bool
    message: str = ""
    nodes: tuple = ()

    def __bool__(self):
        return self.ok


def is_leaf(u: int) -> bool:
    return u in (ZERO, ONE)


class Diagram:
    """Rooted DAG with ±-edges, two leaves and hypothesis labels."""

    def __init__(self, n: int, kind: str = "bdd"):
        if kind not in KINDS:
            raise ValueError(f"unknown diagram kind {kind!r}")
        self.n = n
        self.kind = kind
        self.nodes: dict[int, Node] = {}
        self.root: int = ONE
        self._next_id = 2

    # -- construction -------------------------------------------------------

    @classmethod
    def open_root(cls, n: int, kind: str = "abdd", value: int = 1) -> "Diagram":
        T = cls(n, kind)
        T.root = T.add_open(0, value)
        return T

    @classmethod
    def constant(cls, n: int, value: int, kind: str = "abdd") -> "Diagram":
        T = cls(n, kind)
        T.root = ONE if value > 0 else ZERO
        return T

    def add_node(self, label: Hypothesis, lo: int, hi: int, depth: int = 0) -> int:
        u = self._next_id
        self._next_id += 1
        self.nodes[u] = Node(label, lo, hi, depth)
        return u

    def add_open(self, depth: int, value: int = 1) -> int:
        u = self._next_id
        self._next_id += 1
        self.nodes[u] = Node(None, None, None, depth, value)
        return u

    def expand(self, u: int, label: Hypothesis) -> tuple[int, int]:
        """Give open node ``u`` a label and two fresh open children ``(lo, hi)``."""
        node = self.nodes[u]
        if not node.is_open:
            raise StructuralError(f"node {u} is already expanded")
        lo = self.add_open(node.depth + 1)
        hi = self.add_open(node.depth + 1)
        node.label, node.lo, node.hi = label, lo, hi
        return lo, hi

    def replace(self, mapping: dict[int, int]) -> None:
        """Re-point every edge into a key of ``mapping`` at its value; drop the keys."""
        if not mapping:
            return
        for node in self.nodes.values():
            if node.lo in mapping:
                node.lo = mapping[node.lo]
            if node.hi in mapping:
                node.hi = mapping[node.hi]
        if self.root in mapping:
            self.root = mapping[self.root]
        for old in mapping:
            self.nodes.pop(old, None)

    def merge(self, group) -> int:
        """Merge nodes in ``group`` into the one with the lowest id."""
        group = sorted(group)
        rep = group[0]
        self.replace({u: rep for u in group[1:]})
        return rep

    def finalize(self) -> "Diagram":
        """Route every open node to the leaf matching its stored value."""
        self.replace({u: (ONE if nd.value > 0 else ZERO)
                      for u, nd in self.nodes.items() if nd.is_open})
        return self

    def copy(self) -> "Diagram":
        T = Diagram(self.n, self.kind)
        T.root = self.root
        T._next_id = self._next_id
        T.nodes = {u: Node(nd.label, nd.lo, nd.hi, nd.depth, nd.value)
                   for u, nd in self.nodes.items()}
        return T

    def recompute_depths(self) -> None:
        """Set each node's depth to its longest path length from the root."""
        order = self._topological()
        depth = {u: 0 for u in order}
        for u in order:
            nd = self.nodes[u]
            if nd.is_open:
                continue
            for c in (nd.lo, nd.hi):
                if not is_leaf(c):
                    depth[c] = max(depth[c], depth[u] + 1)
        for u in order:
            self.nodes[u].depth = depth[u]

    # -- queries ------------------------------------------------------------

    def children(self, u: int) -> tuple:
        nd = self.nodes[u]
        return () if nd.is_open else (nd.lo, nd.hi)

    def frontier(self) -> list[int]:
        """Open nodes, i.e. the maximum-depth layer still to be expanded."""
        return sorted(u for u, nd in self.nodes.items() if nd.is_open)

    def route(self, x) -> list[int]:
        """Path of node ids from the root; ends at a leaf (or an open node)."""
        x = as_bitvector(x, self.n)
        path = [self.root]
        u = self.root
        while not is_leaf(u):
            nd = self.nodes.get(u)
            if nd is None:
                raise StructuralError(f"edge to missing node {u}")
            if nd.is_open:
                break
            u = nd.hi if nd.label(x) > 0 else nd.lo
            path.append(u)
            if len(path) > len(self.nodes) + 1:
                raise StructuralError("cycle detected while routing")
        return path

    def evaluate(self, x) -> int:
        u = self.route(x)[-1]
        if u == ONE:
            return 1
        if u == ZERO:
            return -1
        return self.nodes[u].value

    def _tables(self):
        size = self._next_id
        idx = np.zeros(size, dtype=np.int64)
        sign = np.ones(size, dtype=np.int8)
        const = np.zeros(size, dtype=np.int8)
        lo = np.zeros(size, dtype=np.int64)
        hi = np.zeros(size, dtype=np.int64)
        stop = np.ones(size, dtype=bool)
        value = np.zeros(size, dtype=np.int8)
        value[ZERO], value[ONE] = -1, 1
        for u, nd in self.nodes.items():
            if nd.is_open:
                value[u] = nd.value
                continue
            if nd.lo not in self.nodes and not is_leaf(nd.lo) or \
                    nd.hi not in self.nodes and not is_leaf(nd.hi):
                raise StructuralError(f"node {u} has a dangling child")
            stop[u] = False
            lo[u], hi[u] = nd.lo, nd.hi
            if nd.label.kind == "const":
                const[u] = nd.label.value
            else:
                idx[u], sign[u] = nd.label.index, nd.label.sign
        return idx, sign, const, lo, hi, stop, value

    def _walk(self, X, record=False):
        X = np.asarray(X, dtype=np.int8)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected instances of length {self.n}")
        idx, sign, const, lo, hi, stop, value = self._tables()
        m = X.shape[0]
        rows = np.arange(m)
        cur = np.full(m, self.root, dtype=np.int64)
        visits = [(rows, cur.copy())] if record else None
        for _ in range(len(self.nodes) + 1):
            active = ~stop[cur]
            if not active.any():
                return cur, value, visits
            r = rows[active]
            u = cur[active]
            v = np.where(const[u] != 0, const[u], X[r, idx[u]] * sign[u])
            cur[active] = np.where(v > 0, hi[u], lo[u])
            if record:
                visits.append((r, cur[active].copy()))
        raise StructuralError("cycle detected while routing")

    def route_many(self, X) -> np.ndarray:
        """Terminal node (leaf or open node) reached by each row of ``X``."""
        return self._walk(X)[0]

    def evaluate_many(self, X) -> np.ndarray:
        cur, value, _ = self._walk(X)
        return value[cur]

    def stats(self, S: LabeledSample) -> dict[int, NodeStats]:
        """Reach probability and positive fraction of every node under uniform ``S``."""
        _, _, visits = self._walk(S.X, record=True)
        reached = defaultdict(list)
        for r, u in visits:
            order = np.argsort(u, kind="stable")
            u_sorted, r_sorted = u[order], r[order]
            cuts = np.flatnonzero(np.diff(u_sorted)) + 1
            for chunk_u, chunk_r in zip(np.split(u_sorted, cuts), np.split(r_sorted, cuts)):
                if chunk_u.size:
                    reached[int(chunk_u[0])].append(chunk_r)
        out = {}
        for u in list(self.nodes) + [ZERO, ONE]:
            ids = np.concatenate(reached[u]) if u in reached else np.zeros(0, dtype=np.int64)
            ids = np.unique(ids)
            p = ids.size / S.m
            q = float(np.mean(S.y[ids] == 1)) if ids.size else 0.0
            out[u] = NodeStats(p, q, ids)
        return out

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        return max((nd.depth for nd in self.nodes.values()), default=0)

    @property
    def width(self) -> int:
        counts = defaultdict(int)
        for nd in self.nodes.values():
            counts[nd.depth] += 1
        return max(counts.values(), default=0)

    def layers(self) -> dict[int, list[int]]:
        out = defaultdict(list)
        for u in sorted(self.nodes):
            out[self.nodes[u].depth].append(u)
        return dict(out)

    def _topological(self) -> list[int]:
        indeg = {u: 0 for u in self.nodes}
        for u, nd in self.nodes.items():
            for c in self.children(u):
                if not is_leaf(c):
                    if c not in indeg:
                        raise StructuralError(f"node {u} points at missing node {c}")
                    indeg[c] += 1
        stack = sorted((u for u, k in indeg.items() if k == 0), reverse=True)
        order = []
        while stack:
            u = stack.pop()
            order.append(u)
            for c in self.children(u):
                if not is_leaf(c):
                    indeg[c] -= 1
                    if indeg[c] == 0:
                        stack.append(c)
        if len(order) != len(self.nodes):
            raise StructuralError("diagram contains a cycle")
        return order

    def validate(self, kind: str | None = None, order=None, allow_open: bool = False) -> ValidationReport:
        """Check the structural invariants of a BDD, OBDD or ABDD.

        ``order`` is a sequence of variable indices giving the OBDD order;
        by default variables are ordered by index.
        """
        kind = kind or self.kind
        if kind not in KINDS:
            raise ValueError(f"unknown diagram kind {kind!r}")
        if not is_leaf(self.root) and self.root not in self.nodes:
            return ValidationReport(False, "root is missing", (self.root,))
        for u, nd in sorted(self.nodes.items()):
            if nd.is_open:
                if not allow_open:
                    return ValidationReport(False, f"node {u} has no children", (u,))
                continue
            for c in (nd.lo, nd.hi):
                if c is None or (not is_leaf(c) and c not in self.nodes):
                    return ValidationReport(False, f"node {u} has a dangling edge", (u,))
        try:
            order_nodes = self._topological()
        except StructuralError as exc:
            return ValidationReport(False, str(exc))
        reachable = set()
        stack = [] if is_leaf(self.root) else [self.root]
        while stack:
            u = stack.pop()
            if u in reachable:
                continue
            reachable.add(u)
            stack.extend(c for c in self.children(u) if not is_leaf(c))
        unreached = sorted(set(self.nodes) - reachable)
        if unreached:
            return ValidationReport(False, f"node {unreached[0]} is unreachable", (unreached[0],))

        depth = {u: 0 for u in order_nodes}
        for u in order_nodes:
            for c in self.children(u):
                if not is_leaf(c):
                    depth[c] = max(depth[c], depth[u] + 1)

        if kind == "abdd":
            by_depth: dict[int, int] = {}
            for u in sorted(self.nodes):
                nd = self.nodes[u]
                if nd.is_open:
                    continue
                first = by_depth.setdefault(depth[u], u)
                if self.nodes[first].label != nd.label:
                    return ValidationReport(
                        False, f"nodes {first} and {u} share depth {depth[u]} but differ in label",
                        (first, u))
        elif kind == "obdd":
            rank = {v: i for i, v in enumerate(order if order is not None else range(self.n))}
            for u in sorted(self.nodes):
                nd = self.nodes[u]
                if nd.is_open:
                    continue
                if nd.label.kind != "proj":
                    return ValidationReport(False, f"node {u} is not labeled by a variable", (u,))
                for c in (nd.lo, nd.hi):
                    if is_leaf(c) or self.nodes[c].is_open:
                        continue
                    if rank[self.nodes[c].label.index] <= rank[nd.label.index]:
                        return ValidationReport(
                            False, f"nodes {u} and {c} violate the variable order", (u, c))
        return ValidationReport(True)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        nodes = []
        for u in sorted(self.nodes):
            nd = self.nodes[u]
            entry = {"id": u, "depth": nd.depth,
                     "label": None if nd.is_open else nd.label.to_json(),
                     "lo": nd.lo, "hi": nd.hi}
            if nd.is_open:
                entry["value"] = nd.value
            nodes.append(entry)
        return {"kind": self.kind, "n": self.n, "root": self.root, "nodes": nodes}

    @classmethod
    def from_json(cls, obj: dict) -> "Diagram":
        T = cls(int(obj["n"]), obj.get("kind", "bdd"))
        T.root = int(obj["root"])
        for entry in obj["nodes"]:
            u = int(entry["id"])
            if u < 2 or u in T.nodes:
                raise StructuralError(f"bad or duplicate node id {u}")
            if entry.get("label") is None:
                T.nodes[u] = Node(None, None, None, int(entry.get("depth", 0)),
                                  int(entry.get("value", 1)))
            else:
                T.nodes[u] = Node(Hypothesis.from_json(entry["label"]), int(entry["lo"]),
                                  int(entry["hi"]), int(entry.get("depth", 0)))
        T._next_id = max(T.nodes, default=1) + 1
        if not is_leaf(T.root) and T.root not in T.nodes:
            raise StructuralError("root is missing")
        return T

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self, name: str = "T") -> str:
        """Graphviz source: solid +-edges, dashed −-edges, boxed leaves."""
        lines = [f"digraph {name} {{",
                 '  0 [shape=box, label="0"];',
                 '  1 [shape=box, label="1"];']
        for u in sorted(self.nodes):
            nd = self.nodes[u]
            label = "?" if nd.is_open else str(nd.label)
            lines.append(f'  {u} [label="{label}"];')
            if not nd.is_open:
                lines.append(f"  {u} -> {nd.hi} [style=solid];")
                lines.append(f"  {u} -> {nd.lo} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"Diagram(kind={self.kind!r}, n={self.n}, size={self.size}, "
                f"width={self.width}, depth={self.depth})")
