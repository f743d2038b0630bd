"""Samples, distributions, hypotheses and the entropy quantities used by boosting.

Instances are ``{-1,+1}`` vectors stored as ``int8`` numpy arrays. A
distribution over a sample is a plain float64 array aligned with the
sample's rows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PureNode

ENTROPY_TOL = 1e-12


def as_bitvector(x, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to an ``int8`` vector of ±1 values, checking length ``n``."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"bit vector must be 1-D, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("bit vector entries must be -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected length {n}, got {arr.shape[0]}")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class Hypothesis:
    """A base classifier: ``x_i``, ``-x_i`` or a constant.

    ``index`` is zero-based. Constants exist for test scaffolding only.
    """

    kind: str
    index: int = 0
    value: int = 1

    def __post_init__(self):
        if self.kind not in ("proj", "neg", "const"):
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.kind == "const" and self.value not in (1, -1):
            raise ValueError("constant hypothesis must be +1 or -1")
        if self.index < 0:
            raise ValueError("hypothesis index must be nonnegative")

    @classmethod
    def projection(cls, i: int) -> "Hypothesis":
        return cls("proj", i)

    @classmethod
    def negated(cls, i: int) -> "Hypothesis":
        return cls("neg", i)

    @classmethod
    def constant(cls, value: int) -> "Hypothesis":
        return cls("const", 0, value)

    @property
    def sign(self) -> int:
        return -1 if self.kind == "neg" else 1

    def __call__(self, X) -> np.ndarray | int:
        """Evaluate on one instance (returns int) or a batch of rows."""
        X = np.asarray(X)
        if self.kind == "const":
            if X.ndim == 1:
                return self.value
            return np.full(X.shape[0], self.value, dtype=np.int8)
        col = X[..., self.index]
        out = col if self.kind == "proj" else -col
        return int(out) if X.ndim == 1 else out.astype(np.int8)

    def __str__(self):
        if self.kind == "const":
            return "+1" if self.value > 0 else "-1"
        return ("" if self.kind == "proj" else "-") + f"x{self.index + 1}"

    def to_json(self) -> dict:
        if self.kind == "const":
            return {"const": self.value}
        return {"proj": self.index, "neg": self.kind == "neg"}

    @classmethod
    def from_json(cls, obj: dict) -> "Hypothesis":
        if "const" in obj:
            return cls.constant(int(obj["const"]))
        return cls("neg" if obj.get("neg") else "proj", int(obj["proj"]))


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Labeled instances ``(x_i, y_i)`` with ``X`` of shape ``(m, n)``."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X))
        y = np.asarray(self.y).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y have different lengths")
        if X.shape[0] == 0:
            raise ValueError("sample must contain at least one instance")
        if not np.all((X == 1) | (X == -1)) or not np.all((y == 1) | (y == -1)):
            raise ValueError("instances and labels must be -1/+1")
        X = X.astype(np.int8)
        y = y.astype(np.int8)
        _check_consistent(X, y)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_items(cls, items: Iterable[tuple[Sequence[int], int]]) -> "LabeledSample":
        items = list(items)
        if not items:
            raise ValueError("sample must contain at least one instance")
        return cls(np.array([x for x, _ in items]), np.array([y for _, y in items]))

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.m

    def __iter__(self):
        for x, y in zip(self.X, self.y):
            yield x, int(y)

    def positive_fraction(self) -> float:
        return float(np.mean(self.y == 1))

    def subset(self, idx) -> "LabeledSample":
        return LabeledSample(self.X[idx], self.y[idx])


def _check_consistent(X: np.ndarray, y: np.ndarray) -> None:
    if X.shape[1] > 62:
        keys = [x.tobytes() for x in X]
    else:
        weights = np.left_shift(np.int64(1), np.arange(X.shape[1], dtype=np.int64))
        keys = ((X > 0).astype(np.int64) @ weights).tolist()
    seen: dict = {}
    for key, label in zip(keys, y.tolist()):
        if seen.setdefault(key, label) != label:
            raise ValueError("duplicate instance carries conflicting labels")


# -- sample files -----------------------------------------------------------

def parse_sample_text(text: str) -> LabeledSample:
    """Parse lines of the form ``+-+- +1``; ``#`` starts a comment."""
    items = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or set(parts[0]) - {"+", "-"}:
            raise ValueError(f"line {lineno}: expected '<+/- string> <+1|-1>'")
        label = int(parts[1])
        if label not in (1, -1):
            raise ValueError(f"line {lineno}: label must be +1 or -1")
        items.append(([1 if c == "+" else -1 for c in parts[0]], label))
    if len({len(x) for x, _ in items}) > 1:
        raise ValueError("instances have different lengths")
    return LabeledSample.from_items(items)


def format_sample_text(S: LabeledSample) -> str:
    lines = []
    for x, y in S:
        lines.append("".join("+" if v > 0 else "-" for v in x) + (" +1" if y > 0 else " -1"))
    return "\n".join(lines) + "\n"


def sample_from_json(obj: dict) -> LabeledSample:
    S = LabeledSample.from_items((it["x"], it["y"]) for it in obj["items"])
    if "n" in obj and S.n != int(obj["n"]):
        raise ValueError(f"declared n={obj['n']} but instances have length {S.n}")
    return S


def sample_to_json(S: LabeledSample) -> dict:
    return {"n": S.n, "items": [{"x": x.tolist(), "y": y} for x, y in S]}


def load_sample(path) -> LabeledSample:
    """Read a sample from a text or JSON file (JSON if it starts with ``{``)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return sample_from_json(json.loads(text))
    return parse_sample_text(text)


# -- distributions and entropy ---------------------------------------------

def uniform(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def check_distribution(d, m: int | None = None) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if m is not None and d.shape != (m,):
        raise ValueError(f"distribution has shape {d.shape}, sample has {m} rows")
    if np.any(d < 0) or abs(d.sum() - 1.0) > 1e-9:
        raise ValueError("distribution must be nonnegative and sum to 1")
    return d


def pseudo_entropy(q):
    """``G(q) = 2 sqrt(q (1 - q))``; accepts scalars or arrays."""
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(q_arr < -ENTROPY_TOL) or np.any(q_arr > 1 + ENTROPY_TOL):
        raise ValueError("pseudo_entropy is defined on [0, 1]")
    q_arr = np.clip(q_arr, 0.0, 1.0)
    out = 2.0 * np.sqrt(q_arr * (1.0 - q_arr))
    return float(out) if out.ndim == 0 else out


def edge(d, S: LabeledSample, h: Hypothesis) -> float:
    """Correlation ``sum_i d_i y_i h(x_i)``."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (S.m,):
        raise ValueError("distribution and sample lengths differ")
    return float(np.dot(d * S.y, h(S.X)))


def hypothesis_matrix(S: LabeledSample, H: Sequence[Hypothesis]) -> np.ndarray:
    """Outputs of every hypothesis on every instance, shape ``(m, |H|)``."""
    return np.column_stack([h(S.X) for h in H]).astype(np.int8)


def balance(d, y) -> np.ndarray:
    """Reweight ``d`` so each label class carries mass 1/2."""
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y)
    pos = d[y == 1].sum()
    neg = d[y == -1].sum()
    if pos <= 0 or neg <= 0:
        raise PureNode("distribution puts no mass on one of the classes")
    return np.where(y == 1, d / (2 * pos), d / (2 * neg))


def balanced_distribution(idx, S: LabeledSample) -> np.ndarray:
    """Balanced distribution of a node reached by the instances ``idx``."""
    d = np.zeros(S.m)
    d[np.asarray(idx, dtype=np.int64)] = 1.0
    return balance(d, S.y)


def entropy(d, S: LabeledSample) -> float:
    d = np.asarray(d, dtype=np.float64)
    return pseudo_entropy(d[S.y == 1].sum() / d.sum())


def conditional_entropy_given_hypothesis(d, S: LabeledSample, h: Hypothesis) -> float:
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (S.m,):
        raise ValueError("distribution and sample lengths differ")
    hx = h(S.X)
    total = 0.0
    for side in (1, -1):
        mask = hx == side
        mass = d[mask].sum()
        if mass > 0:
            total += mass * pseudo_entropy(d[mask & (S.y == 1)].sum() / mass)
    return total


def frontier_entropy(T, S: LabeledSample) -> float:
    """``sum_{u in frontier} p_u G(q_u)`` under the uniform distribution on ``S``."""
    stats = T.stats(S)
    return float(sum(stats[u].p * pseudo_entropy(stats[u].q) for u in T.frontier()))


def training_error(T, S: LabeledSample) -> float:
    """Error of ``h_T`` on ``S`` with open frontier nodes voting by majority."""
    return float(np.mean(T.evaluate_many(S.X) != S.y))
