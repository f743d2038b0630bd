"""Tseitin encoding of circuits and a DPLL solver with two watched literals."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .circuit import Circuit

SAT = "SAT"
UNSAT = "UNSAT"
TIMEOUT = "TIMEOUT"


@dataclass
class CNF:
    num_vars: int
    clauses: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        self.clauses = [tuple(int(l) for l in c) for c in self.clauses]
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} references an undeclared variable")

    @property
    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def satisfied_by(self, model) -> bool:
        """``model[v]`` is the value of variable ``v`` (index 0 unused)."""
        return all(any(model[abs(l)] == (l > 0) for l in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dimacs(cls, text: str) -> "CNF":
        num_vars = None
        declared = None
        clauses, current = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError(f"bad problem line: {line!r}")
                num_vars, declared = int(parts[2]), int(parts[3])
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(tuple(current))
                    current = []
                else:
                    current.append(lit)
        if current:
            clauses.append(tuple(current))
        if num_vars is None:
            raise ValueError("missing 'p cnf' header")
        if declared is not None and declared != len(clauses):
            raise ValueError(f"header declares {declared} clauses, found {len(clauses)}")
        return cls(num_vars, clauses)


def tseitin(C: Circuit) -> tuple[CNF, dict[str, int]]:
    """Equisatisfiable CNF asserting the circuit output; one variable per gate.

    Inputs take variables ``1..n`` in ``C.inputs`` order.
    """
    varmap = {name: i + 1 for i, name in enumerate(C.inputs)}
    nv = len(varmap)
    gate_var = []
    clauses: list[tuple[int, ...]] = []
    for g in C.gates:
        if g.op == "var":
            gate_var.append(varmap[g.args[0]])
            continue
        nv += 1
        v = nv
        gate_var.append(v)
        if g.op == "const":
            clauses.append((v,) if g.args[0] else (-v,))
        elif g.op == "not":
            a = gate_var[g.args[0]]
            clauses += [(-v, -a), (v, a)]
        elif g.op == "and":
            ins = [gate_var[a] for a in g.args]
            clauses += [(-v, a) for a in ins]
            clauses.append((v,) + tuple(-a for a in ins))
        else:
            ins = [gate_var[a] for a in g.args]
            clauses += [(v, -a) for a in ins]
            clauses.append((-v,) + tuple(ins))
    clauses.append((gate_var[C.output],))
    return CNF(nv, clauses), varmap


@dataclass
class SolveResult:
    status: str
    model: list[bool] | None = None   # index 0 unused
    decisions: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT


class _Solver:
    def __init__(self, cnf: CNF, deadline: float | None):
        self.nv = cnf.num_vars
        self.deadline = deadline
        self.value = [0] * (self.nv + 1)     # +1 true, -1 false, 0 free
        self.trail: list[int] = []
        self.levels: list[tuple[int, bool]] = []  # (trail index, flipped)
        self.qhead = 0
        self.watches: dict[int, list[int]] = {}
        self.clauses: list[list[int]] = []
        self.units: list[int] = []
        self.conflict_at_root = False
        for c in cnf.clauses:
            lits = list(dict.fromkeys(c))
            if any(-l in lits for l in lits):
                continue
            if not lits:
                self.conflict_at_root = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                idx = len(self.clauses)
                self.clauses.append(lits)
                self.watches.setdefault(lits[0], []).append(idx)
                self.watches.setdefault(lits[1], []).append(idx)
        self.decisions = 0

    def lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def enqueue(self, lit: int) -> bool:
        cur = self.lit_value(lit)
        if cur != 0:
            return cur > 0
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        return True

    def propagate(self) -> bool:
        while self.qhead < len(self.trail):
            false_lit = -self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches.get(false_lit, [])
            keep = []
            i = 0
            while i < len(watchers):
                ci = watchers[i]
                i += 1
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.lit_value(c[0]) > 0:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) >= 0:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if not self.enqueue(c[0]):
                        keep.extend(watchers[i:])
                        self.watches[false_lit] = keep
                        return False
            self.watches[false_lit] = keep
        return True

    def eliminate_pure(self) -> None:
        """Assign literals occurring with one polarity in unsatisfied clauses (root only)."""
        changed = True
        while changed:
            changed = False
            polarity: dict[int, int] = {}
            for c in self.clauses:
                if any(self.lit_value(l) > 0 for l in c):
                    continue
                for l in c:
                    if self.lit_value(l) == 0:
                        polarity[abs(l)] = polarity.get(abs(l), 0) | (1 if l > 0 else 2)
            for v in sorted(polarity):
                if polarity[v] in (1, 2):
                    self.enqueue(v if polarity[v] == 1 else -v)
                    changed = True
            if changed and not self.propagate():
                self.conflict_at_root = True
                return

    def backtrack(self) -> bool:
        """Undo to the most recent unflipped decision and flip it."""
        while self.levels:
            start, flipped = self.levels.pop()
            lit = self.trail[start]
            for l in self.trail[start:]:
                self.value[abs(l)] = 0
            del self.trail[start:]
            self.qhead = start
            if not flipped:
                self.levels.append((start, True))
                self.enqueue(-lit)
                return True
        return False

    def solve(self) -> SolveResult:
        if self.conflict_at_root:
            return SolveResult(UNSAT)
        for u in self.units:
            if not self.enqueue(u):
                return SolveResult(UNSAT)
        if not self.propagate():
            return SolveResult(UNSAT)
        self.eliminate_pure()
        if self.conflict_at_root:
            return SolveResult(UNSAT)
        next_var = 1
        while True:
            while next_var <= self.nv and self.value[next_var] != 0:
                next_var += 1
            if next_var > self.nv:
                model = [False] + [v > 0 for v in self.value[1:]]
                return SolveResult(SAT, model, self.decisions)
            self.decisions += 1
            if self.deadline is not None and self.decisions % 256 == 0 \
                    and time.monotonic() > self.deadline:
                return SolveResult(TIMEOUT, None, self.decisions)
            self.levels.append((len(self.trail), False))
            self.enqueue(next_var)
            while not self.propagate():
                if not self.backtrack():
                    return SolveResult(UNSAT, None, self.decisions)
            next_var = 1


def solve(cnf: CNF, timeout: float | None = 60.0) -> SolveResult:
    """Complete DPLL search; branches on the lowest free variable, true first."""
    deadline = None if timeout is None else time.monotonic() + timeout
    result = _Solver(cnf, deadline).solve()
    if result.sat and not cnf.satisfied_by(result.model):
        raise AssertionError("solver produced a model that violates the formula")
    return result


def solve_circuit(C: Circuit, timeout: float | None = 60.0):
    """Satisfiability of a circuit; returns ``(result, assignment or None)``."""
    cnf, varmap = tseitin(C)
    result = solve(cnf, timeout)
    if not result.sat:
        return result, None
    return result, {name: result.model[v] for name, v in varmap.items()}

