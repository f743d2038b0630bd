"""Command-line entry point: ``abdd <command> ...``.

Exit codes: 0 success, 2 input error, 3 trivial function, 4 weak-learner
failure, 5 solver timeout.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

import numpy as np

from . import bnn, compare
from .boosting import BoostConfig, boost, boost_mm_baseline
from .circuit import gate_count
from .data import training_error
from .errors import (DimensionCapError, Diverged, SolverTimeout, StructuralError,
                     TrivialFunction, WeakLearnerFailure)
from .ltf import ThresholdFunction, full_sample, lifted_hypotheses, margin
from .verify import robustness_report

EXIT_INPUT, EXIT_TRIVIAL, EXIT_WEAK, EXIT_TIMEOUT = 2, 3, 4, 5


def _load_json(path):
    return json.loads(Path(path).read_text())


def _write(out, name, text):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def load_instances(path) -> np.ndarray:
    """Instances from a sample file; labels are optional and ignored."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return np.array([it["x"] for it in json.loads(text)["items"]], dtype=np.int8)
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        bits = line.split()[0]
        if set(bits) - {"+", "-"}:
            raise ValueError(f"line {lineno}: instance must be a +/- string")
        rows.append([1 if c == "+" else -1 for c in bits])
    if not rows:
        raise ValueError("no instances found")
    return np.array(rows, dtype=np.int8)


def cmd_ltf2dd(args):
    f = ThresholdFunction.from_json(_load_json(args.ltf))
    S = full_sample(f, args.cap)
    eps = args.epsilon if args.epsilon is not None else 2.0 ** -f.n
    cfg = BoostConfig(eps, lifted_hypotheses(f.n))
    T, trace = (boost if args.algo == "abdd" else boost_mm_baseline)(S, cfg)
    if args.out:
        if args.format == "dot":
            _write(args.out, "diagram.dot", T.to_dot())
        else:
            _write(args.out, "diagram.json", json.dumps(T.to_json(), sort_keys=True))
        _write(args.out, "trace.csv", trace.to_csv())
    print(f"algo={args.algo} n={f.n} epsilon={eps:.6g} iterations={len(trace)} "
          f"size={T.size} width={T.width} depth={T.depth} "
          f"error={training_error(T, S):.6g}")


def cmd_margin(args):
    f = ThresholdFunction.from_json(_load_json(args.ltf))
    cert = margin(f, args.cap)
    if args.out:
        Path(args.out).write_text(json.dumps(cert.to_json(), sort_keys=True))
    print(f"rho={cert.rho:.9g} dual={cert.dual_value:.9g} gap={cert.gap:.3g} "
          f"dual_support={cert.dual_support}")


def cmd_compile(args):
    spec = bnn.load_network(args.network)
    net = bnn.compile_network(spec, epsilon=args.epsilon, algo=args.algo, cap=args.cap,
                              int_precision=args.int_precision, jobs=args.jobs, seed=args.seed)
    if args.out:
        net.save(args.out)
    print(f"neurons={sum(len(r) for r in net.neurons)} distinct={len(net.compiled)} "
          f"inputs={spec.n_inputs} gates={gate_count(net.circuit)} "
          f"checked={net.checked} mismatches={net.mismatches}")


def cmd_verify_sr(args):
    circuit = bnn.load_bundle_circuit(args.bundle)
    X = load_instances(args.sample)
    report = robustness_report(circuit, X, timeout=args.timeout_sec, jobs=args.jobs)
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), sort_keys=True))
    print(f"instances={len(report.radii)} SR={report.value:.6g}")


def cmd_compare(args):
    seeds = [args.seed + i for i in range(args.count)]
    rows = compare.compare_batch(seeds, n=args.n)
    if args.out:
        if args.format == "json":
            text = json.dumps([r.__dict__ for r in rows], sort_keys=True)
        else:
            text = compare.rows_to_csv(rows)
        Path(args.out).write_text(text)
    med = statistics.median
    trend = sum(compare.entropy_trend_holds(r) for r in rows)
    print(f"seeds={len(rows)} median_abdd_size={med(r.abdd_size for r in rows)} "
          f"median_mm_size={med(r.mm_size for r in rows)} "
          f"median_abdd_gates={med(r.abdd_gates for r in rows)} "
          f"median_mm_gates={med(r.mm_gates for r in rows)} "
          f"entropy_trend={trend}/{len(rows)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abdd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--cap", type=int, default=None, help="dimension cap (env ABDD_CAP)")
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("ltf2dd", help="boost an exact diagram for a threshold function")
    p.add_argument("ltf")
    p.add_argument("--algo", choices=("abdd", "mm"), default="abdd")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    common(p)
    p.set_defaults(func=cmd_ltf2dd)

    p = sub.add_parser("margin", help="L1 margin of a threshold function")
    p.add_argument("ltf")
    common(p)
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("compile", help="compile a network to a circuit bundle")
    p.add_argument("network")
    p.add_argument("--algo", choices=("abdd", "mm"), default="abdd")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--int-precision", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify-sr", help="sample-based robustness of a compiled bundle")
    p.add_argument("bundle")
    p.add_argument("sample")
    p.add_argument("--timeout-sec", type=float, default=60.0)
    common(p)
    p.set_defaults(func=cmd_verify_sr)

    p = sub.add_parser("compare", help="aligned vs per-node boosting on seeded LTFs")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except TrivialFunction as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRIVIAL
    except (WeakLearnerFailure, Diverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WEAK
    except SolverTimeout as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (ValueError, KeyError, OSError, StructuralError, DimensionCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
