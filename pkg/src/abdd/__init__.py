"""Aligned binary decision diagrams for threshold functions and binary networks."""
from .boosting import BoostConfig, Net, boost, boost_mm_baseline, build_net, merge_frontier, split_select
from .circuit import Circuit, compose_network, conjoin, dd_to_circuit, eval_circuit, gate_count, \
    hamming_circuit, negate
from .data import (Hypothesis, LabeledSample, balanced_distribution, conditional_entropy_given_hypothesis,
                   edge, frontier_entropy, pseudo_entropy)
from .diagram import Diagram
from .errors import (AbddError, DimensionCapError, Diverged, Indeterminate, PureNode, SolverTimeout,
                     StructuralError, TrivialFunction, WeakLearnerFailure)
from .ltf import ThresholdFunction, eval_ltf, full_sample, integer_scale, lifted_hypotheses, margin
from .sat import CNF, solve, tseitin
from .verify import instance_robustness, model_robustness, sample_robustness

__version__ = "0.1.0"
