"""Entropy-minimization causal direction inference for discrete variable pairs.

The package provides:

* validated distribution containers and Shannon/Renyi entropy in bits;
* a greedy minimum-entropy coupling of arbitrary marginals, with a
  local-optimum verifier and a brute-force oracle for tiny instances;
* reconstruction of a low-entropy exogenous variable from a conditional
  matrix and the entropy-comparison direction test;
* seeded synthetic experiment drivers and a cause-effect pair evaluator;
* a scikit-learn compatible estimator and the ``entropic`` CLI.
"""

from .distributions import (
    ConditionalMatrix,
    Distribution,
    JointMatrix,
    conditionals_from_joint,
    renyi_entropy,
    shannon_entropy,
)
from .coupling import (
    Atom,
    Coupling,
    CouplingResult,
    LocalOptimumCheck,
    brute_force_min_coupling,
    greedy_atom_masses,
    greedy_coupling,
    greedy_joint_matrix,
    read_coupling,
    verify_local_optimum,
    write_coupling,
)
from .inference import (
    DECISION_UNDECIDED,
    DECISION_XY,
    DECISION_YX,
    DirectionVerdict,
    ExogenousModel,
    FunctionTable,
    exogenous_from_conditional,
    h0_scores,
    infer_direction,
    joint_from_model,
)
from .synth import (
    BenchmarkRow,
    IdentifiabilitySummary,
    SynthConfig,
    TrialRecord,
    benchmark_csv,
    identifiability_csv,
    run_greedy_benchmark,
    run_identifiability_experiment,
    sample_low_entropy,
    sample_random_function,
    sample_simplex_uniform,
)
from .pairs import (
    CauseEffectPair,
    EvalCurve,
    EvalPoint,
    PairDataset,
    PairsError,
    clopper_pearson,
    curve_csv,
    empirical_joint,
    evaluate_dataset,
    load_pairs,
    quantize_pair,
)
from .estimator import EntropicCausalDirection

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BenchmarkRow",
    "CauseEffectPair",
    "ConditionalMatrix",
    "Coupling",
    "CouplingResult",
    "DECISION_UNDECIDED",
    "DECISION_XY",
    "DECISION_YX",
    "DirectionVerdict",
    "Distribution",
    "EntropicCausalDirection",
    "EvalCurve",
    "EvalPoint",
    "ExogenousModel",
    "FunctionTable",
    "IdentifiabilitySummary",
    "JointMatrix",
    "LocalOptimumCheck",
    "PairDataset",
    "PairsError",
    "SynthConfig",
    "TrialRecord",
    "benchmark_csv",
    "brute_force_min_coupling",
    "clopper_pearson",
    "conditionals_from_joint",
    "curve_csv",
    "empirical_joint",
    "evaluate_dataset",
    "exogenous_from_conditional",
    "greedy_atom_masses",
    "greedy_coupling",
    "greedy_joint_matrix",
    "h0_scores",
    "identifiability_csv",
    "infer_direction",
    "joint_from_model",
    "load_pairs",
    "quantize_pair",
    "read_coupling",
    "renyi_entropy",
    "run_greedy_benchmark",
    "run_identifiability_experiment",
    "sample_low_entropy",
    "sample_random_function",
    "sample_simplex_uniform",
    "shannon_entropy",
    "verify_local_optimum",
    "write_coupling",
    "__version__",
]
