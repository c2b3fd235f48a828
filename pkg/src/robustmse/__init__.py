"""Minimum mean square estimation under worst-case expectations.

The package computes and certifies the estimator minimizing the worst-case
mean square error over the convex hull of finitely many probability measures
on a finite sample space, together with the saddle-point, kernel, and
penalized-problem characterizations of that estimator, stability checks of
measure sets on filtrations, and the discrete scenario-tree comparison with
the backward sup-recursion.
"""

from ._version import __version__
from .errors import (
    AbsoluteContinuityError,
    ArgumentError,
    GuardRefusalError,
    PastingDegeneracyError,
    PropernessError,
    RobustMseError,
    StructuralError,
    ValidationError,
    ZeroMassBlockError,
)
from .spaces import (
    Filtration,
    PartitionAlgebra,
    RandomVariable,
    SampleSpace,
    block_project,
    is_measurable,
    refine_check,
    truncate,
)
from .measures import (
    Measure,
    MeasureSet,
    MixtureWeights,
    conditional_expectation,
    density,
    expectation,
    is_proper,
    mix,
    reference_measure,
)
from .sublinear import (
    AxiomReport,
    RhoValue,
    axiom_suite,
    ess_inf_conditional,
    ess_sup_conditional,
    holder_bound,
    rho,
)
from .estimator import (
    Certificate,
    EstimatorResult,
    KernelInterval,
    MinimaxGapReport,
    NsReport,
    OptimalityReport,
    SolverConfig,
    brute_force_mmse,
    kernel_interval,
    kernel_member,
    minimax_gap,
    ns_condition,
    optimality_ineq,
    penalized_value,
    solve_mmse,
    verify_saddle,
)
from .stability import (
    PastedMeasure,
    RecursivityReport,
    StabilityReport,
    TcCounterexample,
    is_stable,
    mmse_time_consistency_search,
    paste,
    recursivity_check,
    replay_counterexample,
)
from .gexp import (
    GExpResult,
    GexpCompareReport,
    TreeModel,
    compare_gexp_mmse,
    g_expectation,
    tree_measure_set,
)

__all__ = [
    "__version__",
    "AbsoluteContinuityError",
    "ArgumentError",
    "GuardRefusalError",
    "PastingDegeneracyError",
    "PropernessError",
    "RobustMseError",
    "StructuralError",
    "ValidationError",
    "ZeroMassBlockError",
    "Filtration",
    "PartitionAlgebra",
    "RandomVariable",
    "SampleSpace",
    "block_project",
    "is_measurable",
    "refine_check",
    "truncate",
    "Measure",
    "MeasureSet",
    "MixtureWeights",
    "conditional_expectation",
    "density",
    "expectation",
    "is_proper",
    "mix",
    "reference_measure",
    "AxiomReport",
    "RhoValue",
    "axiom_suite",
    "ess_inf_conditional",
    "ess_sup_conditional",
    "holder_bound",
    "rho",
    "Certificate",
    "EstimatorResult",
    "KernelInterval",
    "MinimaxGapReport",
    "NsReport",
    "OptimalityReport",
    "SolverConfig",
    "brute_force_mmse",
    "kernel_interval",
    "kernel_member",
    "minimax_gap",
    "ns_condition",
    "optimality_ineq",
    "penalized_value",
    "solve_mmse",
    "verify_saddle",
    "PastedMeasure",
    "RecursivityReport",
    "StabilityReport",
    "TcCounterexample",
    "is_stable",
    "mmse_time_consistency_search",
    "paste",
    "recursivity_check",
    "replay_counterexample",
    "GExpResult",
    "GexpCompareReport",
    "TreeModel",
    "compare_gexp_mmse",
    "g_expectation",
    "tree_measure_set",
]
