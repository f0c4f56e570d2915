"""Entropy, speed, and cutoff analysis for random walks on random lifts.

The library takes a small weighted multigraph, analyzes the lazy random
walk on its universal cover (escape probabilities, ray law, entropy rate,
speed), and verifies on explicit random n-lifts that the walk's mixing
time grows like ``log n`` divided by the entropy rate, with a square-root
window.  Everything is deterministic given a master seed.
"""

from .errors import AnalysisError, GraphError, NonConvergenceError
from .base_graph import (
    AssumptionReport,
    CoreDecomposition,
    Edge,
    StationaryDistribution,
    TransienceVerdict,
    WeightedMultigraph,
    build_graph,
    check_assumptions,
    core,
    inverse_oriented,
    is_cover_transient,
    parse_graph,
    stationary_distribution,
    transition_matrix,
    validate_graph,
)
from .analyzer import (
    EntropyReport,
    FirstPassageSolution,
    MixingPrediction,
    RayLaw,
    WeightEntropy,
    chain_clt_params,
    entropy,
    predict_mixing_time,
    ray_law,
    solve_first_passage,
    speed,
    weight_entropy,
)
from .cover import (
    CoverTrajectory,
    CoverVertex,
    ExcursionStats,
    LevelWeightCheck,
    LocalizationProfile,
    RayView,
    cover_moves,
    entropic_weight,
    estimate_clt_params,
    estimate_speed,
    excursion_decomposition,
    extract_ray,
    level_weight_check,
    log_entropic_weight,
    log_weight_trace,
    make_ray_view,
    ray_localization_profile,
    simulate_walk,
)
from .lift import (
    Lift,
    apply_kernel,
    apply_kernel_to_function,
    generate_sequential_lift,
    generate_uniform_lift,
    lift_from_json,
    lift_stationary,
    lift_to_json,
    lift_transition_matrix,
    project_distribution,
    spectrum_inheritance_check,
)
from .mixing import (
    ConductanceProxy,
    SweepResult,
    TVCurve,
    WorstBest,
    conductance_proxy,
    cutoff_sweep,
    mixing_curve,
    projection_identity_check,
    propagate,
    worst_and_best_case,
)
from .rng import substream

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "GraphError",
    "NonConvergenceError",
    "AssumptionReport",
    "CoreDecomposition",
    "Edge",
    "StationaryDistribution",
    "TransienceVerdict",
    "WeightedMultigraph",
    "build_graph",
    "check_assumptions",
    "core",
    "inverse_oriented",
    "is_cover_transient",
    "parse_graph",
    "stationary_distribution",
    "transition_matrix",
    "validate_graph",
    "EntropyReport",
    "FirstPassageSolution",
    "MixingPrediction",
    "RayLaw",
    "WeightEntropy",
    "chain_clt_params",
    "entropy",
    "predict_mixing_time",
    "ray_law",
    "solve_first_passage",
    "speed",
    "weight_entropy",
    "CoverTrajectory",
    "CoverVertex",
    "ExcursionStats",
    "LevelWeightCheck",
    "LocalizationProfile",
    "RayView",
    "cover_moves",
    "entropic_weight",
    "estimate_clt_params",
    "estimate_speed",
    "excursion_decomposition",
    "extract_ray",
    "level_weight_check",
    "log_entropic_weight",
    "log_weight_trace",
    "make_ray_view",
    "ray_localization_profile",
    "simulate_walk",
    "Lift",
    "apply_kernel",
    "apply_kernel_to_function",
    "generate_sequential_lift",
    "generate_uniform_lift",
    "lift_from_json",
    "lift_stationary",
    "lift_to_json",
    "lift_transition_matrix",
    "project_distribution",
    "spectrum_inheritance_check",
    "ConductanceProxy",
    "SweepResult",
    "TVCurve",
    "WorstBest",
    "conductance_proxy",
    "cutoff_sweep",
    "mixing_curve",
    "projection_identity_check",
    "propagate",
    "worst_and_best_case",
    "substream",
    "__version__",
]
