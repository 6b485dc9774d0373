"""Conditional preparation of correlated photon-number states and
quadrature-homodyne Bell tests in truncated Fock space."""

from .bell import (
    BellAngles,
    BellReport,
    bell_report,
    ch_S,
    ch_ratio_literal,
    chsh_B,
    correlation_E,
    hermite_wavefunction,
    marginal_plus,
    overlap_table,
    p_plus_plus,
    p_plus_plus_quadrature_oracle,
)
from .catalog import CatalogSpec, circle, ps_tmss, seed, seed_transmissivity, tmss
from .fock_core import (
    CoefficientVector,
    ConditionalEnsemble,
    FourModeTensor,
    TwoModeAmplitudeMatrix,
    diagonal_coefficients,
    embed_diagonal,
    norm_squared,
    normalize,
    read_state_file,
    trace_distance_pure_vs_ensemble,
    write_state_file,
)
from .linear_optics import (
    BeamSplitter,
    DetectorOutcome,
    apply_bs_pair_on_four_modes,
    apply_bs_two_mode,
    bs_matrix_element,
    condition_on_outcome,
    photon_subtract_beamsplitter,
    photon_subtract_exact,
)
from .optimizer import (
    OptimizationProblem,
    optimize_angle,
    optimize_coefficients,
    optimize_family_parameter,
)
from .pipeline import (
    PipelineConfig,
    PipelineReport,
    Stage1Report,
    gaussify_coefficients,
    gaussify_step,
    overgaussification_scan,
    run_pipeline,
    stage1_transmissivity,
    stage1_verify,
)
from .sampler import BEstimate, SampleBatch, estimate_B, sample_joint

__version__ = "0.1.0"

__all__ = [
    "BEstimate",
    "BeamSplitter",
    "BellAngles",
    "BellReport",
    "CatalogSpec",
    "CoefficientVector",
    "ConditionalEnsemble",
    "DetectorOutcome",
    "FourModeTensor",
    "OptimizationProblem",
    "PipelineConfig",
    "PipelineReport",
    "SampleBatch",
    "Stage1Report",
    "TwoModeAmplitudeMatrix",
    "apply_bs_pair_on_four_modes",
    "apply_bs_two_mode",
    "bell_report",
    "bs_matrix_element",
    "ch_S",
    "ch_ratio_literal",
    "chsh_B",
    "circle",
    "condition_on_outcome",
    "correlation_E",
    "diagonal_coefficients",
    "embed_diagonal",
    "estimate_B",
    "gaussify_coefficients",
    "gaussify_step",
    "hermite_wavefunction",
    "marginal_plus",
    "norm_squared",
    "normalize",
    "optimize_angle",
    "optimize_coefficients",
    "optimize_family_parameter",
    "overgaussification_scan",
    "overlap_table",
    "p_plus_plus",
    "p_plus_plus_quadrature_oracle",
    "photon_subtract_beamsplitter",
    "photon_subtract_exact",
    "ps_tmss",
    "read_state_file",
    "run_pipeline",
    "sample_joint",
    "seed",
    "seed_transmissivity",
    "stage1_transmissivity",
    "stage1_verify",
    "tmss",
    "trace_distance_pure_vs_ensemble",
    "write_state_file",
]
