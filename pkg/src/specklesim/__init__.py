"""Wavebeam speckle toolkit: split-step Monte Carlo propagation through
random media, analytic second-moment engines, speckle memory effects, and
complex-gaussianity diagnostics."""

from .core import (
    Grid,
    QueryOffsets,
    ScalingRegime,
    SourceSpec,
    WaveField,
    build_grid,
    map_offsets,
    map_offsets_inverse,
)
from .covariance import CovarianceModel, validate_model
from .simulator import (
    CompensatedField,
    EnsembleSpec,
    PhaseScreen,
    dz_bound,
    init_source,
    make_screen,
    phase_compensate,
    propagate,
    propagate_ensemble,
    propagate_pair_shared_noise,
    realization_rng,
    step,
)
from .analytic_moments import (
    ABCDState,
    ABCDTrajectory,
    closed_ab,
    diffusion_kernel,
    fresnel_apply,
    h_optimal,
    m11,
    m11_planewave,
    mcf_equal_frequency,
    mcf_from_ansatz,
    mcf_split_step,
    solve_abcd,
)
from .statistics import (
    MomentEstimate,
    MomentRequest,
    estimate_moment,
    factorial_sum_identity,
    first_moment_check,
    gaussian_summation_prediction,
    gaussianity_report,
    reduce_moment,
)
from .memory_effects import (
    ChromaScan,
    TiltScan,
    chroma_improvement,
    chroma_profile,
    tilt_correlation,
    tilt_mc_correlation,
    tilt_mc_scan,
    tilt_optimum,
)
from .jump_process import (
    JumpProcessParams,
    PotentialSpec,
    brownian_limit_check,
    brownian_rho,
    rho_estimator,
    sample_increments,
    sample_path,
)

__version__ = "0.1.0"
