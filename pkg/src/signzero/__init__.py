"""Set-identified structural VARs under sign and zero restrictions."""
from ._jit import backend
from .bounds import (
    BoundsQuery,
    BoundsRecord,
    RobustSummary,
    bounds_active_set,
    bounds_local_opt,
    bounds_sample_envelope,
    compute_bounds,
    robust_summary,
)
from .feasibility import (
    ChebyshevResult,
    LinearProgram,
    chebyshev_check,
    rejection_emptiness_check,
    solve_lp,
    vertex_emptiness_check,
)
from .restrictions import (
    MultiColumnSystem,
    RestrictionSpec,
    RestrictionSystem,
    acr19_design,
    evaluate,
)
from .samplers import ChainConfig, gibbs_chain, gibbs_chain_multi, rejection_sample
from .transform import TransformedSystem, pull_back, push_forward, reduce
from .var import ReducedFormParams, VarData, irf_coefficients, ols_estimate, posterior_draw_niw

__version__ = "0.1.0"
