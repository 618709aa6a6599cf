"""Compiled inner loops (numba when available, plain Python otherwise)."""
from .enumerate import active_set_bounds, find_vertex
from .gibbs import coordinate_bounds, gibbs_sweeps
from .simplex import simplex
from .truncnorm import norm_cdf, norm_isf, norm_ppf, norm_sf, truncnorm_draw

__all__ = [
    "active_set_bounds",
    "coordinate_bounds",
    "find_vertex",
    "gibbs_sweeps",
    "norm_cdf",
    "norm_isf",
    "norm_ppf",
    "norm_sf",
    "simplex",
    "truncnorm_draw",
]
