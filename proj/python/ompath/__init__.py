"""Onsager-Machlup most probable paths for SDEs with time-varying additive noise."""

from ._core import (
    ContractError,
    Model,
    NoConvergenceError,
    NumericalError,
    OmpathError,
    Scheme,
    SimulationDivergedError,
    SingularMatrixError,
    builtin_model,
    default_endpoints,
    euler_lagrange_residual,
    euler_lagrange_rhs_example1,
    holder_norm,
    minimize_om,
    om_functional,
    om_path_gradient,
    om_ratio_check,
    simulate,
    solve_el_bvp,
    tube_probability,
)

__all__ = [
    "ContractError",
    "Model",
    "NoConvergenceError",
    "NumericalError",
    "OmpathError",
    "Scheme",
    "SimulationDivergedError",
    "SingularMatrixError",
    "builtin_model",
    "default_endpoints",
    "euler_lagrange_residual",
    "euler_lagrange_rhs_example1",
    "holder_norm",
    "minimize_om",
    "om_functional",
    "om_path_gradient",
    "om_ratio_check",
    "simulate",
    "solve_el_bvp",
    "tube_probability",
]
