"""KAM almost-reducibility engine for quasi-periodic cocycles."""

from ._core import (
    TorusMatFn,
    algebra_membership,
    build_renormalization,
    cluster_decomposition,
    conjugacy_residual,
    convolve_product,
    derivative_omega,
    diophantine_check,
    exp_of,
    gevrey_upper_bound,
    group_membership,
    integrate_cocycle,
    nilpotent_part,
    reducibility_cross_check,
    run,
    solve_homological,
    spectrum_dc_check,
    truncate_and_tail,
)

__all__ = [
    "TorusMatFn",
    "algebra_membership",
    "build_renormalization",
    "cluster_decomposition",
    "conjugacy_residual",
    "convolve_product",
    "derivative_omega",
    "diophantine_check",
    "exp_of",
    "gevrey_upper_bound",
    "group_membership",
    "integrate_cocycle",
    "nilpotent_part",
    "reducibility_cross_check",
    "run",
    "solve_homological",
    "spectrum_dc_check",
    "truncate_and_tail",
]
