"""Python bindings for the polyboltz C++ core."""

from ._core import (
    BasisError,
    CollisionParams,
    ConfigError,
    CrossSectionModel,
    DomainError,
    Estimate,
    GasSpec,
    KernelId,
    NumericError,
    ParticleState,
    alpha_from_molecule,
    bl_jacobian,
    entropy_production,
    eval_B,
    eval_nu,
    eval_Q,
    hs_norm_estimate,
    maxwellian,
    num_threads,
    post_collision,
    run,
    set_num_threads,
    spectrum,
    total_energy,
    verify_assumptions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
