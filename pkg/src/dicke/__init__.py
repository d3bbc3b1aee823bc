"""Dicke-model dynamical phase diagram toolkit.

Mean-field trajectories, order parameters and Lyapunov exponents;
effective-potential critical couplings with a numeric oracle; exact
quantum dynamics via an adaptively truncated Krylov propagator; and
parameter-grid sweeps with checkpoint/resume.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ClassicalState,
    CutoffExceededError,
    DimensionlessView,
    InitialCondition,
    ModelParams,
    build_initial_classical,
    build_initial_quantum,
    from_dimensionless,
    resolve_config,
    to_dimensionless,
)
