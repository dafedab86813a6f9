"""Radial shooting for the Lorentz-Minkowski mean curvature equation

    -div(grad u / sqrt(1 - |grad u|^2)) = |u|^(p-1) u   in R^N,

with classification of the radial solutions, first-integral and P-function
diagnostics, tail decay fits and the scaling link to Lane-Emden.
"""
from .classify import (
    Classification,
    ClassifyCriteria,
    Intersections,
    Verdict,
    classify,
    count_intersections,
    envelope,
    find_zeros,
    zero_gaps,
)
from .decay import DecayFit, DecayVerdict, d12_proxy, decay_band, fit_tail_exponent
from .diagnostics import (
    DiagnosticsReport,
    PreconditionError,
    check_P_consistency,
    diagnose,
    first_integral_residual,
    integral_J,
)
from .integrator import (
    Event,
    EventKind,
    IntegratorConfig,
    Termination,
    Trajectory,
    integrate,
    quadrature_crosscheck,
)
from .model import (
    DomainError,
    Parameters,
    Regime,
    critical_exponent,
    delta_root,
    eval_auxiliary,
    eval_L,
    eval_nonlinearity,
    regime,
)
from .rescale import (
    EPS_SEQUENCE,
    EpsFamilyParams,
    closeness,
    lane_emden_bubble,
    map_from_eps,
    map_to_eps,
    solve_eps_family,
    solve_lane_emden,
)
from .sweep import (
    SweepConfig,
    SweepReport,
    classify_xi,
    estimate_threshold,
    run_sweep,
    positivity_certificate,
)

__version__ = "0.1.0"
