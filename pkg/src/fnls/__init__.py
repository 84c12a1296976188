"""Pseudospectral simulation and sharp-threshold classification for the
focusing L2-supercritical fractional NLS ``i u_t - (-Delta)^s u + |u|^(p-1) u = 0``."""

from .diagnostics import (
    DiagnosticsRecord,
    Monitor,
    VirialConfig,
    conservation_drift,
    detect_outcome,
    localized_virial,
    resolvent_field,
    resolvent_identity_check,
    strichartz_accumulate,
    virial_rate,
)
from .evolution import EvolutionOptions, EvolutionState, HaltReason, evolve, linear_half_step, nonlinear_step, strang_step
from .ground_state import GroundState, gn_constant, gn_ratio, pohozaev_report, solve_ground_state
from .params import (
    GaussianData,
    PhysParams,
    Verdict,
    classify,
    coercivity_gap,
    critical_exponents,
    energy,
    invariant_products,
    invariant_set_f,
    is_admissible,
    mass,
    scaling_map,
)
from .spectral import Grid, fractional_laplacian, make_grid, norm_l2, norm_lp, seminorm_hs

__version__ = "0.1.0"
