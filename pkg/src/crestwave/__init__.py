"""crestwave: conformal-coordinate water waves with singular crests.

Construct interfaces with angled crests or cusps as conformal images of
the lower half-plane, mollify them into smooth initial data, evolve the
gravity system, and measure the quantities whose boundedness or
invariance the evolution is supposed to preserve.
"""

from .field import (
    BoundaryField,
    BoundaryLimit,
    Grid,
    HalfPlanePoint,
    boundary_limit,
    depth_ladder,
    hilbert,
    holo_derivative,
    holomorphic_projection,
    poisson_extend,
    sobolev_half_seminorm,
    spectral_derivative,
    workspace,
)
from .geometry import (
    BoundaryFrame,
    ConformalMap,
    GeometryRejection,
    InadmissibleGeometry,
    SingularPoint,
    VelocityProfile,
    boundary_frame,
    build_bump_map,
    build_corner_map,
    build_cusp_map,
    build_flat_map,
    build_multi_corner_map,
    chord_arc_constant,
    cusp_separation_bound,
    cusp_log_residual,
    injectivity_certificate,
    interior_gradient_mass,
    one_sided_angle,
    singular_exponent_fit,
    validate_jordan,
    velocity_sup_norms,
    vertical_ray,
)
from .dynamics import (
    BlowupError,
    MONITOR_NAMES,
    StepDiagnostics,
    StepRejected,
    Trajectory,
    WaveState,
    advance_markers,
    compute_A1,
    compute_b,
    compute_ztt_bar,
    default_markers,
    measure_monitors,
    mollify_initial,
    run,
    step_rk4,
)
from .diagnostics import (
    ENERGY_TERMS,
    PressureField,
    acceleration_consistency,
    aitken,
    angle_rigidity,
    blowup_certificate,
    crest_angle_drift,
    cusp_evolution_check,
    energy_boundary,
    energy_interior,
    gauge_identity,
    gradient_sup_ladder,
    modal_gradient_check,
    pressure_laplacian_check,
    singular_set_track,
    tangent_vanishing,
    tip_acceleration,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
