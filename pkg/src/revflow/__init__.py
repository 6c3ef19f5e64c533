"""Volume-preserving mean curvature flow of revolution graphs in
rotationally symmetric ambient spaces: simulator, a-priori bounds, and
CMC equilibrium oracles."""

from .ambient import (
    AmbientSpace,
    SectionalCurvatures,
    ValidationReport,
    custom_space,
    make_preset,
    sectional_curvatures,
    space_from_expressions,
    validate_space,
)
from .bounds import (
    BoundsReport,
    beta,
    compute_bounds,
    delta,
    invert_increasing,
    unit_sphere_area,
)
from .cmc import (
    CMCDistance,
    CMCProfile,
    ShootingError,
    cylinder_for_volume,
    distance_to_cmc,
    shoot_cmc,
)
from .expressions import ExpressionError, compile_expression
from .flow import (
    DiagnosticsRecord,
    FlowConfig,
    FlowState,
    FlowStopped,
    RunResult,
    StopReason,
    StopTag,
    rhs,
    run,
    step,
)
from .hypersurface import (
    CurvatureField,
    MeanCurvatureSplit,
    ProfileGrid,
    averaged_mean_curvature,
    critical_point_count,
    critical_points,
    curvature_field,
    curve_length,
    enclosed_volume,
    lateral_area,
    load_profile_csv,
    save_profile_csv,
    spatial_derivatives,
)

__version__ = "0.1.0"
