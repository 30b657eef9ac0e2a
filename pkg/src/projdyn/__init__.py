"""Random walks, limit sets and torus orbits of matrix semigroups."""

from .exceptions import (
    BadModulus,
    BudgetExceeded,
    DegenerateSpectrum,
    EmptyApprox,
    EmptyShell,
    GeneratorFileError,
    InsufficientScales,
    InvalidConfig,
    NoApproach,
    NotProximal,
    NumericalFailure,
    PrecisionExceeded,
    ProjdynError,
    SearchFailed,
    ZeroVector,
)
from .matrix import (
    EigenInfo,
    KAKFactorization,
    Matrix,
    ProjectivePoint,
    act,
    eigen_dominant,
    is_expanding,
    is_proximal,
    kak,
    proj_distance,
    project,
    spectral_radius,
)
from .semigroup import (
    GeneratorSet,
    HypothesisVerdict,
    Status,
    Word,
    check_H0,
    check_H1,
    check_H2,
    congruence_words,
    dual_orbit_unbounded,
    enumerate_words,
    escape_from_ball,
    gl_order,
    orbit_points,
)
from .limitset import (
    LimitSetApprox,
    Spectrum,
    aperiodicity_gap,
    box_dimension,
    limit_set_approx,
    shell_hausdorff,
    shell_snapshot,
    spectrum,
)
from .walk import (
    EmpiricalMeasure,
    PcPoint,
    WalkConfig,
    cocycle_residual,
    contraction_curve,
    contraction_stat,
    dirac_concentration,
    lyapunov_top,
    norm_ratio_limit,
    run_chain,
    sample_letters,
    step_pc,
    walk_limitset_distance,
    wasserstein_angle,
)
from .torus import (
    CoverageGrid,
    OrbitReport,
    RationalTorusPoint,
    epsilon_escape_check,
    orbit_float,
    orbit_rational,
    rgs_witness,
    torus_norm,
)

__version__ = "0.1.0"
