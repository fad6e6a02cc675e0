"""Convex integrands on the circle and sphere: convexity validation,
Morse stability, stabilization by dual translation, and the caustic /
symmetry-set / wave-front geometry of the inverted graph."""

__version__ = "0.1.0"

from .caustic_symmetry import (
    CausticSet,
    FrontSample,
    SymmetrySet,
    SymPair,
    caustic,
    hausdorff_distance,
    sym_via_fronts,
    symmetry_set,
    wave_front,
)
from .convexity import (
    ConvexityReport,
    DualBody,
    HullError,
    NotPositiveError,
    build_dual_body,
    dual_embedding,
    invert_graph,
    is_convex_integrand,
    validate_positive,
)
from .jsonio import (
    canonical_dumps,
    dump_function,
    function_from_json,
    function_to_json,
    load_function,
    sampled_from_json,
    sampled_to_json,
)
from .perturbation import (
    BoundaryDistance,
    PerturbationError,
    PerturbationResult,
    SquaredDistance,
    StabilizeError,
    distance_sq,
    perturb,
    recentered_direction,
    stabilize,
    translated_radial,
)
from .sphere_fn import (
    AffineImage,
    CriticalPoint,
    DomainError,
    IncompleteCensusError,
    RadialQuotient,
    Rotated,
    SampledFunction,
    SolverConfig,
    SphereFunction,
    SqrtFunction,
    circle_grid,
    critical_points,
    evaluate,
    fibonacci_grid,
    intrinsic_gradient,
    intrinsic_hessian,
    tangent_basis,
)
from .stability import (
    MorseReport,
    MorseVector,
    NotApplicableError,
    Prop4Report,
    StabilityConfig,
    StabilityVerdict,
    index_lemma_check,
    is_stable,
    morse_inequalities,
    prop4_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
