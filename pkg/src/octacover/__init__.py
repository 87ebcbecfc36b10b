"""Exact verification and search toolkit for octahedron coverings of 3-space.

The package proves, on an exact rational track, the chain of facts
behind the lower bound 1 + 4/6^10 for the translative covering density
of the regular octahedron, and complements it with a simulated-annealing
search for thin coverings of the fundamental cell.
"""

from .bodies import (
    CheckResult,
    DuplicateTranslate,
    LatticeBasis,
    TranslateSet,
    covering_lattice_nine_eighths,
    lattice_points_near,
    neighbor_lemma_check,
    neighbor_set,
    octahedron,
    octahedron_at,
    parallelohedron_p,
    verify_basic_facts,
    verify_lattice_covering_exact,
    voronoi_cell,
)
from .covering import (
    CASE1_FLOOR,
    THETA_FLOOR,
    CoverageCertificate,
    CoverageGrid,
    DensityReport,
    ExcessReport,
    NoOriginTranslate,
    NonPositiveStep,
    NotACovering,
    PairCertificate,
    certify_covering,
    density,
    localization_bound,
    multiplicity_excess,
    pairwise_overlap_sum,
    scaled_cell,
    theorem_report,
)
from .overlap import (
    PAIR_FLOOR,
    NotOverlapping,
    OverlapConfig,
    PairBound,
    classify,
    config_lower_bound,
    exact_pair_volume,
    slice_intersection_area,
)
from .polytope import (
    EMPTY,
    DegenerateInput,
    GeometryError,
    HalfSpace,
    LowerDimensional,
    NonPositiveScale,
    Polytope3,
    Unbounded,
    affine,
    contains_polytope,
    difference_body,
    halfspace,
    halfspace_intersection,
    hull_from_vertices,
    intersect,
    minkowski_sum,
    monte_carlo_volume,
    volume_of,
)
from .ratmath import FLOAT_TOL, Rat, rat, rat_str, vec3
from .search import (
    InitialNotCovering,
    LatticeDensityReport,
    SearchParams,
    SearchTrace,
    lattice_density,
    lattice_start,
    minimize_density,
)
from .slices import (
    T_MAX,
    T_MIN,
    HeightMismatch,
    HeightWindow,
    NoFeasibleHeight,
    SliceSquare,
    bad_height_set,
    delta_product,
    find_good_height,
    slice_at,
)

__version__ = "1.0.0"
