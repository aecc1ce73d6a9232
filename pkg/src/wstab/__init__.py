"""Finite metric spaces, their 2-Wasserstein spaces, and certified
Gromov-Hausdorff approximations between them (plain, relative and
equivariant), with lifts of approximations to finite Wasserstein nets."""

from .equivariant import (
    EquivariantApprox,
    RelativeEquivariantApprox,
    almost_inverse_check,
    certify_equivariant,
    certify_relative_equivariant,
    fit_group_maps,
    lift_equivariant,
    pushforward_group,
)
from .errors import WstabError
from .experiments import ScenarioSpec, run_equivariant_scenario, run_scenario
from .gh import (
    ApproxCertificate,
    Correspondence,
    PointMap,
    best_approx_search,
    certify,
    distortion,
    gh_distance_bruteforce,
    surjectivity_defect,
)
from .lift import (
    P2Net,
    build_p2_net,
    dirac_embedding_check,
    epsilon_tilde,
    lift_approximation,
    lift_preserves_diracs_check,
    net_density,
)
from .metric import (
    FiniteMetricSpace,
    IsometryGroup,
    MetricPair,
    diameter,
    enumerate_isometries,
    hausdorff_distance,
    uniform_group_distance,
    validate_metric,
)
from .pairs import derive_subset_approx, glue_pair_approx
from .transport import Coupling, DiscreteMeasure, dirac, pushforward, wp_distance

__version__ = "0.1.0"
