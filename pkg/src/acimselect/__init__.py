"""Selections of multivalued interval maps that preserve prescribed invariant measures."""

from .errors import AcimError
from .interval_maps import (
    Affine,
    Branch,
    Envelope,
    Interval,
    MonotoneClosure,
    PiecewiseMonotoneMap,
    Quadratic,
    conjugate,
    validate_envelope,
)
from .measures import (
    ConvexMix,
    DistributionFunction,
    PiecewiseCDF,
    PiecewiseConstantDensity,
    cdf_from_density,
    identity_cdf,
    ks_distance,
    markov_invariant_density,
    ulam_approximation,
)
from .randmaps import (
    ProbabilityWeighting,
    RandomMap,
    bgr_probabilities,
    evaluate_constant_weight_claim,
    simulate_orbit,
    tau21,
    two_valued_selection_search,
    verify_cex_infeasibility,
)
from .selection import (
    construct_conjugacy_selection,
    construct_selection,
    construct_tentlike,
    symmetric_slope_solver,
)
from .transfer import InvarianceReport, check_invariance, fp_apply, fp_apply_random

__version__ = "0.1.0"
