"""Measure and dimension laws for limsup sets of number-theoretic resonant systems.

The package classifies the Lebesgue measure, generalized Hausdorff measure
and critical exponent of limsup sets built from enumerable resonant families
(rational points, prime-restricted rationals, algebraic numbers of bounded
degree, rational points on the circle, rational lines in the square),
verifies the locating hypotheses behind those classifications empirically,
and constructs audited nested-ball subsets carrying a mass distribution.
"""

from .errors import (
    ConstructionError,
    DomainError,
    InfeasibleError,
    LimsupBranchError,
    LimsupLabError,
    ParseError,
    ResourceCapError,
)
from .funcs import (
    ExtendedLogPower,
    GeometricSequence,
    GClass,
    RegularityReport,
    SeriesClass,
    SeriesVerdict,
    classify_series,
    compose_f_psi,
    condense_over_u,
    is_u_regular,
    limsup_G,
    parse_literal,
)
from .geometry import Ball, IntervalUnion, Strip, StripUnion, greedy_3r_cover, mdp_lower_bound, region_measure
from .laws import Hausdorff, Lebesgue, Verdict, classify, critical_dimension, hausdorff_verdict, lebesgue_verdict, natural_cover_sum
from .regions import build_delta
from .systems import (
    ResonantElement,
    ResonantSystem,
    algebraic,
    circle,
    count_in_ball,
    enumerate_window,
    lines21,
    make_system,
    natural_cover_count,
    prime_rationals,
    rationals,
)
from .ubiquity import (
    build_A_sets,
    quasi_independence_table,
    verify_intersection_conditions,
    verify_local_ubiquity,
    verify_quasi_independence,
)
from .cantor import audit_mass, assign_mass, build_levels, plan_construction, verify_tree

__version__ = "0.1.0"
