"""Certified lower bounds for integrals of polynomial-type functions on the line."""

from .realset import Interval, RealSet, k_epsilon, normalize, realset
from .measure import (
    AtomicMeasure,
    LengthResult,
    ProbMeasure,
    UniformMeasure,
    length_n_eps,
    mass,
    restrict,
)
from .peano import (
    NodeSet,
    PeanoKernel,
    Polynomial,
    divided_difference,
    kernel_identity_residual,
    peano_kernel,
    poly_sup,
    vandermonde,
)
from .children import (
    ChildrenDecomposition,
    EllEstimate,
    MCBudget,
    children_tree,
    decompose,
    ell_n,
)
from .bounds import (
    Certificate,
    PolyTypeWitness,
    close_gaps,
    corollary_interval,
    recenter_bound,
    theorem0_pipeline,
    theorem1_bound,
    theorem2_set,
)
from .oracle import (
    RatioProblem,
    RatioResult,
    certify_ratio,
    search_counterexample,
    validate_inequality,
)
from .refine2d import PlaneRegion, RefinementResult, refine, validate_intest

__all__ = [
    "AtomicMeasure",
    "Certificate",
    "ChildrenDecomposition",
    "EllEstimate",
    "Interval",
    "LengthResult",
    "MCBudget",
    "NodeSet",
    "PeanoKernel",
    "PlaneRegion",
    "PolyTypeWitness",
    "Polynomial",
    "ProbMeasure",
    "RatioProblem",
    "RatioResult",
    "RealSet",
    "RefinementResult",
    "UniformMeasure",
    "certify_ratio",
    "children_tree",
    "close_gaps",
    "corollary_interval",
    "decompose",
    "divided_difference",
    "ell_n",
    "k_epsilon",
    "kernel_identity_residual",
    "length_n_eps",
    "mass",
    "normalize",
    "peano_kernel",
    "poly_sup",
    "realset",
    "recenter_bound",
    "refine",
    "restrict",
    "search_counterexample",
    "theorem0_pipeline",
    "theorem1_bound",
    "theorem2_set",
    "validate_intest",
    "validate_inequality",
    "vandermonde",
]
