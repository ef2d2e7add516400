"""Sampling, empirical graphons and cut metrics for graphex processes."""

__version__ = "0.1.0"

from .core import (
    CapExceededError,
    Graphex,
    GraphexError,
    LabelledGraph,
    RectangleUnion,
    StepFunction,
    StepGraphon,
    StepKernel,
    UnlabelledGraph,
    ValidationError,
    ValidationReport,
    check_graphex,
    forget_labels,
    from_adjacency_measure,
    relabel,
    restrict,
    to_adjacency_measure,
    validate_graphex,
)
from .sampler import (
    PoissonConfiguration,
    SampleConfig,
    sample_graphs,
    sample_jump_chain,
    sample_labelled,
    sample_unlabelled,
    subsample_bernoulli,
    subsample_coupled,
    subsample_poisson,
)
from .empirical import empirical_graphon, normalizing_stretch, stretch_graphex, stretch_graphon
from .metrics import (
    SearchBudget,
    cut_distance,
    cut_distance_stretched,
    cut_norm,
    l1_distance,
    l1_norm,
    truncate,
)

__all__ = [
    "__version__",
    "CapExceededError",
    "Graphex",
    "GraphexError",
    "LabelledGraph",
    "RectangleUnion",
    "StepFunction",
    "StepGraphon",
    "StepKernel",
    "UnlabelledGraph",
    "ValidationError",
    "ValidationReport",
    "check_graphex",
    "forget_labels",
    "from_adjacency_measure",
    "relabel",
    "restrict",
    "to_adjacency_measure",
    "validate_graphex",
    "PoissonConfiguration",
    "SampleConfig",
    "sample_graphs",
    "sample_jump_chain",
    "sample_labelled",
    "sample_unlabelled",
    "subsample_bernoulli",
    "subsample_coupled",
    "subsample_poisson",
    "SearchBudget",
    "cut_distance",
    "cut_distance_stretched",
    "cut_norm",
    "l1_distance",
    "l1_norm",
    "truncate",
    "empirical_graphon",
    "normalizing_stretch",
    "stretch_graphex",
    "stretch_graphon",
]
