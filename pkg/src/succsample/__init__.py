"""Approximate k-median clustering by successive sampling."""

from .blackbox import (
    BruteForceSolver,
    LocalSearchParams,
    LocalSearchSolver,
    brute_force_kmedian,
    local_search,
    local_search_kmedian,
)
from .errors import (
    DegenerateInstanceError,
    InfeasibleKError,
    InputFormatError,
    InvalidConfigurationError,
    KMedianError,
    MetricValidationError,
    OracleTooLargeError,
    UnsupportedMetricError,
    ValidationError,
)
from .generators import generate
from .io import parse_input
from .lloyd import lloyd_refine, snap_to_points
from .metric import (
    Assignment,
    Configuration,
    DistanceOracle,
    Instance,
    assign_nearest,
    cost_assignment,
    cost_config,
    nearest,
    validate_metric,
)
from .pipeline import (
    ContractedInstance,
    PipelineReport,
    ReportRecord,
    contract,
    induced_assignment,
    kmedian,
    uniform_kmedian,
    weight_classes,
    weighted_kmedian,
)
from .sampler import (
    SampledAssignment,
    SamplerParams,
    SamplerTrace,
    assignment_weights,
    carve_radius,
    successive_sample,
    weighted_sample_with_replacement,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BruteForceSolver",
    "Configuration",
    "ContractedInstance",
    "DegenerateInstanceError",
    "DistanceOracle",
    "InfeasibleKError",
    "InputFormatError",
    "Instance",
    "InvalidConfigurationError",
    "KMedianError",
    "LocalSearchParams",
    "LocalSearchSolver",
    "MetricValidationError",
    "OracleTooLargeError",
    "PipelineReport",
    "ReportRecord",
    "SampledAssignment",
    "SamplerParams",
    "SamplerTrace",
    "UnsupportedMetricError",
    "ValidationError",
    "assign_nearest",
    "assignment_weights",
    "brute_force_kmedian",
    "carve_radius",
    "contract",
    "cost_assignment",
    "cost_config",
    "generate",
    "induced_assignment",
    "kmedian",
    "local_search",
    "local_search_kmedian",
    "lloyd_refine",
    "nearest",
    "parse_input",
    "snap_to_points",
    "successive_sample",
    "uniform_kmedian",
    "validate_metric",
    "weight_classes",
    "weighted_kmedian",
    "weighted_sample_with_replacement",
]
