"""Exact Monte Carlo laboratory for tagged particles in tree exclusion processes."""

from .cayley_tree import (
    ROOT,
    InvalidGeneratorError,
    Vertex,
    VertexFormatError,
    add,
    ball_words,
    busemann,
    distance,
    horo_increment,
    invert,
    parse_vertex,
    reduce_word,
    render_vertex,
    sphere,
    sphere_size,
)
from .kernel import (
    KernelValidationError,
    ModelParams,
    RateKernel,
    simple_exclusion_kernel,
    speed,
    total_rate_per_site,
)
from .graphical_sim import (
    LazyConfiguration,
    SimParams,
    Simulation,
    TrajectorySample,
    TruncationBreachError,
    default_ball_radius,
    default_safety_margin,
    run,
    sample_palm_config,
)
from .environment import (
    EnvironmentView,
    InsufficientRadiusError,
    centered_drift,
    environment_view,
    local_drift,
    stationarity_check,
    tagged_view,
)

__version__ = "0.1.0"

__all__ = [
    "ROOT",
    "InvalidGeneratorError",
    "Vertex",
    "VertexFormatError",
    "add",
    "ball_words",
    "busemann",
    "distance",
    "horo_increment",
    "invert",
    "parse_vertex",
    "reduce_word",
    "render_vertex",
    "sphere",
    "sphere_size",
    "KernelValidationError",
    "ModelParams",
    "RateKernel",
    "simple_exclusion_kernel",
    "speed",
    "total_rate_per_site",
    "LazyConfiguration",
    "SimParams",
    "Simulation",
    "TrajectorySample",
    "TruncationBreachError",
    "default_ball_radius",
    "default_safety_margin",
    "run",
    "sample_palm_config",
    "EnvironmentView",
    "InsufficientRadiusError",
    "centered_drift",
    "environment_view",
    "local_drift",
    "stationarity_check",
    "tagged_view",
    "__version__",
]
