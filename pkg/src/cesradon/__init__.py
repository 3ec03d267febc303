"""cesradon: Radon and profit transforms over CES level surfaces.

Forward transforms of orthant measures, admissibility characterization
checks, and Mellin/Fourier inversion recovering a density from profit
samples.  See the README for the CLI and file formats.
"""

from .ces import PricePoint, ces_dot, ces_sum, level_bound, sublevel_indicator
from .errors import (
    BoundaryLeak,
    CesradonError,
    CharacterizationFailure,
    ConfigError,
    MethodUnavailable,
    NonConvergent,
    OutOfRange,
    PoleError,
    StripViolation,
    TailDivergence,
    TruncationWarning,
    UnboundedRegion,
)
from .grids import LogGrid
from .measures import (
    AtomicMeasure,
    Box,
    Callback,
    DensitySpec,
    Factor,
    GridSampled,
    MeasureModel,
    Separable,
    eval_density,
    measure_from_json,
    measure_to_json,
    total_mass,
    weighted_norms,
)
from .special import beta2, beta_multivariate, log_gamma

__version__ = "0.1.0"

__all__ = [
    "PricePoint",
    "ces_dot",
    "ces_sum",
    "level_bound",
    "sublevel_indicator",
    "LogGrid",
    "AtomicMeasure",
    "Box",
    "Callback",
    "DensitySpec",
    "Factor",
    "GridSampled",
    "MeasureModel",
    "Separable",
    "eval_density",
    "measure_from_json",
    "measure_to_json",
    "total_mass",
    "weighted_norms",
    "log_gamma",
    "beta_multivariate",
    "beta2",
    "CesradonError",
    "ConfigError",
    "OutOfRange",
    "PoleError",
    "NonConvergent",
    "UnboundedRegion",
    "StripViolation",
    "BoundaryLeak",
    "TailDivergence",
    "MethodUnavailable",
    "CharacterizationFailure",
    "TruncationWarning",
    "__version__",
]
