"""Depth discretization (UD/SID), monocular depth metrics and a manifest-driven evaluation harness."""

__version__ = "0.1.0"

from .discretization import (
    IGNORE,
    DiscretizationScheme,
    Mode,
    boundaries,
    dequantize,
    dequantize_map,
    quantize,
    quantize_map,
    representatives,
)
from .depthio import CropKind, CropSpec, DepthMap, apply_crop, colorize, load_depth_u16, save_depth_u16
from .errors import (
    ConfigurationError,
    DataError,
    DepthBenchError,
    DomainError,
    EvaluationError,
    FormatError,
)
from .metrics import (
    Aggregation,
    MaskPolicy,
    MetricReport,
    aggregate,
    compute_metrics,
    delta_accuracy,
    format_table_row,
)
