"""Frame bounds and Parseval tightening of strided convolutional filterbanks via aliasing terms."""

__version__ = "0.1.0"

from .core import Filterbank, analysis, analysis_matrix, frame_operator_apply, synthesis
from .errors import FrameAliasError
from .stability import (FrameBounds, bounds_kernel_aware, bounds_walnut, optimal_bounds,
                        tightness_report)
from .walnut import aliasing_terms, assemble_shat

__all__ = [
    "Filterbank", "FrameAliasError", "FrameBounds", "aliasing_terms", "analysis",
    "analysis_matrix", "assemble_shat", "bounds_kernel_aware", "bounds_walnut",
    "frame_operator_apply", "optimal_bounds", "synthesis", "tightness_report",
]
