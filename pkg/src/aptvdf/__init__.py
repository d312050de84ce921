"""Variable digital filtering with fixed-point analysis and reconfiguration cost models."""
from aptvdf._kernels import BACKEND
from aptvdf.filter_core import (
    AptVdfFilter,
    FilterMode,
    FrequencyResponse,
    FrequencySpec,
    PrototypeFilter,
    build_filter,
    compute_alpha,
    design_prototype,
    frequency_response,
    load_coefficients,
    process_block,
    warp_frequency,
)

__version__ = "0.1.0"
