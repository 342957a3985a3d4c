"""siftkit: decomposition of multicomponent nonstationary signals by adaptive
local iterative filtering guided by synchrosqueezed frequency estimates."""

from .alif import (
    ALIFConfig,
    BandwidthProfile,
    Decomposition,
    alif_decompose,
    alif_inner_loop,
    attenuation_error_bound,
    iterate_operator,
    kernel_row,
    moving_average,
    theoretical_attenuation,
)
from .bench import BenchmarkReport, ExperimentConfig, emit_report, run_benchmark
from .errors import (
    ConfigError,
    GridMismatchError,
    InvalidBandError,
    InvalidCurveError,
    InvalidProfileError,
    InvalidSpecError,
    InvalidWindowError,
    NoCurveError,
    SiftKitError,
    UndefinedErrorMetric,
    UndefinedSNRError,
)
from .presets import get_preset, preset_schema
from .ridge import ExtractionConfig, IFCurve, curve_objective, extract_curve
from .sift import (
    HighbandConfig,
    SIFTConfig,
    SIFTResult,
    highest_frequency_curve,
    profile_from_curve,
    sift_decompose,
    sift_tfr,
)
from .signals import (
    AHMSpec,
    Grid,
    IMTSpec,
    NoiseSpec,
    Signal,
    add_noise,
    count_extrema,
    relative_error_l2,
    snr_db,
    synthesize,
)
from .sst import (
    SSTConfig,
    TFRGrid,
    WindowSpec,
    bandpass_reconstruct,
    reconstruct_along_curve,
    stft,
    synchrosqueeze,
)

__version__ = "0.1.0"

__all__ = [
    "AHMSpec", "ALIFConfig", "BandwidthProfile", "BenchmarkReport", "ConfigError",
    "Decomposition", "ExperimentConfig", "ExtractionConfig", "Grid",
    "GridMismatchError", "HighbandConfig", "IFCurve", "IMTSpec",
    "InvalidBandError", "InvalidCurveError", "InvalidProfileError",
    "InvalidSpecError", "InvalidWindowError", "NoCurveError", "NoiseSpec",
    "SIFTConfig", "SIFTResult", "SSTConfig", "SiftKitError", "Signal", "TFRGrid",
    "UndefinedErrorMetric", "UndefinedSNRError", "WindowSpec", "add_noise",
    "alif_decompose", "alif_inner_loop", "attenuation_error_bound",
    "bandpass_reconstruct", "count_extrema", "curve_objective", "emit_report",
    "extract_curve", "get_preset", "highest_frequency_curve", "iterate_operator",
    "kernel_row", "moving_average", "preset_schema", "profile_from_curve",
    "reconstruct_along_curve", "relative_error_l2", "run_benchmark",
    "sift_decompose", "sift_tfr", "snr_db", "stft", "synchrosqueeze",
    "synthesize", "theoretical_attenuation",
]
