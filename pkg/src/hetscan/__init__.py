"""Spatial heterogeneity of grayscale images from horizontal and vertical unfoldings.

Each unfolding is summarized by per-level wavelet detail energies, a Morlet
scale profile and MFDFA generalized Hurst exponents with their singularity
spectrum; the two summaries are then compared.
"""

from .cwt import cwt_morlet, semilog_profile
from .dwt import denoise, dwt_forward, dwt_inverse, normalized_energy, wavelet
from .grid import ImageGrid, SpatialSeries, UnfoldDirection, load_pgm, serialize_pgm, unfold
from .mfdfa import MfdfaConfig, hurst_spectrum, profile, singularity_spectrum
from .report import AnalysisConfig, Thresholds, analyze_image, compare

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ImageGrid",
    "MfdfaConfig",
    "SpatialSeries",
    "Thresholds",
    "UnfoldDirection",
    "analyze_image",
    "compare",
    "cwt_morlet",
    "denoise",
    "dwt_forward",
    "dwt_inverse",
    "hurst_spectrum",
    "load_pgm",
    "normalized_energy",
    "profile",
    "semilog_profile",
    "serialize_pgm",
    "singularity_spectrum",
    "unfold",
    "wavelet",
]
