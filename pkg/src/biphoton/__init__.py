"""Simulation of two-photon spectral interference experiments."""

__version__ = "0.1.0"

from .numerics import Axis, Grid2, GuardError  # noqa: E402
from .spectra import (  # noqa: E402
    JointSpectralAmplitude,
    ModeOverlapWarning,
    comb_jsa,
    custom_jsa,
    gaussian_jsa,
    marginal,
    schmidt_analysis,
    to_temporal,
)
from .twofold import (  # noqa: E402
    InterferencePattern,
    NyquistError,
    franson_pattern,
    hom_pattern,
    hom_pattern_temporal,
    noon_pattern,
)

__all__ = [
    "__version__",
    "Axis",
    "Grid2",
    "GuardError",
    "JointSpectralAmplitude",
    "ModeOverlapWarning",
    "comb_jsa",
    "custom_jsa",
    "gaussian_jsa",
    "marginal",
    "schmidt_analysis",
    "to_temporal",
    "InterferencePattern",
    "NyquistError",
    "franson_pattern",
    "hom_pattern",
    "hom_pattern_temporal",
    "noon_pattern",
]
