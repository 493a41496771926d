"""Fourier analysis, Gowers norms, nilsequences and density increments on Z/MZ."""

from .progressions import count_aps_cyclic, find_3ap, lambda3_via_fourier, lambda_k
from .ring import CyclicFunction, Indicator, Spectrum, dft, e, e_M, inverse_dft
from .uniformity import gowers_norm, gowers_norm_interval

__all__ = [
    "CyclicFunction",
    "Indicator",
    "Spectrum",
    "count_aps_cyclic",
    "dft",
    "e",
    "e_M",
    "find_3ap",
    "gowers_norm",
    "gowers_norm_interval",
    "inverse_dft",
    "lambda3_via_fourier",
    "lambda_k",
]
