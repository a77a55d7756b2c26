"""Coded caching for combination networks built from combinatorial
placement delivery arrays (CPDAs)."""

from .constructions import DirectParams, direct_cpda, hybrid_cpda, mn_pda
from .pda import PdaArray, find_useless_stars, verify_cpda, verify_pda
from .schemes import scheme_a_params, scheme_b_params, zy_params

__version__ = "0.1.0"

__all__ = [
    "DirectParams",
    "PdaArray",
    "direct_cpda",
    "find_useless_stars",
    "hybrid_cpda",
    "mn_pda",
    "scheme_a_params",
    "scheme_b_params",
    "verify_cpda",
    "verify_pda",
    "zy_params",
]
