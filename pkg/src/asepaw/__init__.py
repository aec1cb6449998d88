"""Stationary measures of open ASEP through Askey–Wilson signed measures.

The same generating function is computed three ways: iterated integrals
against Askey–Wilson signed measures (:mod:`asepaw.multitime`), the USW
matrix product ansatz (:mod:`asepaw.usw`) and an exact generator solve
(:mod:`asepaw.oracle`).  :mod:`asepaw.asymptotics` holds the large-n limits.
"""

from .asepmap import (ASEPRates, BoundaryParams, PhaseName, Region, abcd_to_rates,
                      admissible_time, classify_phase, rates_to_abcd)
from .awmeasure import SignedMeasure, measure_build
from .awpoly import AWParams
from .errors import AsepAWError
from .multitime import marginal_measure, pin_integral, transition_measure
from .qcore import TruncationSpec
from .usw import gen_fn, partition, pi_n

__version__ = "0.1.0"

__all__ = [
    "ASEPRates", "BoundaryParams", "PhaseName", "Region", "abcd_to_rates", "admissible_time",
    "classify_phase", "rates_to_abcd", "SignedMeasure", "measure_build", "AWParams",
    "AsepAWError", "marginal_measure", "pin_integral", "transition_measure", "TruncationSpec",
    "gen_fn", "partition", "pi_n",
]
