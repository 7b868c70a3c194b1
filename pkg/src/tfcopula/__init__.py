"""Transformed bivariate copulas built from a base copula and two increasing maps."""

from tfcopula.core import Copula, GridCheckReport, ParameterError, check_copula
from tfcopula.families import (
    FGM,
    Clayton,
    CuadrasAuge,
    Frank,
    FrechetLower,
    FrechetUpper,
    Gumbel,
    Independence,
    make_family,
)
from tfcopula.generators import GeneratorPair, MonotoneMap, map_from_descriptor, preset_pair
from tfcopula.transform import TransformedCopula, ValidationError, build, singular_mass
from tfcopula.sampling import SampleBatch, sample

__version__ = "0.1.0"

__all__ = [
    "Copula", "GridCheckReport", "ParameterError", "check_copula",
    "FGM", "Clayton", "CuadrasAuge", "Frank", "FrechetLower", "FrechetUpper", "Gumbel",
    "Independence", "make_family",
    "GeneratorPair", "MonotoneMap", "map_from_descriptor", "preset_pair",
    "TransformedCopula", "ValidationError", "build", "singular_mass",
    "SampleBatch", "sample",
]
