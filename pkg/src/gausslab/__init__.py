"""Gaussian-measure local fractional maximal and integral operators on grids."""

from .errors import (AlphaOutOfRange, ConfigError, DegenerateWeight, EmptyFamily, GausslabError,
                     InvalidExponents, ParseError)
from .geometry import (AdmissibleEnum, Cube, DyadicCube, containing_dyadic, enumerate_admissible_cubes,
                       gaussian_measure, is_admissible, m_value, tilted_measure, vitali_select)
from .grid import GridFunction
from .operators import (ExponentParams, MaximalField, brute_force_maximal, fractional_integral_field,
                        maximal_field, welland_check)
from .weights import (ConstantResult, WeightPair, WeightSpec, counterexample_family, parse_weight,
                      partition_points, radial_transform, sawyer_constant, weight_constant)
from .verify import (CheckResult, TestBattery, VerificationReport, divergence_scan, levelset_decomposition,
                     monotonicity_check, norm_ratio)
from .checks import run_suite

__version__ = "0.1.0"
