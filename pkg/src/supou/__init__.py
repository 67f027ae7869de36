"""Cumulant and moment growth of aggregated Ornstein-Uhlenbeck superpositions.

The library computes exact time-indexed cumulants of the integrated and
partial-sum aggregates of a stationary OU superposition, fits their scaling
exponents, and validates both against exact Monte Carlo simulation. An HTTP
service and a CLI wrap the same pipelines.
"""

from .bell import cumulants_from_moments, moments_from_cumulants, partial_bell
from .engine import (AggregateKind, CumulantTable, a_coeff, aggregate_cumulant,
                     cumulant_table, integrated_factor, partial_sum_factor)
from .errors import (ComputationError, ConfigurationError, DomainError,
                     QuadratureError, SupouError, UnsupportedOperationError)
from .marginal import (CompoundPoissonDriven, DeterministicJumps,
                       ExponentialJumps, GammaLaw, Gaussian, InverseGaussian,
                       MarginalLaw, NIG)
from .mixing import (Degenerate, DensityMixing, Discrete, GammaMixing,
                     MittagLefflerMixing, MixingMeasure, discrete_power_law,
                     mittag_leffler, mittag_leffler_correlation)
from .scaling import (ScalingFit, convexity_check, fit_sigma, fit_tau,
                      intermittency_test, q_star, theoretical_tau)
from .simulate import (CompoundPoissonBDLP, PathEnsemble, SimConfig,
                       aggregate_path, empirical_autocorrelation,
                       empirical_cumulants, empirical_moments,
                       ou_component_path, replica_rng, superposition_path)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
