"""Levy-Schrodinger equations: Levy generators, ground-state transforms and their processes."""

__version__ = "0.1.0"

from .cauchy_examples import ExampleSet, cauchy1, gaussian_oscillator, get_example, student3
from .dirichlet import (beurling_deny_extract, duality_suite, form_doob, form_levy,
                        invariance_residual)
from .doob import (GroundState, LevyTypeKernel, apply_hamiltonian, apply_levy_type_generator,
                   energy_from_decay, improper_state, levy_type_kernel, levy_type_kernel_eval,
                   potential_from_ground_state)
from .errors import (BlowUpError, LevySchrodingerError, PositivityError, QuadratureError,
                     ThinningBoundError, ValidationError)
from .evolution import EvolutionConfig, evolve, stationarity_residual
from .grid import Grid, GridFunction
from .levy_core import (GeneratingTriplet, LevyMeasure, cauchy_measure, cauchy_triplet,
                        gaussian_triplet, log_characteristic, spectral_symbol, validate_triplet)
from .sampler import (PathEnsemble, SamplerConfig, empirical_char_function,
                      empirical_invariant_distance, reversibility_statistic, sample_levy_path,
                      sample_levy_type_path)
from .spectral_ops import (apply_generator_quadrature, apply_generator_spectral, delta, delta2,
                           product_rule_residual)
