"""Spectral Galerkin solvers and structural-condition checking for
nonlinear evolution equations u' = A(t, u) + b on Gelfand triples.

The package is organised around five layers:

* :mod:`nlevo.spaces` — H-orthonormal spectral bases (Dirichlet sine,
  torus Fourier, divergence-free vector fields) with exact quadrature and
  the H/V/V* norm triple.
* :mod:`nlevo.inequalities` — certified elementary inequalities (Young
  splits, Ladyzhenskaya bounds, Gronwall envelopes) reporting their slack.
* :mod:`nlevo.operators` — the evolution-problem record, its structural
  trait constants, and samplers/checkers for hemicontinuity, local
  monotonicity, coercivity, growth, and the uniqueness growth envelope.
* :mod:`nlevo.catalog` — named ready-to-run problems with calibrated
  trait constants.
* :mod:`nlevo.solver` — fixed/adaptive semi-implicit and implicit-midpoint
  integrators plus the energy-ledger, weak-residual, mesh-convergence, and
  two-solution dependence monitors.

The ``nlevo`` console script (see :mod:`nlevo.cli`) drives batch runs from
TOML configs and compares their CSV artifacts.
"""

from .errors import (ConfigurationError, NumericalFailureError,
                     UnsupportedNormError)
from .functions import ScalarFunction, parse_scalar_function, parse_time_profile
from .spaces import (Basis, Domain, Field, TripleNorms, build_fourier_basis,
                     build_sine_basis, build_sine_basis_2d, triple_norms)
from .inequalities import (SlackReport, gronwall_bound, interpolation_bound,
                           ladyzhenskaya_2d, ladyzhenskaya_3d, young_constant,
                           young_split)
from .operators import (ConditionReport, EvolutionProblem, FieldSampler,
                        OperatorTraits, TraitFunctional, TraitTerm, apply,
                        apply_chunked, check_coercivity, check_growth,
                        check_hemicontinuity, check_local_monotonicity,
                        check_uniqueness_growth, run_condition_battery)
from .catalog import (CATALOG_NAMES, AdvectionDiffusionParams, BurgersRDParams,
                      LerayAlphaParams, NSEParams, PLaplaceParams,
                      build_named, catalog_entry)
from .solver import (ConvergenceStudy, DependenceReport, EnergyLedger,
                     SolverConfig, Trajectory, convergence_study,
                     default_stepper, dependence_experiment, energy_monitor,
                     solve, weak_residual)
from .cli import compare_runs, parse_config, run

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "NumericalFailureError", "UnsupportedNormError",
    "ScalarFunction", "parse_scalar_function", "parse_time_profile",
    "Basis", "Domain", "Field", "TripleNorms", "build_fourier_basis",
    "build_sine_basis", "build_sine_basis_2d", "triple_norms",
    "SlackReport", "gronwall_bound", "interpolation_bound",
    "ladyzhenskaya_2d", "ladyzhenskaya_3d", "young_constant", "young_split",
    "ConditionReport", "EvolutionProblem", "FieldSampler", "OperatorTraits",
    "TraitFunctional", "TraitTerm", "apply", "apply_chunked",
    "check_coercivity", "check_growth", "check_hemicontinuity",
    "check_local_monotonicity", "check_uniqueness_growth",
    "run_condition_battery",
    "CATALOG_NAMES", "AdvectionDiffusionParams", "BurgersRDParams",
    "LerayAlphaParams", "NSEParams", "PLaplaceParams", "build_named",
    "catalog_entry",
    "ConvergenceStudy", "DependenceReport", "EnergyLedger", "SolverConfig",
    "Trajectory", "convergence_study", "default_stepper",
    "dependence_experiment", "energy_monitor", "solve", "weak_residual",
    "compare_runs", "parse_config", "run",
    "__version__",
]
