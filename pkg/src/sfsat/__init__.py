"""Scale-free random k-SAT: generation, exact solvers, occurrence analysis and threshold theory."""

__version__ = "0.1.0"

from .analysis import (
    FitResult,
    NormalizedProfile,
    OccurrenceStats,
    criterion_literals,
    criterion_variables,
    empirical_profile,
    fit_beta,
    fit_delta_tail,
    moment_ratio,
    occurrence_counts,
)
from .formula import DimacsError, Formula, parse_dimacs, read_dimacs, write_dimacs
from .generator import GeneratorParams, generate_formula
from .harness import CrossingResult, SolverSpec, SweepResult, SweepSpec, find_crossing, fit_scaling_exponent, run_sweep
from .sampler import harmonic, power_law, rejection_probability, sample_variable, sample_variable_approx, zeta
from .solver import SatResult, Status, core_restricted_status, find_implied_set, solve_2sat, solve_dpll
from .theory import ThresholdReport, build_report, threshold_2sat

__all__ = [name for name in dir() if not name.startswith("_")]
