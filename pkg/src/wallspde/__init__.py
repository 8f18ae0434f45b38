"""Numerical laboratory for stochastic heat equations confined between two
reflecting walls, with singular repelling drifts at both walls.

The package builds the solution theory constructively and keeps every layer
testable on its own:

  grids         space-time lattices (circle / Dirichlet interval) and
                counter-keyed reproducible noise streams
  kernels       heat kernels, quadratures, and kernel power integrals
  walls         wall-pair registry, CSV loading, admissibility checks
  obstacle      deterministic two-wall obstacle solves (projection and
                penalization backends), contraction and schedule diagnostics
  coefficients  registry of drift/noise coefficient handles
  integrators   stochastic steppers (reflected, clipped, single-wall),
                constructive fixed-point solver, weak-form residual,
                block-restart envelope study
  hitting       wall-contact detection and Monte Carlo hitting estimates
  output        deterministic CSV/JSON writers
  cli           batch front-end (`wallspde <subcommand>`)
"""

from .errors import (WallspdeError, ConfigurationError, DomainError,
                     SingularityError, DivergenceError, ResolutionError)
from .grids import (Grid, NoiseStream, make_grid, circle_distance,
                    derive_stream, sample_noise_field, CIRCLE, INTERVAL)
from .kernels import (KernelConfig, DEFAULT_KERNEL_CONFIG, gauss_kernel,
                      circle_green, dirichlet_green, kernel_matrix,
                      heat_convolve, heat_propagate, green_power_integral)
from .walls import (WallPair, WallCheck, WallReport, make_walls,
                    wall_registry, validate_walls, load_walls_csv,
                    save_walls_csv)
from .obstacle import (SingularDriftSpec, ReflectionLedger, ObstacleSolution,
                       ContractionResult, regularized_drift, clipped_drift,
                       solve_reflected_pde, solve_penalized, solve_obstacle,
                       geometric_schedule, complementarity_residual,
                       contraction_check)
from .coefficients import (CoefficientSpec, make_coefficient,
                           coefficient_registry, verify_chi_lower_bound)
from .integrators import (SolutionPath, PicardState, EnvelopeReport,
                          effective_drift_spec, step_reflected,
                          simulate_reflected, simulate_clipped,
                          simulate_single_wall, picard_solve,
                          make_test_function, weak_form_residual,
                          simulate_restart_envelope)
from .hitting import (HittingRecord, HittingRow, HittingTable, TrendVerdict,
                      WILSON_Z, HITTING_CSV_HEADER, wilson_interval,
                      min_gap_series, detect_contact,
                      estimate_hitting_probability, exponent_sweep,
                      monotone_trend_verdict)
from .output import (config_hash, save_trajectory_csv, save_gaps_csv,
                     save_obstacle_csv, save_ledger_csv, write_summary_json)

__version__ = "0.1.0"
