"""Numerical toolkit for the stochastic-optimal-control route to the
Dirac equation: exact gamma-matrix algebra, the second-order proper-time
operator and its first-order factorization, plane-wave dispersion and
mode evolution, the optimal control law, and the complex controlled
diffusion -- each with machine-checkable identities.
"""

from .clifford import DIRAC, METRIC_DIAG, GammaSet, Metric, mdot, raise_index
from .constants import NATURAL, PhysicalConstants
from .emfield import (PotentialSpec, constant_electric, constant_magnetic,
                      constant_potential, custom_polynomial, custom_wave,
                      em_plane_wave, evaluate_potential, field_strength, free,
                      lorenz_residual, spin_coupling_matrix)
from .grid import (Field, ScalarField, SpacetimeGrid, SpinorField, dalembertian,
                   field_to_csv, l2norm, partial, plane_wave, random_band_limited)
from .operators import (build_spinor, conjugate_apply, dirac_apply, dirac_plane_wave,
                        factored_rhs, factorization_discrepancy, fock_rhs,
                        gauge_discrepancy_prediction, kg_residual_componentwise,
                        legacy_factored_rhs)
from .soc import (ControlField, DiffusionCoefficients, EnsembleParams,
                  TrajectoryEnsemble, accumulate_action, constant_control,
                  generator_check, hjb_residual, hjb_residual_mode, hopf_cole_check,
                  hopf_cole_exponential_error, make_diffusion, optimal_control,
                  run_generator_battery,
                  optimal_control_mode, simulate, standard_test_battery,
                  weak_condition_residual, zero_control, zero_diffusion)
from .spectrum import (FourMomentum, ModeState, delta_sweep, dispersion_solve,
                       fit_mode_frequency, legacy_mode_condition, matrix_nullspace,
                       mode_phase_factor, nullspace_spinors, propertime_evolve)

__version__ = "0.1.0"
