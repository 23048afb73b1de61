"""Numerical laboratory for partially hyperbolic skew products over Anosov
torus automorphisms: system constructors, center Lyapunov exponents,
unstable-disk (Cesaro) measures, physical-measure census, invariant-foliation
holonomies, leaf-space dynamics, and a deterministic experiment harness.
"""

__version__ = "0.1.0"

from .circle import circle_dist, mod1, torus_dist, wrap_half
from .phase_maps import (AnosovBase, BasePoint, CylinderSystem, FiberFamily,
                         HyperbolicityReport, NonConvergenceError, PhasePoint,
                         SystemSpec, ValidationError, apply, apply_inverse,
                         center_derivative, coupled_fiber, identity_fiber,
                         jacobian, make_anosov_base, make_cat_base,
                         make_cylinder, make_system, morse_smale_fiber,
                         rotation_fiber, validate_partial_hyperbolicity)
from .ergodic_stats import (ContractionCheckReport, ExponentEstimate,
                            HyperbolicTimesRecord, MostlyContractingResult,
                            Observable, ObservableSet, birkhoff_average,
                            base_cell_observable, center_log_derivatives,
                            center_lyapunov_measure, center_lyapunov_orbit,
                            constant_observable, contraction_time_densities,
                            default_observables, ensemble_stats,
                            fourier_theta_observable, hyperbolic_times,
                            mostly_contracting_test, orbit_arrays,
                            uniform_sampler,
                            verify_contraction_at_hyperbolic_times)
from .ustates import (BirkhoffSignature, ClusterInfo, CsBlock,
                      EmpiricalMeasure, MeasureCensus, RecurrenceResult,
                      Regime, SweepResult, SweepRow, UDisk, block_recurrence,
                      cesaro_ustate, classify_regime, grid_initial_points,
                      iterate_udisk, make_udisk, physical_measure_census,
                      stability_sweep, unstable_density_ratio)
from .foliation_lab import (AtomicityResult, HolonomyMap, SingularityReport,
                            SuLoopResult, TransversalityReport,
                            atomicity_test, cylinder_center_holonomy,
                            cylinder_conjugacy_residual,
                            cylinder_jacobian_drift,
                            holonomy_singularity_report, stable_holonomy,
                            su_loop_holonomy, transverse_intersection_check,
                            unstable_holonomy)
from .leafspace import (AttractorReport, LeafPoint, attractor_report,
                        bracket, dc_distance, periodic_base_points)
from .parallel import derive_rng
