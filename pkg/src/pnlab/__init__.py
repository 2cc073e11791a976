"""pnlab: a numerical laboratory for half-Laplacian dislocation dynamics.

The pieces, bottom up:

* operators   - spectral and singular-integral discretizations of the
                half-Laplacian on uniform grids;
* potentials  - 1-periodic multi-well potentials (W, W', W'') and
                exterior stress fields;
* layer       - the monotone transition layer joining 0 to 1, exact for
                the single-harmonic well, by relaxation otherwise;
* corrector   - the first-order corrector of the layer expansion;
* particles   - the limiting ODE system with 1/x pairwise repulsion;
* evolution   - IMEX time stepping of the rescaled reaction-diffusion
                equation, layer tracking, ansatz residual diagnostics;
* harness/cli - end-to-end experiments with CSV/JSON artifacts.
"""

from .operators import (FarField, Grid1D, HalfLaplacian, apply_integral,
                        apply_spectral, cross_validate, LAYER_FAR_FIELD,
                        ZERO_FAR_FIELD)
from .potentials import (PotentialSpec, StressField, affine_stress,
                         constant_stress, make_cosine_potential,
                         make_pn_potential, shifted_stress, table_stress,
                         tabulated_potential, validate_assumption_a,
                         zero_stress)
from .layer import (LayerProfile, LayerSolveError, MonotonicityError,
                    RelaxationOptions, check_asymptotics, exact_pn_layer,
                    layer_residual, mobility, resample_layer, solve_layer,
                    tail_model)
from .corrector import (CorrectorProfile, IllConditionedError,
                        SolvabilityError, build_rhs, compute_eta,
                        kernel_annihilation_residual, project_out_kernel,
                        solvability_defect, solve_corrector)
from .particles import (CollisionError, IntegrationOptions, ParticleState,
                        ParticleTrajectory, SingularConfigurationError,
                        check_repulsion_bound, integrate, particle_rhs)
from .evolution import (AnsatzResidual, Evolver, FieldState, StabilityError,
                        TrackingLostError, ansatz_residual, build_initial,
                        step, track_layers)
from .config import ExperimentConfig, ConfigError, load_config
from .harness import (ConvergenceReport, SuiteSummary, run_convergence,
                      run_suite)

__version__ = "0.1.0"
