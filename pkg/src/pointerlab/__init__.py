"""Pointer bases, mixing times and feedback control for linear Gaussian
open quantum systems, with quantum Brownian motion as the worked example."""

__version__ = "0.1.0"

from .control import (FeedbackDesign, FeedbackOutcome, LQGEquivalence,
                      closed_loop_drift, evaluate_feedback, feedback_gain,
                      lqg_equivalence, mean_covariance)
from .ensembles import (PointerBasisResult, PRStatus, SearchConfig,
                        UnravellingCandidate, average_survival_probability,
                        find_pointer_basis, gaussian_overlap,
                        is_physically_realizable, mixing_time_asymptotic,
                        mixing_time_exact, omega_rate, survival_time)
from .errors import InputError, NumericalError, PointerLabError
from .lgmodel import (GaussianState, LGModel, build_drift_diffusion,
                      check_quantum_cov, fidelity_zero_mean, is_hurwitz, purity,
                      symplectic_form)
from .matops import (is_psd, propagate_covariance, psd_sqrt, solve_care,
                     solve_lyapunov)
from .qbm import (boundary_gamma, omega_from_point, power_law_fit,
                  pr_region_contains, qbm_detM, qbm_mixing_time, qbm_model,
                  qbm_moments, qbm_pointer_basis, survival_probability,
                  survival_time_qbm)
from .trajectories import (ErgodicStats, TrajectoryConfig, ergodic_stats,
                           noise_factor, simulate_mean)
