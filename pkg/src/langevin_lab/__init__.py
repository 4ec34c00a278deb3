"""langevin-lab: numerical laboratory for Langevin sampling.

Exact Gaussian law tracking, 1D grid density evolution, divergence
functionals with closed forms and quadrature, an isoperimetry-constant
calculus, theorem-level bound evaluators, and a reproducible Monte Carlo
ULA engine -- everything needed to verify the convergence inequalities
numerically.
"""

from ._backend import USE_NUMBA, backend_name
from .bounds import (
    BoundReport,
    GrowthFunction,
    StepPlan,
    biased_limit_renyi_rate,
    gaussian_start_bound,
    grad_moment_bounds,
    hypercontractivity_schedule,
    kl_ula_bound,
    langevin_kl_rate,
    one_step_bound,
    plan_kl,
    renyi_decomp_bound,
    renyi_ld_rate,
    renyi_lp_rate,
    renyi_ula_lsi_bound,
    renyi_ula_pi_bound,
    renyi_waiting_time,
)
from .functionals import (
    fisher_gaussian,
    fisher_grid,
    kl_gaussian,
    kl_grid,
    renyi_gaussian,
    renyi_grid,
    renyi_info_gaussian,
    renyi_info_grid,
    w2_gaussian,
)
from .gaussian_dynamics import (
    GaussianChainState,
    GaussianMeasure,
    UnstableStepWarning,
    affine_pushforward_gaussian,
    heat_flow_gaussian,
    ou_flow_gaussian,
    ula_chain_advance,
    ula_step_gaussian,
    ula_stationary_gaussian,
    ula_track,
)
from .grid1d import (
    CflError,
    GridDensity1D,
    discretize,
    fokker_planck_evolve,
    fokker_planck_max_dt,
    fokker_planck_step,
    heat_flow_grid,
    ula_density_step,
)
from .isoperimetry import (
    IsoperimetryCert,
    bakry_emery,
    bounded_perturbation,
    gaussian_convolution,
    lipschitz_pushforward,
    lsi_implies_pi,
    replay_chain,
    serialize_chain,
    tensorize,
    ula_limit_cert,
)
from .sampler import (
    ChainConfig,
    ChainSummary,
    DivergedChainError,
    estimate_grad_moment,
    exact_gaussian_samples,
    noise_block,
    run_chains,
)
from .targets import (
    GaussianTargetSpec,
    MixtureTargetSpec,
    StationaryPointError,
    Target,
    find_stationary_point,
    make_gaussian_target,
    make_mixture_target,
)

__version__ = "0.1.0"
