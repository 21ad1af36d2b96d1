"""Simulation and measurement tools for continuous-time white Gaussian channels.

The channel is written in Brownian form, ``Y(t) = int_0^t g(s, W, Y) ds + B(t)``,
and is discretized either by exact sampling at grid knots or by one of four
Euler-Maruyama schemes.  On top of the simulators sit exact-density mutual
and directed information estimators, Kalman-Bucy and finite-message MMSE
oracles, and the closed-form capacity formulas and regions.
"""

from .capacity import (
    FeedbackGainReport,
    RateRegion,
    bandlimited_capacity,
    bc_region,
    degraded_bc_feedback_region,
    infinite_bandwidth_capacity,
    mac_region,
    rho_star,
    rho_star_residual,
    sk_bc_report,
    sk_rate_series,
)
from .channels import (
    POLICY_CATALOG,
    ChannelSpec,
    EmVariant,
    FeedbackPolicy,
    History,
    LipschitzProbe,
    Message,
    PowerAudit,
    audit_power,
    clamped_feedback_policy,
    constant_policy,
    increment_moments,
    input_policy,
    is_exactly_solvable,
    linear_feedback_policy,
    message_policy,
    modulated_feedback_policy,
    policy_values,
    probe_lipschitz,
    ramp_policy,
    replay_drift_integrals,
    simulate_bc,
    simulate_em,
    simulate_exact_sampled,
    simulate_mac,
    sinusoidal_feedback_policy,
    waveform_policy,
    zero_policy,
)
from .errors import (
    ChannelError,
    InvalidArgument,
    NoRootFault,
    NotExactlySolvable,
    NumericalFault,
    OutOfRange,
    SimulationFault,
    StepSizeFault,
    UnsupportedScenario,
)
from .estimation import (
    MmseCurve,
    PosteriorState,
    RiccatiSolution,
    bpsk_mmse,
    causal_log_posteriors,
    mmse_from_samples,
    posterior_finite_message,
    riccati_ou,
    riccati_steady_state,
)
from .information import (
    ImmseTable,
    MacMiTable,
    MIEstimate,
    bpsk_mi,
    converse_bound,
    directed_info_grid,
    girsanov_logdensity,
    i_mmse_check,
    mac_ou_mi_table,
    mi_duncan,
    mi_grid_density,
)
from .montecarlo import mean_and_stderr, run_blocks
from .stochastic import (
    OUParams,
    RngStream,
    SamplePath,
    SamplingGrid,
    brownian_path,
    brownian_paths_nested,
    interpolate,
    make_grid,
    ou_path,
    restrict,
)

__version__ = "0.1.0"
