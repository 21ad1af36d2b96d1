"""Mutual and directed information estimators and I-MMSE checks.

All quantities are in nats.  The grid-density estimator evaluates the exact
Gaussian-increment densities of the discretized channel, so for a given
grid it estimates the mutual information of that discrete channel without
any modelling bias; only Monte Carlo noise remains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .channels import FeedbackPolicy, Message, is_exactly_solvable
from .errors import InvalidArgument, UnsupportedScenario
from .estimation import bpsk_mmse, hypothesis_moments, riccati_ou, simulate_outputs
from .montecarlo import mean_and_stderr, run_blocks
from .stochastic import OUParams, RngStream, SamplePath, SamplingGrid

__all__ = [
    "MIEstimate",
    "ImmseTable",
    "MacMiTable",
    "girsanov_logdensity",
    "mi_grid_density",
    "mi_duncan",
    "directed_info_grid",
    "bpsk_mi",
    "i_mmse_check",
    "mac_ou_mi_table",
    "converse_bound",
]


@dataclass(frozen=True, eq=False)
class MIEstimate:
    """Monte Carlo information estimate with its standard error (nats)."""

    value: float
    stderr: float
    trials: int
    n: int
    method: str
    samples: np.ndarray | None = field(default=None, repr=False)

    def within(self, other, k: float = 3.0) -> bool:
        """True if the two estimates agree within ``k`` combined standard errors."""
        if isinstance(other, MIEstimate):
            return abs(self.value - other.value) <= k * math.hypot(self.stderr, other.stderr)
        return abs(self.value - float(other)) <= k * self.stderr


def girsanov_logdensity(drift: SamplePath, y: SamplePath):
    """Log-likelihood ratio of the output law against pure Brownian motion.

    Left-point discretization ``sum g_i dY_i - 1/2 sum g_i^2 dt_i`` of
    ``int g dY - 1/2 int g^2 ds``; ``drift`` holds ``g`` at the knots and
    its last knot is unused.
    """
    if drift.grid != y.grid:
        raise InvalidArgument("drift and output must share a grid")
    g = drift.values[..., :-1]
    return np.sum(g * y.increments(), axis=-1) - 0.5 * np.sum(g * g * y.grid.steps, axis=-1)


def _check_variant(policy, variant):
    if variant == "sampled_exact" and not is_exactly_solvable(policy):
        raise UnsupportedScenario(
            f"policy {policy.description!r} has no closed-form sampled law; pick an Euler-Maruyama variant")


def _block_loglik(msg, policy, grid, variant, gen, size):
    idx, y = simulate_outputs(msg, policy, grid, variant, gen, size)
    means, var = hypothesis_moments(msg, policy, y, variant)
    dy = y.increments()[None]
    # per-step Gaussian log-density up to terms shared by every hypothesis
    steps = (means * dy - 0.5 * means * means) / var
    return idx, np.moveaxis(steps, 0, -1)  # batch + (n, |M|)


def _log_prior(msg):
    with np.errstate(divide="ignore"):
        return np.log(msg.prior)


def mi_grid_density(msg: Message, policy: FeedbackPolicy, grid: SamplingGrid, variant="sampled_exact",
                    trials: int = 20000, rng=None, workers: int | None = 1) -> MIEstimate:
    """Mutual information between the message and the output knots.

    Each trial draws ``M`` from the prior, simulates the output, and scores
    ``log f(Y | M) - log sum_m prior(m) f(Y | m)`` with the product-Gaussian
    increment densities of the chosen transition model.  All hypotheses are
    evaluated on the same realized output, replaying the feedback policy
    along it.

    Args:
        msg: Finite message with its prior.
        policy: Drift functional.
        grid: Observation grid.
        variant: ``"sampled_exact"`` for the true channel sampled at the
            knots (closed-form policies only) or an Euler-Maruyama variant.
        trials: At least 100.
        rng: :class:`RngStream`; default seed 42.
        workers: Thread count; the result does not depend on it.
    """
    _check_variant(policy, variant)
    rng = RngStream() if rng is None else rng
    logp = _log_prior(msg)

    def block(gen, size):
        idx, steps = _block_loglik(msg, policy, grid, variant, gen, size)
        ll = steps.sum(axis=-2)
        own = np.take_along_axis(ll, idx[:, None], axis=-1)[:, 0]
        return own - logsumexp(ll + logp, axis=-1)

    samples = run_blocks(block, trials, rng, workers)
    m, se = mean_and_stderr(samples)
    return MIEstimate(float(m), float(se), int(trials), grid.n, "grid_density", samples)


def directed_info_grid(msg: Message, policy: FeedbackPolicy, grid: SamplingGrid, trials: int = 20000,
                       rng=None, variant="sampled_exact", workers: int | None = 1) -> MIEstimate:
    """Directed information ``sum_i I(X^i; Y_i | Y^{i-1})`` on the grid.

    The receiver runs a causal filter: at step ``i`` it predicts ``dY_i``
    with the mixture over messages weighted by its current posterior, and
    the trial score adds ``log f(dY_i | past, M) - log f(dY_i | past)``.
    The input ``X^i`` is the sequence of per-step drift integrals, which is
    a function of ``(M, Y^{i-1})``, so its causal conditional law collapses
    onto the message posterior.  The sum equals the message mutual
    information identically; this routine computes it step by step and
    never forms the joint density.

    A drift that cancels the output (``X = -Y``) has a deterministic
    increment structure for which the per-step terms diverge; such
    policies are outside the intended input class.
    """
    _check_variant(policy, variant)
    rng = RngStream() if rng is None else rng
    logp = _log_prior(msg)

    def block(gen, size):
        idx, steps = _block_loglik(msg, policy, grid, variant, gen, size)
        logpost = np.broadcast_to(logp, (size, msg.size)).copy()
        total = np.zeros(size)
        for i in range(grid.n):
            li = steps[:, i, :]
            pred = logsumexp(logpost + li, axis=-1)
            total += np.take_along_axis(li, idx[:, None], axis=-1)[:, 0] - pred
            logpost = logpost + li - pred[:, None]
        return total

    samples = run_blocks(block, trials, rng, workers)
    m, se = mean_and_stderr(samples)
    return MIEstimate(float(m), float(se), int(trials), grid.n, "directed", samples)


def mi_duncan(mmse_causal_integral: float, snr: float = 1.0) -> float:
    """Duncan's identity: ``I = (snr / 2) int causal MMSE dt``."""
    if mmse_causal_integral < 0:
        raise InvalidArgument("MMSE integral must be >= 0")
    if snr < 0:
        raise InvalidArgument("snr must be >= 0")
    return 0.5 * snr * float(mmse_causal_integral)


def bpsk_mi(gamma: float) -> float:
    """``I(M; sqrt(gamma) M + Z)`` for equiprobable ``M = +-1``.

    Computed as ``gamma - E[log cosh(gamma + sqrt(gamma) Z)]`` with a
    numerically stable ``log cosh``.
    """
    if gamma < 0:
        raise InvalidArgument("gamma must be >= 0")
    if gamma == 0:
        return 0.0
    r = math.sqrt(gamma)

    def f(z):
        u = abs(gamma + r * z)
        logcosh = u + math.log1p(math.exp(-2.0 * u)) - math.log(2.0)
        return logcosh * math.exp(-0.5 * z * z)

    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return gamma - val / math.sqrt(2.0 * math.pi)


def converse_bound(P: float, T: float) -> float:
    """Upper bound ``P T / 2`` on the information a power-``P`` input can carry."""
    return 0.5 * P * T


@dataclass(frozen=True)
class ImmseTable:
    """Rows of ``{snr, I_T, I_T/snr, dI/dsnr, half_smoothed}`` and the two checks."""

    rows: list
    decreasing: bool
    slope_ok: bool | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.decreasing and self.slope_ok is not False


def i_mmse_check(scenario, snr_list, T: float, h: float = 1e-3, tolerance: float = 1e-3) -> ImmseTable:
    """Check that ``I_T(snr) / snr`` decreases and that ``dI/dsnr`` matches the smoothed MMSE.

    Args:
        scenario: ``("ou", a, P)`` or ``("binary", c)``; an :class:`OUParams`
            is accepted for the first form.
        snr_list: Strictly increasing positive SNR values.
        T: Horizon.
        h: Central finite-difference step, at most a tenth of the smallest
            gap in ``snr_list``.
        tolerance: Allowed ``|dI/dsnr - 1/2 int smoothed MMSE|``.

    For the OU input ``I_T`` comes from the Riccati equation and only
    monotonicity is checked (``half_smoothed`` is NaN).  For the binary
    constant signal ``c M`` the output value ``Y(T)`` is sufficient, so both
    sides reduce to one-dimensional quadratures at ``gamma = snr c^2 T``.
    """
    snr = np.asarray(snr_list, float)
    if snr.ndim != 1 or snr.size < 1 or np.any(snr <= 0):
        raise InvalidArgument("snr_list must contain positive values")
    if np.any(np.diff(snr) <= 0):
        raise InvalidArgument("snr_list must be strictly increasing")
    gap = np.min(np.diff(snr)) if snr.size > 1 else snr[0]
    if not 0 < h <= gap / 10 * (1 + 1e-12) or h >= snr[0]:
        raise InvalidArgument(f"finite-difference step must lie in (0, min-gap/10] and below the smallest snr, got {h!r}")

    if isinstance(scenario, OUParams):
        scenario = ("ou", scenario.a, scenario.P)
    kind = scenario[0]
    if kind == "ou":
        params = OUParams(float(scenario[1]), float(scenario[2]))

        def info(s):
            return riccati_ou(params, s, T).mi_integral

        def half_smoothed(s):
            return float("nan")
    elif kind == "binary":
        c = float(scenario[1])

        def info(s):
            return bpsk_mi(s * c * c * T)

        def half_smoothed(s):
            # E[(cM - E[cM | Y])^2] is the same at every s, so the time integral is T times it
            return 0.5 * T * c * c * bpsk_mmse(s * c * c * T)
    else:
        raise InvalidArgument(f"unknown scenario {scenario!r}")

    rows = []
    for s in snr:
        i_t = info(s)
        slope = (info(s + h) - info(s - h)) / (2.0 * h)
        rows.append({"snr": float(s), "I_T": i_t, "I_T_over_snr": i_t / s, "dI_dsnr": slope,
                     "half_smoothed": half_smoothed(s)})
    ratios = np.array([r["I_T_over_snr"] for r in rows])
    decreasing = bool(np.all(np.diff(ratios) < 0))
    if kind == "binary":
        slope_ok = all(abs(r["dI_dsnr"] - r["half_smoothed"]) <= tolerance for r in rows)
    else:
        slope_ok = None
    return ImmseTable(rows, decreasing, slope_ok, tolerance)


@dataclass(frozen=True)
class MacMiTable:
    """Per-time information quantities for two OU users on a shared channel (nats/time)."""

    a: float
    P1: float
    P2: float
    T: float
    joint: float
    conditional1: float
    conditional2: float
    marginal1: float
    marginal2: float

    @property
    def gap1(self) -> float:
        """``I(X1; Y | X2) - I(X1; Y)``: the cost of treating user 2 as noise."""
        return self.conditional1 - self.marginal1

    @property
    def gap2(self) -> float:
        return self.conditional2 - self.marginal2

    def as_row(self) -> dict:
        return {"a": self.a, "P1": self.P1, "P2": self.P2, "T": self.T, "joint": self.joint,
                "conditional1": self.conditional1, "conditional2": self.conditional2,
                "marginal1": self.marginal1, "marginal2": self.marginal2, "gap1": self.gap1,
                "gap2": self.gap2}


def mac_ou_mi_table(a: float, P1: float, P2: float, T: float, a2: float | None = None) -> MacMiTable:
    """Information rates of a two-user MAC with independent stationary OU inputs.

    The sum of two independent OU processes with the same rate ``a`` is
    OU with power ``P1 + P2``, so the joint term is one Riccati solve;
    conditioning on one user removes its known contribution, leaving a
    single-user OU channel; the marginals follow from the chain rule.

    Raises:
        UnsupportedScenario: if the two users have different rates.
    """
    if a2 is not None and a2 != a:
        raise UnsupportedScenario("users with different mean-reversion rates do not sum to an OU process")
    if P1 < 0 or P2 < 0 or P1 + P2 == 0:
        raise InvalidArgument("need nonnegative powers, not both zero")

    def rate(P):
        return riccati_ou(OUParams(a, P), 1.0, T).mi_integral / T if P > 0 else 0.0

    joint = rate(P1 + P2)
    c1, c2 = rate(P1), rate(P2)
    return MacMiTable(float(a), float(P1), float(P2), float(T), joint, c1, c2, joint - c2, joint - c1)
