"""MMSE oracles: Kalman-Bucy variance for OU inputs, finite-message posteriors
and Monte Carlo causal / smoothed MMSE curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .channels import (
    EmVariant,
    _linear_drift,
    FeedbackPolicy,
    Message,
    increment_moments,
    is_exactly_solvable,
    policy_values,
    simulate_em,
    simulate_exact_sampled,
)
from .errors import InvalidArgument, NumericalFault, StepSizeFault
from .montecarlo import mean_and_stderr, run_blocks
from .stochastic import (
    OUParams,
    RngStream,
    SamplePath,
    SamplingGrid,
    brownian_path,
    brownian_paths_nested,
)

__all__ = [
    "RiccatiSolution",
    "PosteriorState",
    "MmseCurve",
    "riccati_ou",
    "riccati_steady_state",
    "posterior_finite_message",
    "causal_log_posteriors",
    "hypothesis_moments",
    "mmse_from_samples",
    "bpsk_mmse",
    "simulate_outputs",
    "trial_noise",
]


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Posterior variance of an OU input observed through ``sqrt(snr) int X + B``.

    ``mi_integral`` is ``(snr / 2) int_0^T Sigma(t) dt``, the exact mutual
    information over ``[0, T]`` in nats.
    """

    times: np.ndarray
    sigma: np.ndarray
    mi_integral: float
    steady_state: float
    snr: float
    params: OUParams

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def riccati_steady_state(params: OUParams, snr: float) -> float:
    """Positive root of ``snr S^2 + 2 a S - 2 a P = 0`` (``P`` when ``snr = 0``)."""
    a, P = params.a, params.P
    if snr == 0:
        return P
    # rationalised form of (-a + sqrt(a^2 + 2 a P snr)) / snr, no cancellation
    return 2.0 * a * P / (a + math.sqrt(a * a + 2.0 * a * P * snr))


def riccati_ou(params: OUParams, snr: float, T: float, dt: float | None = None) -> RiccatiSolution:
    """Integrate ``dS/dt = 2aP - 2aS - snr S^2`` from ``S(0) = P`` with classical RK4.

    The running integral of ``S`` is carried as a second state component so
    it is integrated to the same order.

    Args:
        params: OU input parameters.
        snr: Signal-to-noise ratio (>= 0).
        T: Horizon.
        dt: Step; default ``min(T / 1e4, 0.1 / (a (1 + snr)))``.  Must not
            exceed ``T / 100``.

    Raises:
        StepSizeFault: if ``S`` leaves ``[0, P (1 + 1e-6)]``.
    """
    if snr < 0:
        raise InvalidArgument("snr must be >= 0")
    if not T > 0:
        raise InvalidArgument("horizon must be positive")
    a, P = params.a, params.P
    if dt is None:
        dt = min(T / 1e4, 0.1 / (a * (1.0 + snr)))
    if not 0 < dt <= T / 100 * (1 + 1e-12):
        raise InvalidArgument(f"dt must lie in (0, T/100], got {dt!r}")
    n = int(math.ceil(T / dt - 1e-9))
    h = T / n
    two_a_p, two_a = 2.0 * a * P, 2.0 * a

    def f(s):
        return two_a_p - two_a * s - snr * s * s

    sig = np.empty(n + 1)
    sig[0] = s = P
    acc = 0.0
    hi = P * (1.0 + 1e-6)
    for i in range(n):
        k1 = f(s)
        s2 = s + 0.5 * h * k1
        k2 = f(s2)
        s3 = s + 0.5 * h * k2
        k3 = f(s3)
        s4 = s + h * k3
        k4 = f(s4)
        acc += h * (s + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
        s = s + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not 0.0 <= s <= hi:
            raise StepSizeFault(f"Riccati variance left [0, P] at step {i}; reduce dt")
        sig[i + 1] = s
    times = np.linspace(0.0, T, n + 1)
    return RiccatiSolution(times, sig, 0.5 * snr * acc, riccati_steady_state(params, snr), snr, params)


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """Posterior over a finite message and the induced moments of ``X(s)``."""

    probs: np.ndarray
    mean: np.ndarray | None = None
    second_moment: np.ndarray | None = None

    @property
    def variance(self):
        if self.mean is None:
            return None
        return np.maximum(self.second_moment - self.mean**2, 0.0)


def hypothesis_moments(msg: Message, policy: FeedbackPolicy, y: SamplePath, variant):
    """Mean increments for every message hypothesis along ``y``.

    Returns ``(means, var)`` with ``means`` of shape ``(|M|,) + batch + (n,)``.
    With feedback each hypothesis is replayed on the realised output path.
    """
    shape = y.batch_shape
    means = []
    var = None
    for sym in msg.symbols:
        m, var = increment_moments(policy, np.full(shape, sym), y, variant)
        means.append(m)
    return np.stack(means), np.broadcast_to(var, means[0].shape)


def _step_loglik(means, var, dy):
    # log N(dy; mu, v) up to terms common to all hypotheses
    return (means * dy - 0.5 * means * means) / var


def causal_log_posteriors(msg: Message, means, var, y: SamplePath):
    """Normalised log posteriors given ``Y(t_0..t_k)`` for every knot ``k``.

    Returns an array of shape ``batch + (n + 1, |M|)``; row ``k = 0`` is the
    prior.  Normalisation subtracts the running maximum before
    exponentiating, so long grids never underflow.
    """
    ll = _step_loglik(means, var, y.increments()[None])
    cum = np.concatenate([np.zeros(ll.shape[:-1] + (1,)), np.cumsum(ll, axis=-1)], axis=-1)
    with np.errstate(divide="ignore"):
        logp = np.log(msg.prior)
    logw = np.moveaxis(cum, 0, -1) + logp
    return logw - logsumexp(logw, axis=-1, keepdims=True)


def posterior_finite_message(msg: Message, drift_per_hypothesis, y: SamplePath, variant="sampled_exact",
                             inputs=None) -> PosteriorState:
    """Posterior of the message given the whole observed output ``y``.

    Args:
        msg: Message with its prior.
        drift_per_hypothesis: Either a :class:`FeedbackPolicy` (replayed along
            ``y`` for every hypothesis) or an array ``(|M|,) + batch + (n,)``
            of per-step drift integrals.
        y: Observed output knots.
        variant: Transition model used when a policy is given.
        inputs: Optional ``(|M|,) + batch`` values of ``X(s)`` under each
            hypothesis; when given, the conditional mean and second moment
            of ``X(s)`` are returned as well.

    Raises:
        NumericalFault: if every posterior weight is lost.
    """
    if isinstance(drift_per_hypothesis, FeedbackPolicy):
        means, var = hypothesis_moments(msg, drift_per_hypothesis, y, variant)
    else:
        means = np.asarray(drift_per_hypothesis, float)
        if means.shape[0] != msg.size:
            raise InvalidArgument("need one drift row per message")
        var = y.grid.steps
    ll = _step_loglik(means, var, y.increments()[None]).sum(axis=-1)
    with np.errstate(divide="ignore"):
        logw = np.moveaxis(ll, 0, -1) + np.log(msg.prior)
    shift = np.max(logw, axis=-1, keepdims=True)
    if not np.all(np.isfinite(shift)):
        raise NumericalFault("all posterior weights vanished")
    w = np.exp(logw - shift)
    probs = w / w.sum(axis=-1, keepdims=True)
    if inputs is None:
        return PosteriorState(probs)
    x = np.moveaxis(np.asarray(inputs, float), 0, -1)
    return PosteriorState(probs, (probs * x).sum(-1), (probs * x * x).sum(-1))


@dataclass(frozen=True, eq=False)
class MmseCurve:
    """Monte Carlo causal and smoothed MMSE of ``X(s)`` at ``times``."""

    times: np.ndarray
    causal: np.ndarray
    causal_se: np.ndarray
    smoothed: np.ndarray
    smoothed_se: np.ndarray
    causal_integral: float
    causal_integral_se: float
    smoothed_integral: float
    smoothed_integral_se: float
    trials: int
    n: int
    samples: dict = field(default_factory=dict, repr=False)


def _default_variant(policy):
    return "sampled_exact" if is_exactly_solvable(policy) else EmVariant.FROZEN_HISTORY


def trial_noise(grid: SamplingGrid, gen, size):
    """Brownian noise for one trial block.

    On a dyadic grid the path is built by bridge refinement, so the same
    stream yields the same underlying Brownian path on every dyadic level
    and results at different resolutions are directly comparable.
    """
    if grid.kind == "dyadic":
        return brownian_paths_nested(grid.horizon, grid.level, gen, size)[-1]
    return brownian_path(grid, gen, size)


def simulate_outputs(msg: Message, policy: FeedbackPolicy, grid: SamplingGrid, variant, gen, size):
    """Draw messages and the matching channel outputs for one trial block.

    Returns message indices and the output knots.  Exact sampling with
    output-linear feedback draws its own transition noise; every other
    route runs on :func:`trial_noise`.
    """
    idx = msg.draw(size, gen)
    sym = msg.symbols[idx]
    if variant == "sampled_exact":
        if policy.kind == "linear" and policy.params.get("feedback_gain", 0.0) != 0:
            return idx, simulate_exact_sampled(policy, sym, grid, gen)
        return idx, simulate_exact_sampled(policy, sym, grid, noise=trial_noise(grid, gen, size))
    return idx, simulate_em(policy, sym, grid, variant, noise=trial_noise(grid, gen, size))


def mmse_from_samples(msg: Message, policy: FeedbackPolicy, grid: SamplingGrid, eval_times=None,
                      trials: int = 20000, rng=None, variant=None, workers: int | None = 1,
                      snr: float = 1.0) -> MmseCurve:
    """Causal and smoothed MMSE of the channel input from sampled outputs.

    The causal estimate of ``X(s)`` conditions on the output knots up to
    ``s``, the smoothed one on all knots.  Between knots ``X(s)`` is the
    drift evaluated with the output history frozen at the previous knot.

    Args:
        msg, policy, grid: The channel.
        eval_times: Where to evaluate the curves (default: the grid knots).
        trials: Monte Carlo trials, at least 100.
        rng: :class:`RngStream` (default seed 42).
        variant: ``"sampled_exact"`` (closed-form policies only) or an
            Euler-Maruyama variant; chosen automatically when omitted.
        workers: Thread count; results do not depend on it.
        snr: Scales the input: the channel carries ``sqrt(snr) * g``.

    Returns:
        An :class:`MmseCurve`; integrals use the trapezoid rule over
        ``eval_times`` and their standard errors come from per-trial values.
    """
    rng = RngStream() if rng is None else rng
    variant = _default_variant(policy) if variant is None else variant
    times = grid.times if eval_times is None else np.asarray(eval_times, float)
    if np.any(times < 0) or np.any(times > grid.horizon):
        raise InvalidArgument("eval_times must lie in [0, T]")
    knot = np.clip(np.searchsorted(grid.times, times, side="right") - 1, 0, grid.n)
    if snr != 1.0:
        policy = _scaled(policy, math.sqrt(snr))

    def block(gen, size):
        idx, y = simulate_outputs(msg, policy, grid, variant, gen, size)
        means, var = hypothesis_moments(msg, policy, y, variant)
        logpost = causal_log_posteriors(msg, means, var, y)
        post = np.exp(logpost)
        x = np.stack([policy_values(policy, np.full(size, s), y, times) for s in msg.symbols])
        x = np.moveaxis(x, 0, -1)
        x_true = np.take_along_axis(x, idx[:, None, None], axis=-1)[..., 0]
        causal_hat = (post[:, knot, :] * x).sum(-1)
        smooth_hat = (post[:, -1:, :] * x).sum(-1)
        return (x_true - causal_hat) ** 2, (x_true - smooth_hat) ** 2

    causal, smooth = run_blocks(block, trials, rng, workers)
    # MMSE values are reported for the unscaled input
    causal, smooth = causal / snr, smooth / snr
    if times.size > 1:
        ci = integrate.trapezoid(causal, times, axis=-1)
        si = integrate.trapezoid(smooth, times, axis=-1)
    else:
        ci = si = np.zeros(causal.shape[0])
    c_mean, c_se = mean_and_stderr(causal)
    s_mean, s_se = mean_and_stderr(smooth)
    ci_m, ci_se = mean_and_stderr(ci)
    si_m, si_se = mean_and_stderr(si)
    return MmseCurve(times, c_mean, c_se, s_mean, s_se, float(ci_m), float(ci_se), float(si_m),
                     float(si_se), int(trials), grid.n, {"causal_integral": ci, "smoothed_integral": si})


def _scaled(policy: FeedbackPolicy, k: float) -> FeedbackPolicy:
    p = dict(policy.params)
    if policy.kind == "linear":
        p["offset"] = k * p.get("offset", 0.0)
        p["message_gain"] = k * p.get("message_gain", 0.0)
        # output feedback is not scaled by snr
    elif policy.kind == "waveform":
        p["gain"] = k * p["gain"]
    elif policy.uses_feedback:
        raise InvalidArgument("snr scaling is only defined for closed-form or feedback-free policies")
    drift = policy.drift
    if policy.kind == "linear":
        new = _linear_drift(p["offset"], p["message_gain"], p.get("feedback_gain", 0.0))
    else:
        def new(s, w, y):
            return k * np.asarray(drift(s, w, y), float)
    return FeedbackPolicy(new, policy.lipschitz * k, policy.description + f" (x{k:g})", policy.kind, p,
                          None if policy.peak is None else policy.peak * k, policy.uses_feedback)


def bpsk_mmse(gamma: float) -> float:
    """MMSE of an equiprobable ``+-1`` symbol seen in Gaussian noise at SNR ``gamma``.

    ``1 - E[tanh(gamma + sqrt(gamma) Z)]`` by adaptive quadrature.
    """
    if gamma < 0:
        raise InvalidArgument("gamma must be >= 0")
    if gamma == 0:
        return 1.0
    r = math.sqrt(gamma)
    val, _ = integrate.quad(lambda z: math.tanh(gamma + r * z) * math.exp(-0.5 * z * z),
                            -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 - val / math.sqrt(2.0 * math.pi)
