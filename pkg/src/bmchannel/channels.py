"""Point-to-point, multiple-access and broadcast channels in Brownian form.

The point-to-point feedback/memory channel is

    Y(t) = int_0^t g(s, W_0^s, Y_0^s) ds + B(t),

where ``W`` is either a finite message (feedback channel) or an input path
(memory channel).  Outputs are always assembled as ``Y = D + B`` with ``D``
the running sum of per-step drift integrals, so a zero drift reproduces the
noise path bit-for-bit and knot ``i`` never depends on noise after ``t_i``.

Drift functionals are called as ``drift(s, w, y)`` with

* ``s`` -- a float time,
* ``w`` -- an array of message symbols (one per path) or a :class:`History`
  of the input path,
* ``y`` -- a :class:`History` of the output, stopped at the freeze time
  (a tuple of histories for broadcast receivers).

They must return an array broadcastable to the batch shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np
from scipy.integrate import trapezoid

from .errors import InvalidArgument, NotExactlySolvable, SimulationFault
from .stochastic import (
    SamplePath,
    SamplingGrid,
    as_generator,
    brownian_path,
    restrict,
)

__all__ = [
    "History",
    "FeedbackPolicy",
    "Message",
    "ChannelSpec",
    "EmVariant",
    "PowerAudit",
    "LipschitzProbe",
    "simulate_em",
    "simulate_exact_sampled",
    "simulate_mac",
    "simulate_bc",
    "audit_power",
    "probe_lipschitz",
    "replay_drift_integrals",
    "increment_moments",
    "policy_values",
    "is_exactly_solvable",
    "zero_policy",
    "constant_policy",
    "message_policy",
    "waveform_policy",
    "ramp_policy",
    "linear_feedback_policy",
    "clamped_feedback_policy",
    "sinusoidal_feedback_policy",
    "modulated_feedback_policy",
    "input_policy",
    "POLICY_CATALOG",
]


class History:
    """A path observed up to a stop time and held constant afterwards."""

    __slots__ = ("times", "values")

    def __init__(self, times, values):
        self.times = times
        self.values = values

    @property
    def stop(self) -> float:
        return float(self.times[-1])

    @property
    def current(self):
        return self.values[..., -1]

    def at(self, r):
        """Value at time ``r``; times past the stop return the stopped value."""
        times = self.times
        if r >= times[-1]:
            return self.values[..., -1]
        if r <= 0.0:
            return self.values[..., 0]
        j = int(np.searchsorted(times, r, side="right")) - 1
        t0, t1 = times[j], times[j + 1]
        lam = (r - t0) / (t1 - t0)
        return self.values[..., j] + lam * (self.values[..., j + 1] - self.values[..., j])

    def sup_abs(self):
        return np.max(np.abs(self.values), axis=-1)


@dataclass(frozen=True)
class FeedbackPolicy:
    """Drift functional ``g(s, w, y)`` with its declared regularity constants.

    Attributes:
        drift: Vectorised callable, see the module docstring.
        lipschitz: Declared uniform Lipschitz constant.
        description: Human-readable summary.
        kind: Closed-form class tag. ``"linear"`` means
            ``g = offset + message_gain * w - feedback_gain * y(s)``,
            ``"waveform"`` means ``g = gain * w * f(s)`` with a known
            antiderivative; anything else is ``"general"`` (or ``"input"``
            for a memory channel fed by an input path).
        params: Parameters of the closed-form class.
        peak: Bound on ``|g|`` for message symbols in ``[-1, 1]``, if finite.
        uses_feedback: Whether ``g`` reads the output history.
    """

    drift: Callable[[float, Any, Any], Any]
    lipschitz: float
    description: str = ""
    kind: str = "general"
    params: dict = field(default_factory=dict)
    peak: float | None = None
    uses_feedback: bool = True

    def __post_init__(self):
        if not self.lipschitz >= 0:
            raise InvalidArgument("declared Lipschitz constant must be >= 0")

    def __call__(self, s, w, y):
        return self.drift(s, w, y)


@dataclass(frozen=True, eq=False)
class Message:
    """Finite message with prior and real-valued channel symbols.

    Default symbols are evenly spaced on ``[-1, 1]`` (``-1, +1`` for a
    binary message, ``0`` for a single-letter alphabet).
    """

    size: int
    prior: np.ndarray | None = None
    symbols: np.ndarray | None = None
    value: int = 0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidArgument("alphabet size must be a positive integer")
        prior = np.full(self.size, 1.0 / self.size) if self.prior is None else np.asarray(self.prior, float)
        if prior.shape != (self.size,) or np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-12:
            raise InvalidArgument("prior must be a probability vector of length size")
        if self.symbols is None:
            symbols = np.zeros(1) if self.size == 1 else np.linspace(-1.0, 1.0, self.size)
        else:
            symbols = np.asarray(self.symbols, float)
        if symbols.shape != (self.size,):
            raise InvalidArgument("need one symbol per message")
        if not 0 <= self.value < self.size:
            raise InvalidArgument(f"message value {self.value} outside [0, {self.size})")
        prior.setflags(write=False)
        symbols.setflags(write=False)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "symbols", symbols)

    @property
    def symbol(self) -> float:
        return float(self.symbols[self.value])

    def draw(self, n, rng):
        """Message indices for ``n`` independent trials."""
        return as_generator(rng).choice(self.size, size=n, p=self.prior)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Channel role and parameters.

    For a broadcast channel either give ``snr`` (one per receiver) plus an
    optional noise ``correlation`` matrix, or ``degraded=(N1, N2)`` for the
    physically degraded two-receiver form in which receiver 2 sees receiver
    1's noise plus its own.
    """

    role: str = "point_to_point"
    powers: tuple = (1.0,)
    snr: tuple = (1.0,)
    correlation: np.ndarray | None = None
    degraded: tuple | None = None

    def __post_init__(self):
        if self.role not in ("point_to_point", "mac", "bc"):
            raise InvalidArgument(f"unknown channel role {self.role!r}")
        if any(not p > 0 for p in self.powers):
            raise InvalidArgument("powers must be positive")
        if any(not s >= 0 for s in self.snr):
            raise InvalidArgument("snr values must be >= 0")
        if self.degraded is not None:
            if len(self.degraded) != 2 or any(not v >= 0 for v in self.degraded) or not self.degraded[0] > 0:
                raise InvalidArgument("degraded noise levels need N1 > 0 and N2 >= 0")
        if self.correlation is not None:
            c = np.asarray(self.correlation, float)
            m = len(self.snr)
            if c.shape != (m, m):
                raise InvalidArgument("correlation matrix must be m x m")
            if not np.allclose(c, c.T, atol=1e-12) or not np.allclose(np.diag(c), 1.0, atol=1e-12):
                raise InvalidArgument("correlation matrix must be symmetric with unit diagonal")
            if np.linalg.eigvalsh(c).min() < -1e-10:
                raise InvalidArgument("correlation matrix is not positive semidefinite")
            c.setflags(write=False)
            object.__setattr__(self, "correlation", c)

    @property
    def receivers(self) -> int:
        return 2 if self.degraded is not None else len(self.snr)


class EmVariant(str, Enum):
    """The four Euler-Maruyama freezing rules.

    ``FROZEN_HISTORY`` freezes the input and output histories at the left
    knot but keeps the drift time live over the step; ``PIECEWISE_MESSAGE``
    additionally replaces an input path by its piecewise-linear version on
    the grid; the ``FROZEN_TIME`` / ``FROZEN_BOTH`` variants also freeze the
    drift time at the left knot.
    """

    FROZEN_HISTORY = "em_frozen_history"
    PIECEWISE_MESSAGE = "em_piecewise_message"
    FROZEN_TIME = "em_frozen_time"
    FROZEN_BOTH = "em_frozen_both"

    @property
    def freezes_time(self) -> bool:
        return self in (EmVariant.FROZEN_TIME, EmVariant.FROZEN_BOTH)

    @property
    def piecewise_input(self) -> bool:
        return self in (EmVariant.PIECEWISE_MESSAGE, EmVariant.FROZEN_BOTH)

    @classmethod
    def parse(cls, v):
        if isinstance(v, cls):
            return v
        try:
            return cls(v)
        except ValueError:
            short = {"frozen_history": cls.FROZEN_HISTORY, "piecewise_message": cls.PIECEWISE_MESSAGE,
                     "frozen_time": cls.FROZEN_TIME, "frozen_both": cls.FROZEN_BOTH}
            if v in short:
                return short[v]
            raise InvalidArgument(f"unknown Euler-Maruyama variant {v!r}") from None


# -- policy catalog ---------------------------------------------------------


def _linear_drift(offset, gain, k):
    if k == 0:
        def drift(s, w, y):
            return offset + gain * np.asarray(w, float)
    else:
        def drift(s, w, y):
            return offset + gain * np.asarray(w, float) - k * y.at(s)
    return drift


def linear_feedback_policy(k: float, c: float = 0.0, offset: float = 0.0) -> FeedbackPolicy:
    """``g = offset + c * m - k * y(s)``; ``k = 1, c = 0`` makes the output an OU process."""
    if k < 0:
        raise InvalidArgument("feedback gain must be >= 0")
    return FeedbackPolicy(
        drift=_linear_drift(offset, c, k),
        lipschitz=max(abs(c), k),
        description=f"linear: {offset:g} + {c:g}*m - {k:g}*y(s)",
        kind="linear",
        params={"offset": offset, "message_gain": c, "feedback_gain": k},
        peak=abs(offset) + abs(c) if k == 0 else None,
        uses_feedback=k != 0,
    )


def zero_policy() -> FeedbackPolicy:
    return linear_feedback_policy(0.0)


def constant_policy(c: float) -> FeedbackPolicy:
    return linear_feedback_policy(0.0, offset=c)


def message_policy(c: float = 1.0) -> FeedbackPolicy:
    """``g = c * m``: a constant antipodal signal, no feedback."""
    return linear_feedback_policy(0.0, c=c)


def waveform_policy(c: float, f, F, lipschitz: float, peak: float, description: str = "") -> FeedbackPolicy:
    """``g = c * m * f(s)`` with ``F`` an antiderivative of ``f``."""
    def drift(s, w, y):
        return c * f(s) * np.asarray(w, float)
    return FeedbackPolicy(drift, lipschitz, description or f"waveform: {c:g}*m*f(s)",
                          kind="waveform", params={"gain": c, "f": f, "F": F},
                          peak=peak, uses_feedback=False)


def ramp_policy(c: float = 1.0, T: float = 1.0) -> FeedbackPolicy:
    """``g = c * m * s / T``; its sampled MI genuinely grows with refinement."""
    return waveform_policy(c, lambda s: s / T, lambda s: s * s / (2.0 * T),
                           lipschitz=max(abs(c), abs(c) / T), peak=abs(c),
                           description=f"ramp: {c:g}*m*s/{T:g}")


def clamped_feedback_policy(c: float = 1.0, kappa: float = 0.5, bound: float = 1.0) -> FeedbackPolicy:
    """``g = c * m - kappa * clamp(y(s), -bound, bound)``.

    Uniformly Lipschitz with constant ``max(|c|, kappa)`` and bounded by
    ``|c| + kappa * bound``, so Euler-Maruyama convergence holds for it
    with explicit growth and Lipschitz constants.
    """
    if kappa < 0 or bound <= 0:
        raise InvalidArgument("need kappa >= 0 and bound > 0")

    def drift(s, w, y):
        return c * np.asarray(w, float) - kappa * np.clip(y.at(s), -bound, bound)

    return FeedbackPolicy(drift, max(abs(c), kappa),
                          f"clamped feedback: {c:g}*m - {kappa:g}*clamp(y, {bound:g})",
                          params={"c": c, "kappa": kappa, "bound": bound},
                          peak=abs(c) + kappa * bound)


def sinusoidal_feedback_policy(c: float = 1.0, kappa: float = 0.5, bound: float = 1.0,
                               freq: float = 1.0) -> FeedbackPolicy:
    """``g = c * m * cos(2 pi freq s) - kappa * clamp(y(s))``; time-varying, so the variants differ."""
    w0 = 2.0 * math.pi * freq

    def drift(s, w, y):
        return c * math.cos(w0 * s) * np.asarray(w, float) - kappa * np.clip(y.at(s), -bound, bound)

    return FeedbackPolicy(drift, max(abs(c) * max(1.0, w0), kappa),
                          f"sinusoidal feedback: {c:g}*m*cos(2pi*{freq:g}*s) - {kappa:g}*clamp(y, {bound:g})",
                          params={"c": c, "kappa": kappa, "bound": bound, "freq": freq},
                          peak=abs(c) + kappa * bound)


def modulated_feedback_policy(c: float = 1.0, kappa: float = 0.5, bound: float = 1.0) -> FeedbackPolicy:
    """``g = c * m * (1 + kappa * clamp(y(s), -bound, bound))``.

    The output steers the signal amplitude, so unlike an additive feedback
    term it changes how much the receiver learns about the message.
    """
    if kappa < 0 or bound <= 0:
        raise InvalidArgument("need kappa >= 0 and bound > 0")

    def drift(s, w, y):
        return c * np.asarray(w, float) * (1.0 + kappa * np.clip(y.at(s), -bound, bound))

    return FeedbackPolicy(drift, abs(c) * max(1.0 + kappa * bound, kappa),
                          f"modulated feedback: {c:g}*m*(1 + {kappa:g}*clamp(y, {bound:g}))",
                          params={"c": c, "kappa": kappa, "bound": bound},
                          peak=abs(c) * (1.0 + kappa * bound))


def input_policy(gain: float = 1.0) -> FeedbackPolicy:
    """Memory channel without feedback: ``g = gain * W(s)`` for an input path ``W``."""
    def drift(s, w, y):
        return gain * w.at(s)
    return FeedbackPolicy(drift, abs(gain), f"input path: {gain:g}*W(s)", kind="input",
                          params={"gain": gain}, uses_feedback=False)


POLICY_CATALOG = {
    "zero": zero_policy,
    "constant": constant_policy,
    "message": message_policy,
    "ramp": ramp_policy,
    "linear": linear_feedback_policy,
    "clamped": clamped_feedback_policy,
    "sinusoidal": sinusoidal_feedback_policy,
    "modulated": modulated_feedback_policy,
}


def is_exactly_solvable(policy: FeedbackPolicy) -> bool:
    return policy.kind in ("linear", "waveform")


# -- simulation internals ---------------------------------------------------


def _batch_of(source, n_paths):
    if isinstance(source, SamplePath):
        shape = source.batch_shape
    elif isinstance(source, Message) or source is None:
        shape = ()
    else:
        shape = np.shape(source)
    if n_paths is not None:
        if shape not in ((), (n_paths,)):
            raise InvalidArgument(f"source batch {shape} does not match n_paths={n_paths}")
        return (int(n_paths),)
    return shape


def _source_views(source, grid: SamplingGrid, variant, shape):
    """Return ``view(i)``, the input argument handed to the drift at step ``i``."""
    if isinstance(source, SamplePath):
        if variant is not None and EmVariant.parse(variant).piecewise_input:
            coarse = restrict(source, grid).values
            times = grid.times
            return lambda i: History(times[: i + 1], coarse[..., : i + 1])
        if not source.grid.contains(grid):
            raise InvalidArgument("input path grid must contain the simulation grid")
        knot = np.searchsorted(source.times, grid.times)
        times, vals = source.times, source.values
        return lambda i: History(times[: knot[i] + 1], vals[..., : knot[i] + 1])
    if isinstance(source, Message):
        w = np.broadcast_to(np.float64(source.symbol), shape)
    elif source is None:
        w = np.zeros(shape)
    else:
        w = np.broadcast_to(np.asarray(source, float), shape)
    return lambda i: w


def _with_noise_batch(shape, noise):
    if noise is not None and shape == () and noise.batch_shape:
        return noise.batch_shape
    return shape


def _noise_increments(grid, rng, shape, noise):
    if noise is None:
        B = brownian_path(grid, rng, n_paths=shape[0] if shape else None).values
    else:
        if noise.grid != grid:
            noise = restrict(noise, grid)
        B = np.broadcast_to(noise.values, shape + (len(grid),))
    return B


def _step_integral(policy, variant, t0, h, w, y):
    s = t0 if variant.freezes_time else t0 + 0.5 * h
    return np.asarray(policy.drift(s, w, y), dtype=float) * h


def _check_finite(g, i):
    if not np.all(np.isfinite(g)):
        raise SimulationFault(f"drift returned a non-finite value at step {i}", step=i)


def _run_em(terms, grid, variant, B, shape):
    """Euler-Maruyama recursion for a sum of drift terms sharing one output."""
    times, h = grid.times, grid.steps
    n = grid.n
    D = np.zeros(shape + (n + 1,))
    Y = np.zeros(shape + (n + 1,))
    for i in range(n):
        yv = History(times[: i + 1], Y[..., : i + 1])
        inc = 0.0
        for policy, view in terms:
            inc = inc + _step_integral(policy, variant, times[i], h[i], view(i), yv)
        _check_finite(inc, i)
        D[..., i + 1] = D[..., i] + inc
        Y[..., i + 1] = D[..., i + 1] + B[..., i + 1]
    return Y


def simulate_em(policy: FeedbackPolicy, source, grid: SamplingGrid, variant, rng=None,
                n_paths: int | None = None, noise: SamplePath | None = None) -> SamplePath:
    """Euler-Maruyama approximation of the feedback/memory channel on ``grid``.

    Args:
        policy: Drift functional.
        source: :class:`Message` (its ``value`` is sent on every path), an
            array of message symbols (one per path), or an input
            :class:`SamplePath` on a grid containing ``grid``.
        grid: Simulation grid.
        variant: One of :class:`EmVariant`.
        rng: Stream for the Brownian increments (unused when ``noise`` is given).
        n_paths: Number of independent paths, or ``None`` for one path.
        noise: Optional Brownian path to drive the channel with.

    Returns:
        The output knots ``Y^(n)(t_i)``; use :func:`interpolate` for the
        piecewise-linear path between knots.

    Raises:
        SimulationFault: if the drift is non-finite; ``.step`` gives the step.
    """
    variant = EmVariant.parse(variant)
    shape = _with_noise_batch(_batch_of(source, n_paths), noise)
    B = _noise_increments(grid, rng, shape, noise)
    view = _source_views(source, grid, variant, shape)
    return SamplePath(grid, _run_em([(policy, view)], grid, variant, B, shape))


def _linear_params(policy):
    p = policy.params
    return p.get("offset", 0.0), p.get("message_gain", 0.0), p.get("feedback_gain", 0.0)


def increment_moments(policy: FeedbackPolicy, source, y: SamplePath, variant):
    """Conditional mean and variance of each output increment given the past.

    For an Euler-Maruyama variant the mean of step ``i`` is the drift
    integral replayed along the observed ``y`` and the variance is the step
    length.  For ``variant="sampled_exact"`` the exact transition of the
    continuous-time channel is used (closed-form class only).

    Returns:
        ``(mean, var)`` with ``mean`` of shape ``batch + (n,)`` and ``var``
        broadcastable to it.
    """
    grid = y.grid
    h = grid.steps
    if variant == "sampled_exact":
        if not is_exactly_solvable(policy):
            raise NotExactlySolvable(f"no closed-form transition for policy {policy.description!r}")
        shape = y.batch_shape
        if policy.kind == "waveform":
            F = policy.params["F"]
            w = _symbols(source, shape)
            dF = F(grid.times[1:]) - F(grid.times[:-1])
            return policy.params["gain"] * w[..., None] * dF, h
        offset, c, k = _linear_params(policy)
        if k == 0:
            # the same expression the Euler-Maruyama step evaluates, so the two
            # routes agree bit-for-bit on this class
            mean = replay_drift_integrals(policy, source, y, EmVariant.FROZEN_TIME)
            return mean, h
        w = _symbols(source, shape)
        target = (offset + c * w)[..., None] / k
        mean = -np.expm1(-k * h) * (target - y.values[..., :-1])
        return mean, -np.expm1(-2.0 * k * h) / (2.0 * k)
    return replay_drift_integrals(policy, source, y, variant), h


def _symbols(source, shape):
    if isinstance(source, Message):
        return np.broadcast_to(np.float64(source.symbol), shape)
    return np.broadcast_to(np.asarray(source, float), shape)


def replay_drift_integrals(policy: FeedbackPolicy, source, y: SamplePath, variant):
    """Per-step drift integrals of ``policy`` along an observed output ``y``.

    This is how a receiver evaluates the hypothesis ``source`` against a
    realised output: the drift is recomputed from the frozen output history.
    """
    variant = EmVariant.parse(variant)
    grid = y.grid
    shape = y.batch_shape
    view = _source_views(source, grid, variant, shape)
    times, h = grid.times, grid.steps
    out = np.empty(shape + (grid.n,))
    for i in range(grid.n):
        yv = History(times[: i + 1], y.values[..., : i + 1])
        g = _step_integral(policy, variant, times[i], h[i], view(i), yv)
        _check_finite(g, i)
        out[..., i] = g
    return out


def policy_values(policy: FeedbackPolicy, source, y: SamplePath, times=None):
    """Channel input ``X(s) = g(s, w, y stopped at the last knot <= s)``.

    Used as the estimation target: between knots the output history is the
    one frozen at the previous knot.
    """
    grid = y.grid
    times = grid.times if times is None else np.asarray(times, float)
    shape = y.batch_shape
    view = _source_views(source, grid, EmVariant.FROZEN_HISTORY, shape)
    out = np.empty(shape + (times.size,))
    knots = np.clip(np.searchsorted(grid.times, times, side="right") - 1, 0, grid.n)
    for j, (s, i) in enumerate(zip(times, knots)):
        yv = History(grid.times[: i + 1], y.values[..., : i + 1])
        out[..., j] = policy.drift(float(s), view(i), yv)
    return out


def simulate_exact_sampled(policy: FeedbackPolicy, source, grid: SamplingGrid, rng=None,
                           n_paths: int | None = None, noise: SamplePath | None = None) -> SamplePath:
    """Exact samples ``Y(t_0), ..., Y(t_n)`` of the continuous-time channel.

    Only the closed-form classes are accepted: drifts linear in the output
    (``offset + c*m - k*y``) and deterministic message waveforms.  With
    ``k = 0`` the output is ``int g ds + B`` evaluated pathwise, so a given
    ``noise`` path is honoured; with ``k > 0`` the exact Gaussian transition
    is sampled and ``noise`` is not accepted.

    Raises:
        NotExactlySolvable: for any other policy.
    """
    if not is_exactly_solvable(policy):
        raise NotExactlySolvable(
            f"policy {policy.description!r} has no closed-form solution; use simulate_em "
            "on a fine reference grid instead")
    shape = _batch_of(source, n_paths)
    if policy.kind == "linear" and _linear_params(policy)[2] != 0:
        if noise is not None:
            raise InvalidArgument("pathwise noise is not supported for output-linear feedback")
        offset, c, k = _linear_params(policy)
        gen = as_generator(rng)
        z = gen.standard_normal(shape + (grid.n,))
        h = grid.steps
        target = (offset + c * _symbols(source, shape)) / k
        decay = -np.expm1(-k * h)
        sd = np.sqrt(-np.expm1(-2.0 * k * h) / (2.0 * k))
        Y = np.zeros(shape + (grid.n + 1,))
        for i in range(grid.n):
            Y[..., i + 1] = Y[..., i] + decay[i] * (target - Y[..., i]) + sd[i] * z[..., i]
        return SamplePath(grid, Y)
    B = _noise_increments(grid, rng, shape, noise)
    if policy.kind == "waveform":
        F = policy.params["F"]
        dF = F(grid.times[1:]) - F(grid.times[:-1])
        inc = policy.params["gain"] * _symbols(source, shape)[..., None] * dF
    else:
        view = _source_views(source, grid, None, shape)
        inc = np.stack([_step_integral(policy, EmVariant.FROZEN_TIME, grid.times[i], grid.steps[i],
                                       view(i), None) * np.ones(shape)
                        for i in range(grid.n)], axis=-1)
    D = np.zeros(shape + (grid.n + 1,))
    for i in range(grid.n):
        D[..., i + 1] = D[..., i] + inc[..., i]
    return SamplePath(grid, D + B)


def _as_term(item, grid, variant, shape):
    if isinstance(item, SamplePath):
        return input_policy(), _source_views(item, grid, variant, shape)
    if isinstance(item, FeedbackPolicy):
        return item, _source_views(None, grid, variant, shape)
    policy, source = item
    return policy, _source_views(source, grid, variant, shape)


def simulate_mac(inputs, grid: SamplingGrid, rng=None, variant=EmVariant.FROZEN_TIME,
                 n_paths: int | None = None, noise: SamplePath | None = None) -> SamplePath:
    """Multiple-access channel: all senders' drifts add up over one shared noise.

    Args:
        inputs: Sequence whose items are input :class:`SamplePath` objects,
            bare :class:`FeedbackPolicy` objects, or ``(policy, source)``
            pairs.  Policies see the shared output history (feedback).
        grid, rng, variant, n_paths, noise: As in :func:`simulate_em`.
    """
    if len(inputs) < 1:
        raise InvalidArgument("a MAC needs at least one sender")
    variant = EmVariant.parse(variant)
    shape = ()
    for item in inputs:
        src = item if isinstance(item, SamplePath) else (item[1] if isinstance(item, tuple) else None)
        s = _batch_of(src, n_paths)
        shape = s if s else shape
        if isinstance(src, SamplePath) and not src.grid.contains(grid):
            raise InvalidArgument("MAC input grids must contain the simulation grid")
    if n_paths is not None:
        shape = (int(n_paths),)
    shape = _with_noise_batch(shape, noise)
    terms = [_as_term(item, grid, variant, shape) for item in inputs]
    B = _noise_increments(grid, rng, shape, noise)
    return SamplePath(grid, _run_em(terms, grid, variant, B, shape))


def simulate_bc(source, spec: ChannelSpec, grid: SamplingGrid, rng=None, variant=EmVariant.FROZEN_TIME,
                n_paths: int | None = None, policy: FeedbackPolicy | None = None) -> list[SamplePath]:
    """Broadcast channel ``Y_i = sqrt(snr_i) int X ds + B_i``.

    ``source`` is an input path (the transmitted waveform) or a message
    source for ``policy``; a policy sees the tuple of all receivers'
    histories as its output argument.  With ``spec.degraded = (N1, N2)``
    the outputs are ``Y_1 = int X + sqrt(N1) B_1`` and
    ``Y_2 = Y_1 + sqrt(N2) B_2`` with the same ``B_1`` in both.
    """
    if spec.role != "bc":
        raise InvalidArgument("simulate_bc needs a ChannelSpec with role='bc'")
    variant = EmVariant.parse(variant)
    shape = _batch_of(source, n_paths)
    gen = as_generator(rng)
    m = spec.receivers
    n = grid.n
    h = grid.steps
    z = gen.standard_normal((m,) + shape + (n,)) * np.sqrt(h)
    if spec.degraded is not None:
        n1, n2 = spec.degraded
        gains = np.ones(2)
    else:
        gains = np.sqrt(np.asarray(spec.snr, float))
        if spec.correlation is not None:
            vals, vecs = np.linalg.eigh(spec.correlation)
            L = vecs * np.sqrt(np.clip(vals, 0.0, None))
            z = np.tensordot(L, z, axes=(1, 0))
    if policy is None:
        if not isinstance(source, SamplePath):
            raise InvalidArgument("without a policy the BC source must be an input path")
        policy = input_policy()
    view = _source_views(source, grid, variant, shape)
    times = grid.times
    D = np.zeros(shape + (n + 1,))
    Ys = np.zeros((m,) + shape + (n + 1,))
    for i in range(n):
        yv = tuple(History(times[: i + 1], Ys[r, ..., : i + 1]) for r in range(m))
        inc = _step_integral(policy, variant, times[i], h[i], view(i), yv)
        _check_finite(inc, i)
        D[..., i + 1] = D[..., i] + inc
        if spec.degraded is not None:
            b1 = np.sqrt(n1) * z[0, ..., i]
            Ys[0, ..., i + 1] = Ys[0, ..., i] + inc + b1
            Ys[1, ..., i + 1] = Ys[1, ..., i] + inc + b1 + np.sqrt(n2) * z[1, ..., i]
        else:
            for r in range(m):
                Ys[r, ..., i + 1] = Ys[r, ..., i] + gains[r] * inc + z[r, ..., i]
    return [SamplePath(grid, Ys[r]) for r in range(m)]


@dataclass(frozen=True)
class PowerAudit:
    passed: Any
    measured: Any


def audit_power(x: SamplePath, P: float, T: float | None = None) -> PowerAudit:
    """Trapezoid estimate of ``(1/T) int_0^T x(s)^2 ds`` checked against ``P``."""
    T = x.grid.horizon if T is None else T
    measured = trapezoid(np.square(x.values), x.times, axis=-1) / T
    passed = measured <= P * (1.0 + 1e-9)
    if np.ndim(measured) == 0:
        return PowerAudit(bool(passed), float(measured))
    return PowerAudit(passed, measured)


@dataclass(frozen=True)
class LipschitzProbe:
    declared: float
    max_ratio: float
    pairs: int

    @property
    def flagged(self) -> bool:
        return self.max_ratio > 1.01 * self.declared


def probe_lipschitz(policy: FeedbackPolicy, grid: SamplingGrid, rng=None, pairs: int = 256,
                    message: Message | None = None) -> LipschitzProbe:
    """Largest observed ``|g1 - g2| / distance`` over random argument pairs.

    Histories are random Brownian-like paths stopped at a random knot,
    which is also the evaluation time; the distance is ``|s1 - s2|`` plus the sup distances of the stopped input
    and output paths.  That sup distance never exceeds the two-part path
    metric of the Lipschitz condition, so the probe errs towards flagging.
    Raises nothing; a policy above ``1.01 * declared`` is reported as flagged.
    """
    gen = as_generator(rng)
    message = message or Message(2)
    T = grid.horizon
    best = 0.0
    for _ in range(pairs):
        stops = gen.integers(0, grid.n + 1, size=2)
        s = grid.times[stops]
        ys = gen.standard_normal((2, grid.n)).cumsum(axis=1) * np.sqrt(grid.steps) * gen.uniform(0.1, 3.0)
        ys = np.concatenate([np.zeros((2, 1)), ys], axis=1) + gen.normal(0, 1, size=(2, 1))
        ext = ys.copy()
        for r in range(2):
            ext[r, stops[r] + 1:] = ys[r, stops[r]]
        if policy.kind == "input":
            ws = np.concatenate([np.zeros((2, 1)), gen.standard_normal((2, grid.n)).cumsum(axis=1)], axis=1)
            wext = ws.copy()
            for r in range(2):
                wext[r, stops[r] + 1:] = ws[r, stops[r]]
            w_args = [History(grid.times, wext[r]) for r in range(2)]
            dw = np.max(np.abs(wext[0] - wext[1]))
        else:
            idx = gen.integers(0, message.size, size=2)
            w_args = [np.float64(message.symbols[j]) for j in idx]
            dw = abs(w_args[0] - w_args[1])
        g = [float(np.asarray(policy.drift(float(s[r]), w_args[r], History(grid.times, ext[r])))) for r in range(2)]
        if not all(np.isfinite(g)):
            raise SimulationFault("drift returned a non-finite value during the Lipschitz probe")
        dist = abs(s[0] - s[1]) + dw + np.max(np.abs(ext[0] - ext[1]))
        if dist > 0:
            best = max(best, abs(g[0] - g[1]) / dist)
    return LipschitzProbe(policy.lipschitz, float(best), pairs)
