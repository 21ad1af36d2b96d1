"""Closed-form capacities and capacity regions of white Gaussian channels.

Rates are in nats per unit time.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InvalidArgument, NoRootFault

__all__ = [
    "RateRegion",
    "FeedbackGainReport",
    "bandlimited_capacity",
    "infinite_bandwidth_capacity",
    "mac_region",
    "bc_region",
    "degraded_bc_feedback_region",
    "rho_star",
    "rho_star_residual",
    "sk_bc_report",
    "sk_rate_series",
]


def _positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise InvalidArgument(f"{name} must be positive and finite, got {v!r}")


def bandlimited_capacity(P: float, omega: float) -> float:
    """Capacity ``omega log(1 + P / (2 omega))`` of the band-limited channel."""
    _positive("power", P)
    _positive("bandwidth", omega)
    return omega * math.log1p(P / (2.0 * omega))


def infinite_bandwidth_capacity(P: float) -> float:
    """``P / 2``, the limit of the band-limited capacity as the bandwidth grows."""
    if not P >= 0:
        raise InvalidArgument(f"power must be >= 0, got {P!r}")
    return 0.5 * P


@dataclass(frozen=True)
class RateRegion:
    """Polytope ``{R >= 0 : c_k . R <= b_k for every constraint k}``.

    ``constraints`` is a tuple of ``(coefficients, bound)`` pairs with
    nonnegative coefficients and finite nonnegative bounds.
    """

    dimension: int
    constraints: tuple

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidArgument("region dimension must be >= 1")
        cons = []
        for coef, bound in self.constraints:
            coef = tuple(float(c) for c in coef)
            if len(coef) != self.dimension or any(not c >= 0 for c in coef):
                raise InvalidArgument("constraint coefficients must be nonnegative, one per user")
            if not (bound >= 0 and math.isfinite(bound)):
                raise InvalidArgument("constraint bounds must be finite and >= 0")
            cons.append((coef, float(bound)))
        object.__setattr__(self, "constraints", tuple(cons))

    def contains(self, rates, rtol: float = 1e-12) -> bool:
        """Membership with a relative slack of ``rtol`` for rounding only."""
        r = [float(v) for v in np.ravel(rates)]
        if len(r) != self.dimension or np.ndim(rates) != 1:
            raise InvalidArgument(f"expected {self.dimension} rates")
        if min(r) < 0:
            return False
        for coef, bound in self.constraints:
            lhs = math.fsum(c * v for c, v in zip(coef, r))
            if lhs > bound + rtol * max(bound, 1.0):
                return False
        return True

    __contains__ = contains

    def tight(self, rates, rtol: float = 1e-12):
        """Indices of the constraints that hold with equality at ``rates``."""
        r = np.asarray(rates, float)
        return [k for k, (coef, bound) in enumerate(self.constraints)
                if abs(math.fsum(c * v for c, v in zip(coef, r)) - bound) <= rtol * max(bound, 1.0)]

    def corners(self):
        """Vertices of the polytope, sorted lexicographically.

        Every choice of ``dimension`` active constraints (coordinate planes
        included) is solved in one batched call; nonsingular solutions that
        satisfy all constraints are the vertices.
        """
        m = self.dimension
        rows = np.vstack([np.eye(m)] + [np.asarray(c)[None] for c, _ in self.constraints])
        rhs = np.array([0.0] * m + [b for _, b in self.constraints])
        combos = np.array(list(itertools.combinations(range(len(rows)), m)))
        A, b = rows[combos], rhs[combos]
        keep = np.abs(np.linalg.det(A)) > 1e-12
        xs = np.linalg.solve(A[keep], b[keep][..., None])[..., 0]
        xs[np.abs(xs) < 1e-14] = 0.0
        found = {tuple(float(v) for v in x) for x in xs if self.contains(x, rtol=1e-9)}
        return sorted(found)

    def scaled(self, k: float) -> RateRegion:
        """Region with every bound multiplied by ``k``."""
        return RateRegion(self.dimension, tuple((c, b * k) for c, b in self.constraints))

    def describe(self, names=None):
        """Human-readable constraint strings such as ``"R1 + 0.5*R2 <= 1"``."""
        names = names or [f"R{j + 1}" for j in range(self.dimension)]
        out = []
        for coef, bound in self.constraints:
            terms = []
            for c, name in zip(coef, names):
                if c == 0:
                    continue
                terms.append(name if c == 1 else f"{c:g}*{name}")
            out.append(f"{' + '.join(terms)} <= {bound:g}")
        return out


def mac_region(P) -> RateRegion:
    """Box ``0 <= R_i <= P_i / 2``; feedback does not enlarge it."""
    P = [float(p) for p in np.atleast_1d(P)]
    if not P:
        raise InvalidArgument("need at least one user")
    for p in P:
        _positive("power", p)
    m = len(P)
    cons = tuple((tuple(1.0 if j == i else 0.0 for j in range(m)), 0.5 * p) for i, p in enumerate(P))
    return RateRegion(m, cons)


def _simplex(P, coefficients):
    return RateRegion(len(coefficients), ((tuple(coefficients), 0.5 * P),))


def bc_region(P: float, snr) -> RateRegion:
    """Simplex ``sum_i R_i / snr_i <= P / 2``.

    Raises:
        InvalidArgument: for a zero SNR; that receiver gets no rate and
            should be dropped by the caller.
    """
    _positive("power", P)
    snr = [float(s) for s in np.atleast_1d(snr)]
    if not snr:
        raise InvalidArgument("need at least one receiver")
    for s in snr:
        _positive("snr", s)
    return _simplex(P, [1.0 / s for s in snr])


@functools.lru_cache(maxsize=256)
def _degraded_region(P, N1, N2):
    # receiver noise levels N1 and N1 + N2 are the reciprocal SNRs of the broadcast form
    return _simplex(P, [N1, N1 + N2])


def degraded_bc_feedback_region(P: float, N1: float, N2: float, feedback: bool = False) -> RateRegion:
    """Capacity region of the physically degraded two-receiver BC.

    Receiver 1 sees noise level ``N1`` and receiver 2 ``N1 + N2``.  Feedback
    does not change the region, and the same object is returned for both
    settings of ``feedback``.
    """
    _positive("power", P)
    _positive("N1", N1)
    if not N2 > 0:
        raise InvalidArgument(f"N2 must be positive, got {N2!r}")
    return _degraded_region(float(P), float(N1), float(N2))


def rho_star_residual(rho: float, P: float) -> float:
    """``rho (1 + (P + 1)(1 + P (1 - rho) / 2)) - P (P + 2)(1 - rho) / 2``."""
    return rho * (1.0 + (P + 1.0) * (1.0 + P * (1.0 - rho) / 2.0)) - P * (P + 2.0) * (1.0 - rho) / 2.0


def rho_star(P: float) -> float:
    """Root in ``(0, 1)`` of the feedback correlation equation, by bisection.

    Raises:
        NoRootFault: if the residual does not change sign on ``[0, 1]``.
    """
    _positive("power", P)
    lo, hi = rho_star_residual(0.0, P), rho_star_residual(1.0, P)
    if not (lo < 0 < hi):
        raise NoRootFault(f"no sign change on [0, 1] for P={P!r}: f(0)={lo!r}, f(1)={hi!r}")
    root = optimize.bisect(rho_star_residual, 0.0, 1.0, args=(P,), xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=2000)
    if abs(rho_star_residual(root, P)) > 1e-12:
        raise NoRootFault(f"bisection stalled with residual {rho_star_residual(root, P)!r}")
    return float(root)


@dataclass(frozen=True)
class FeedbackGainReport:
    """Symmetric two-user broadcast rates with and without feedback."""

    P: float
    rho_star: float
    per_user_rate: float
    sum_rate: float
    no_feedback_sum: float
    gain: float

    @property
    def residual(self) -> float:
        return rho_star_residual(self.rho_star, self.P)


def sk_bc_report(P: float) -> FeedbackGainReport:
    """Rates ``P (1 + rho*) / 4`` per user of the linear feedback scheme for the symmetric BC."""
    rho = rho_star(P)
    per_user = P * (1.0 + rho) / 4.0
    return FeedbackGainReport(float(P), rho, per_user, 2.0 * per_user, 0.5 * P, 1.0 + rho)


def sk_rate_series(P: float, delta: float, steps: int, rho: float | None = None) -> float:
    """Per-time rate of one receiver after ``steps`` feedback rounds of length ``delta``.

    Every round contributes ``1/2 log(1 + (P delta (1 + rho)/2) / (1 + P delta (1 - rho)/2))``
    and the sum is divided by ``T = steps * delta``.  All rounds are equal,
    so the result does not depend on ``steps``; it rises to
    ``P (1 + rho) / 4`` as ``delta`` shrinks.
    """
    _positive("power", P)
    _positive("delta", delta)
    if int(steps) != steps or steps < 1:
        raise InvalidArgument("steps must be a positive integer")
    rho = rho_star(P) if rho is None else rho
    x = (P * delta * (1.0 + rho) / 2.0) / (1.0 + P * delta * (1.0 - rho) / 2.0)
    return 0.5 * math.log1p(x) / delta
