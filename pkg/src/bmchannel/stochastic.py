"""Sampling grids, sample paths and reproducible Brownian / Ornstein-Uhlenbeck paths.

Every random draw comes from a counter-based Philox generator keyed by
``(seed, stream, *substream)``, so a path is a pure function of its key and
the grid it lives on.  Paths may carry a leading batch axis: ``values`` has
shape ``(n + 1,)`` for a single path or ``(batch, n + 1)`` for a bundle of
independent paths sharing one grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, OutOfRange

__all__ = [
    "SamplingGrid",
    "SamplePath",
    "OUParams",
    "RngStream",
    "make_grid",
    "brownian_path",
    "brownian_paths_nested",
    "ou_path",
    "interpolate",
    "restrict",
]


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SamplingGrid:
    """Partition ``0 = t_0 < t_1 < ... < t_n = T`` of the observation window.

    ``kind`` records how the grid was built (``"equidistant"``, ``"dyadic"``
    or ``"custom"``); ``level`` is the refinement level of a dyadic grid.
    """

    times: np.ndarray
    kind: str = "custom"
    level: int | None = None

    def __post_init__(self):
        t = _readonly(self.times)
        if t.ndim != 1 or t.size < 2:
            raise InvalidArgument("a grid needs at least two time points")
        if t[0] != 0.0:
            raise InvalidArgument("grid must start at 0")
        if not np.all(np.diff(t) > 0):
            raise InvalidArgument("grid times must be strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def n(self) -> int:
        """Number of steps."""
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def max_step(self) -> float:
        return float(self.steps.max())

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, SamplingGrid):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __hash__(self):
        return hash(self.times.tobytes())

    def contains(self, other: SamplingGrid) -> bool:
        """True if every knot of ``other`` is also a knot of this grid."""
        return bool(np.isin(other.times, self.times).all())

    def __repr__(self):
        return f"SamplingGrid(n={self.n}, T={self.horizon:g}, kind={self.kind!r})"


def make_grid(T: float, n: int = 1, kind: str = "equidistant", level: int | None = None) -> SamplingGrid:
    """Build an equidistant or dyadic grid on ``[0, T]``.

    Args:
        T: Horizon, must be positive.
        n: Number of equal steps (ignored for ``kind="dyadic"``).
        kind: ``"equidistant"`` or ``"dyadic"``.
        level: Refinement level for dyadic grids; the grid has ``2**level``
            steps and its knots are a subset of the next level's knots.
    """
    if not T > 0 or not np.isfinite(T):
        raise InvalidArgument(f"horizon must be positive, got {T!r}")
    if kind == "dyadic":
        if level is None or level < 0:
            raise InvalidArgument("dyadic grids need a level >= 0")
        n = 2 ** int(level)
    elif kind != "equidistant":
        raise InvalidArgument(f"unknown grid kind {kind!r}")
    if int(n) != n or n < 1:
        raise InvalidArgument(f"number of steps must be a positive integer, got {n!r}")
    n = int(n)
    # i / n is correctly rounded, so grids whose sizes divide each other share knots exactly
    times = np.arange(n + 1) / n * T
    times[-1] = T
    return SamplingGrid(times, kind=kind, level=level if kind == "dyadic" else None)


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Values of one or more paths at the knots of ``grid``."""

    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        if v.shape[-1] != len(self.grid):
            raise InvalidArgument(
                f"path has {v.shape[-1]} values but grid has {len(self.grid)} points"
            )
        object.__setattr__(self, "values", v)

    @property
    def times(self):
        return self.grid.times

    @property
    def batch_shape(self):
        return self.values.shape[:-1]

    def increments(self):
        return np.diff(self.values, axis=-1)

    def __getitem__(self, idx):
        """Select paths from the batch axis."""
        return SamplePath(self.grid, self.values[idx])

    def __len__(self):
        return len(self.grid)


@dataclass(frozen=True)
class OUParams:
    """Stationary Ornstein-Uhlenbeck process ``dX = -a X dt + sqrt(2 a P) dB``."""

    a: float
    P: float

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidArgument(f"mean reversion must be positive, got {self.a!r}")
        if not self.P > 0:
            raise InvalidArgument(f"power must be positive, got {self.P!r}")


@dataclass(frozen=True)
class RngStream:
    """Key of a counter-based random stream.

    Identical keys give bit-identical variates; distinct keys give
    independent Philox streams.  ``child(j)`` derives a sub-stream, which is
    how Monte Carlo trial blocks get their own stream without coordination.
    """

    seed: int = 42
    stream: int = 0
    substream: tuple = field(default=())

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0 or self.seed >= 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")

    def child(self, j: int) -> RngStream:
        return RngStream(self.seed, self.stream, (*self.substream, int(j)))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *self.substream))
        key = ss.generate_state(2, dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(42 if rng is None else int(rng)).generator()
    raise InvalidArgument(f"cannot build a generator from {type(rng).__name__}")


def _shape(n_paths):
    return () if n_paths is None else (int(n_paths),)


def brownian_path(grid: SamplingGrid, rng, n_paths: int | None = None) -> SamplePath:
    """Standard Brownian motion sampled at the grid knots.

    Increments are independent ``N(0, t_{i+1} - t_i)``; ``B(0) = 0`` exactly.
    """
    gen = as_generator(rng)
    z = gen.standard_normal(_shape(n_paths) + (grid.n,))
    dB = z * np.sqrt(grid.steps)
    B = np.zeros(_shape(n_paths) + (len(grid),))
    np.cumsum(dB, axis=-1, out=B[..., 1:])
    return SamplePath(grid, B)


def brownian_paths_nested(T: float, max_level: int, rng, n_paths: int | None = None) -> list[SamplePath]:
    """One Brownian path observed on the dyadic grids of levels ``0..max_level``.

    The path is built coarse-to-fine: the endpoint first, then the midpoints
    of every interval by Brownian-bridge refinement.  Level ``k`` only
    consumes the draws of levels ``<= k``, so the level-``k`` path is
    bit-identical to the restriction of any finer level, and also to
    ``brownian_paths_nested(T, k, rng)[k]``.
    """
    if max_level < 0:
        raise InvalidArgument("max_level must be >= 0")
    gen = as_generator(rng)
    shape = _shape(n_paths)
    vals = np.zeros(shape + (2,))
    vals[..., 1] = np.sqrt(T) * gen.standard_normal(shape)
    out = [SamplePath(make_grid(T, kind="dyadic", level=0), vals)]
    for level in range(1, max_level + 1):
        half = T / 2**level
        z = gen.standard_normal(shape + (2 ** (level - 1),))
        mid = 0.5 * (vals[..., :-1] + vals[..., 1:]) + np.sqrt(half / 2.0) * z
        fine = np.empty(shape + (2**level + 1,))
        fine[..., 0::2] = vals
        fine[..., 1::2] = mid
        vals = fine
        out.append(SamplePath(make_grid(T, kind="dyadic", level=level), vals))
    return out


def ou_path(params: OUParams, grid: SamplingGrid, rng, n_paths: int | None = None) -> SamplePath:
    """Stationary OU path by exact Gaussian transitions.

    ``X(0) ~ N(0, P)`` and ``X(t + h) = exp(-a h) X(t) + sqrt(P (1 - exp(-2 a h))) xi``,
    so the marginal variance is ``P`` at every knot whatever the step size.
    """
    gen = as_generator(rng)
    shape = _shape(n_paths)
    z = gen.standard_normal(shape + (len(grid),))
    h = grid.steps
    decay = np.exp(-params.a * h)
    scale = np.sqrt(-params.P * np.expm1(-2.0 * params.a * h))
    x = np.empty(shape + (len(grid),))
    x[..., 0] = np.sqrt(params.P) * z[..., 0]
    for i in range(grid.n):
        x[..., i + 1] = decay[i] * x[..., i] + scale[i] * z[..., i + 1]
    return SamplePath(grid, x)


def interpolate(path: SamplePath, t):
    """Piecewise-linear value of ``path`` at time(s) ``t``; exact at knots."""
    times = path.times
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > times[-1]) or np.any(np.isnan(t_arr)):
        raise OutOfRange(f"t must lie in [0, {times[-1]:g}]")
    v = path.values
    if v.ndim == 1 and t_arr.ndim == 0:
        return float(np.interp(t_arr, times, v))
    j = np.clip(np.searchsorted(times, t_arr, side="right") - 1, 0, len(times) - 2)
    t0, t1 = times[j], times[j + 1]
    lam = (t_arr - t0) / (t1 - t0)
    v0, v1 = v[..., j], v[..., j + 1]
    out = v0 + lam * (v1 - v0)
    # knots are returned exactly, not through the affine blend
    at_knot = t_arr == t1
    return np.where(at_knot, v1, np.where(t_arr == t0, v0, out))


def restrict(path: SamplePath, grid: SamplingGrid) -> SamplePath:
    """Values of ``path`` at the knots of a coarser grid contained in its own."""
    idx = np.searchsorted(path.times, grid.times)
    idx = np.clip(idx, 0, len(path.times) - 1)
    if not np.array_equal(path.times[idx], grid.times):
        raise InvalidArgument("target grid is not contained in the path's grid")
    return SamplePath(grid, path.values[..., idx])
