# %% [markdown]
# # Sample paths: grids, Brownian motion and OU inputs
#
# Everything random in the package is driven by an `RngStream`: a seed plus
# a stream index.  The same key always gives the same numbers, no matter
# how many threads ask for them.

# %%
import numpy as np

from bmchannel import (
    OUParams,
    RngStream,
    brownian_path,
    brownian_paths_nested,
    interpolate,
    make_grid,
    ou_path,
    restrict,
)

grid = make_grid(1.0, 8)
print("knots:", grid.times)

B = brownian_path(grid, RngStream(seed=42))
print("one Brownian path at the knots:", np.round(B.values, 3))

# %% [markdown]
# Batches are just a leading axis.  Increments over a step of length 1/8
# have variance 1/8.

# %%
batch = brownian_path(grid, RngStream(42, 1), n_paths=50_000)
print("increment variances:", np.round(batch.increments().var(axis=0), 4))

# %% [markdown]
# ## Nested refinement
#
# `brownian_paths_nested` builds a path on dyadic grids by Brownian-bridge
# refinement.  Every coarser level is an exact restriction of the finer one,
# which is what lets the convergence suites compare grids trial by trial.

# %%
levels = brownian_paths_nested(1.0, 5, RngStream(7), n_paths=2)
fine = levels[-1]
for p in levels[:4]:
    same = np.array_equal(restrict(fine, p.grid).values, p.values)
    print(f"n = {p.grid.n:3d}: coarse level equals restriction of the finest: {same}")

# %% [markdown]
# Between knots paths are linear interpolants.

# %%
print("B(0.3) on the level-5 path:", interpolate(fine, 0.3))

# %% [markdown]
# ## Ornstein-Uhlenbeck inputs
#
# Stationary OU paths are drawn from their exact Gaussian transitions.  A
# large mean-reversion rate makes the input nearly white, which is how an
# input of power P gets close to the infinite-bandwidth capacity P/2.

# %%
for a in (1.0, 50.0):
    x = ou_path(OUParams(a, P=2.0), make_grid(1.0, 100), RngStream(3), n_paths=20_000).values
    lag1 = np.corrcoef(x[:, 50], x[:, 51])[0, 1]
    print(f"a = {a:5.1f}: variance {x[:, 50].var():.3f}, one-step correlation {lag1:.3f}"
          f" (exact {np.exp(-a * 0.01):.3f})")
