# %% [markdown]
# # Mutual and directed information on sampling grids
#
# `mi_grid_density` scores every trial with exact product-Gaussian
# densities of the output increments, so its mean is the exact mutual
# information of the discretized channel (up to Monte Carlo error).

# %%
import numpy as np

from bmchannel import (
    EmVariant,
    Message,
    RngStream,
    bpsk_mi,
    converse_bound,
    directed_info_grid,
    i_mmse_check,
    mac_ou_mi_table,
    make_grid,
    message_policy,
    mi_duncan,
    mi_grid_density,
    mmse_from_samples,
    modulated_feedback_policy,
    ramp_policy,
    sinusoidal_feedback_policy,
)

msg = Message(2)
grid = make_grid(1.0, kind="dyadic", level=6)
est = mi_grid_density(msg, message_policy(1.0), grid, trials=10_000, rng=RngStream(1))
print(f"binary constant signal: {est.value:.4f} ± {est.stderr:.4f}  (exact {bpsk_mi(1.0):.4f})")

# %% [markdown]
# Duncan's formula gives the same number from the causal MMSE.

# %%
curve = mmse_from_samples(msg, message_policy(1.0), grid, trials=10_000, rng=RngStream(2))
print(f"Duncan route: {mi_duncan(curve.causal_integral):.4f} ± {0.5 * curve.causal_integral_se:.4f}")

# %% [markdown]
# ## Finer sampling, more information
#
# A ramp signal spreads its information over time, so coarse grids lose
# some of it.  Nested grids share the Brownian path, so differences between
# rows are mostly free of Monte Carlo noise, even though each row on its
# own carries the full standard error.

# %%
for level in (2, 4, 6, 8):
    g = make_grid(1.0, kind="dyadic", level=level)
    e = mi_grid_density(msg, ramp_policy(1.0), g, trials=10_000, rng=RngStream(3))
    print(f"n = {g.n:3d}: {e.value:.5f} ± {e.stderr:.5f}")
print(f"continuous-time limit: {bpsk_mi(1 / 3):.5f}")

# %% [markdown]
# ## Feedback and directed information
#
# With feedback, the directed information computed by a causal filter
# equals the message information on every grid, trial by trial.

# %%
for pol, variant in [(modulated_feedback_policy(), EmVariant.FROZEN_HISTORY),
                     (sinusoidal_feedback_policy(), EmVariant.FROZEN_TIME)]:
    d = mi_grid_density(msg, pol, grid, variant, 5000, RngStream(4))
    di = directed_info_grid(msg, pol, grid, 5000, RngStream(4), variant=variant)
    print(f"{pol.description}:\n  message MI {d.value:.5f}, directed {di.value:.5f},"
          f" largest per-trial gap {np.max(np.abs(d.samples - di.samples)):.1e},"
          f" converse bound {converse_bound(pol.peak ** 2, 1.0):.3f}")

# %% [markdown]
# ## I-MMSE
#
# `I_T(snr) / snr` decreases in snr, and the slope of `I_T` is half the
# integrated smoothed MMSE.

# %%
table = i_mmse_check(("ou", 10.0, 1.0), [0.5, 1, 2, 4, 8], T=5.0)
for r in table.rows:
    print(f"snr {r['snr']:4.1f}: I_T/snr = {r['I_T_over_snr']:.4f}")
row = i_mmse_check(("binary", 1.0), [1.0], T=1.0).rows[0]
print(f"binary: dI/dsnr = {row['dI_dsnr']:.6f}, half smoothed MMSE = {row['half_smoothed']:.6f}")

# %% [markdown]
# ## Two OU users on one channel
#
# Treating the other user as noise costs less and less as the inputs get
# faster.

# %%
for a in (5.0, 50.0, 500.0):
    t = mac_ou_mi_table(a, 1.0, 1.0, 5.0)
    print(f"a = {a:5.0f}: I(X1;Y|X2)/T = {t.conditional1:.4f}, I(X1;Y)/T = {t.marginal1:.4f}, gap {t.gap1:.5f}")
