# %% [markdown]
# # Filtering: Riccati variances, message posteriors and MMSE curves

# %%
import math

import numpy as np

from bmchannel import (
    Message,
    OUParams,
    RngStream,
    bpsk_mmse,
    make_grid,
    message_policy,
    mmse_from_samples,
    posterior_finite_message,
    ramp_policy,
    riccati_ou,
)
from bmchannel.estimation import simulate_outputs

# %% [markdown]
# ## OU input through an integrator
#
# The causal error variance solves `dS/dt = 2aP - 2aS - snr S^2`.  Half its
# integral is the exact mutual information, and a fast OU input gets close
# to the infinite-bandwidth capacity `P/2`.

# %%
sol = riccati_ou(OUParams(4.0, 2.0), snr=1.0, T=20.0)
print(f"steady state {sol.steady_state:.12f}, closed form {4 * math.sqrt(2) - 4:.12f}")

for a in (1.0, 10.0, 50.0, 500.0):
    rate = riccati_ou(OUParams(a, 2.0), 1.0, 5.0).mi_integral / 5.0
    print(f"a = {a:6.1f}: I_T / T = {rate:.4f} nats per unit time (limit 1)")

# %% [markdown]
# ## Posterior of a finite message
#
# With `g = c m` the last output value is sufficient and the log-odds of
# the two symbols is `2 c Y(T)`.

# %%
msg = Message(2)
idx, y = simulate_outputs(msg, message_policy(1.0), make_grid(1.0, 16), "sampled_exact",
                          RngStream(1).generator(), 5)
post = posterior_finite_message(msg, message_policy(1.0), y)
for k in range(5):
    print(f"sent {msg.symbols[idx[k]]:+.0f}  Y(1) = {y.values[k, -1]: .3f}  P(m=+1 | Y) = {post.probs[k, 1]:.3f}")

# %% [markdown]
# ## Causal and smoothed MMSE from sampled outputs
#
# The causal estimate of `X(s)` uses the knots up to `s`, the smoothed one
# all of them.  For a constant signal the smoothed error is flat and matches
# the scalar BPSK MMSE.

# %%
curve = mmse_from_samples(msg, message_policy(1.0), make_grid(1.0, 64), trials=5000, rng=RngStream(2))
print(f"smoothed integral {curve.smoothed_integral:.4f} ± {curve.smoothed_integral_se:.4f}"
      f"   oracle {bpsk_mmse(1.0):.4f}")
print(f"causal integral   {curve.causal_integral:.4f} ± {curve.causal_integral_se:.4f}")
print("causal MMSE at s = 0, 0.5, 1:", np.round(curve.causal[[0, 32, 64]], 4))

# %% [markdown]
# With a ramp signal `c m s / T`, more knots carry more information, so the
# smoothed error shrinks as the grid is refined.

# %%
for level in (1, 3, 6):
    g = make_grid(1.0, kind="dyadic", level=level)
    c = mmse_from_samples(msg, ramp_policy(1.0), g, eval_times=np.linspace(0, 1, 9), trials=5000,
                          rng=RngStream(3))
    print(f"n = {g.n:3d}: smoothed integral {c.smoothed_integral:.4f} ± {c.smoothed_integral_se:.4f}")
