# %% [markdown]
# # Simulating the white Gaussian channel with feedback
#
# The channel output is `Y(t) = int_0^t g(s, W, Y_0^s) ds + B(t)`.  A
# `FeedbackPolicy` is the drift `g`; it can look at the message and at the
# output history.

# %%
import math

import numpy as np
from scipy.signal import lfilter

from bmchannel import (
    ChannelSpec,
    EmVariant,
    Message,
    OUParams,
    POLICY_CATALOG,
    RngStream,
    audit_power,
    brownian_path,
    clamped_feedback_policy,
    interpolate,
    linear_feedback_policy,
    make_grid,
    ou_path,
    probe_lipschitz,
    restrict,
    simulate_bc,
    simulate_em,
    simulate_exact_sampled,
    simulate_mac,
    sinusoidal_feedback_policy,
)

print("built-in policies:", ", ".join(POLICY_CATALOG))

# %% [markdown]
# ## Four Euler-Maruyama variants
#
# They differ in what is frozen over a step: the time argument, the
# output history, or the message/input path.  A policy whose drift does not
# depend on time, such as clamped feedback, gives the same path under all
# four; a time-varying carrier separates the time-freezing variants.

# %%
grid = make_grid(1.0, 64)
noise = brownian_path(grid, RngStream(1))
policy = clamped_feedback_policy(c=1.0, kappa=0.5, bound=1.0)
carrier = sinusoidal_feedback_policy(c=1.0, kappa=0.5, bound=1.0, freq=1.0)
for v in EmVariant:
    y = simulate_em(policy, Message(2, value=1), grid, v, noise=noise)
    z = simulate_em(carrier, Message(2, value=1), grid, v, noise=noise)
    print(f"{v.value:22s} clamped Y(1) = {y.values[-1]: .6f}   sinusoidal Y(1) = {z.values[-1]: .6f}")

# %% [markdown]
# Closed-form policies can also be sampled exactly at the knots.  Clamped
# feedback is not in that class and is refused.

# %%
exact = simulate_exact_sampled(linear_feedback_policy(k=1.0, c=1.0), Message(2, value=1), grid, RngStream(2))
print("exact OU-type output at T:", exact.values[-1])
try:
    simulate_exact_sampled(policy, Message(2), grid, RngStream(2))
except Exception as err:
    print(type(err).__name__, "-", err)

# %% [markdown]
# ## Strong convergence
#
# For `g = -Y` the channel is an OU process we can solve on a very fine
# grid with an exponential integrator.  The sup error, including between
# knots, falls roughly like the square root of the step.

# %%
ref_n = 64 * 1000
fine = make_grid(1.0, ref_n)
e = math.exp(-1.0 / ref_n)
errs = {n: [] for n in (10, 100, 1000)}
for p in range(8):
    B = brownian_path(fine, RngStream(5, 0, (p,)))
    Y = np.concatenate([[0.0], lfilter([e], [1.0, -e], np.diff(B.values))])
    for n in errs:
        g = make_grid(1.0, n)
        y = simulate_em(linear_feedback_policy(1.0), None, g, EmVariant.FROZEN_HISTORY, noise=restrict(B, g))
        errs[n].append(np.max(np.abs(interpolate(y, fine.times) - Y)))
for n, v in errs.items():
    print(f"n = {n:5d}: RMS sup error {math.sqrt(np.mean(np.square(v))):.4f}")

# %% [markdown]
# ## Checking a policy's assumptions
#
# `audit_power` measures the time-averaged input power, `probe_lipschitz`
# looks for drift variation above the declared Lipschitz constant.

# %%
x = ou_path(OUParams(50.0, 2.0), make_grid(5.0, 5000), RngStream(8), n_paths=200)
print("mean measured OU power:", np.mean(audit_power(x, 2.0).measured))
print(probe_lipschitz(policy, grid, RngStream(9)))

# %% [markdown]
# ## Several users
#
# A MAC adds the senders' drifts on one output; a BC gives every receiver
# its own noise (or, when degraded, receiver 2 sees receiver 1's output
# plus more noise).

# %%
g = make_grid(1.0, 200)
x1 = ou_path(OUParams(10.0, 1.0), g, RngStream(10, 0))
x2 = ou_path(OUParams(10.0, 1.0), g, RngStream(10, 1))
y = simulate_mac([x1, x2], g, RngStream(10, 2))
print("MAC output at T:", y.values[-1])
Y1, Y2 = simulate_bc(x1, ChannelSpec("bc", degraded=(1.0, 0.0)), g, RngStream(11))
print("degraded BC with no extra noise gives identical outputs:", np.array_equal(Y1.values, Y2.values))
