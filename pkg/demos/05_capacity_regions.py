# %% [markdown]
# # Capacity formulas and rate regions

# %%
import numpy as np

from bmchannel import (
    bandlimited_capacity,
    bc_region,
    degraded_bc_feedback_region,
    infinite_bandwidth_capacity,
    mac_region,
    sk_bc_report,
    sk_rate_series,
)

for omega in (1, 10, 100, 1e4):
    print(f"bandwidth {omega:>7g}: {bandlimited_capacity(2.0, omega):.6f} nats per unit time")
print("infinite bandwidth:", infinite_bandwidth_capacity(2.0))

# %% [markdown]
# ## Regions
#
# The MAC region is a box, the same with or without feedback.  The BC
# region is a simplex weighted by the receivers' SNRs.

# %%
mac = mac_region([2.0, 4.0])
print("MAC:", mac.describe(), "corners", mac.corners())
bc = bc_region(2.0, [1.0, 2.0])
print("BC: ", bc.describe(), "corners", bc.corners())
print("(1, 2) in MAC:", (1.0, 2.0) in mac, "  (1 + 1e-6, 2) in MAC:", (1.0 + 1e-6, 2.0) in mac)

# %% [markdown]
# For a physically degraded BC, feedback leaves the region unchanged; the
# function hands back the very same object.

# %%
r = degraded_bc_feedback_region(2.0, 1.0, 1.0)
print(r.describe(), "same object with feedback:", r is degraded_bc_feedback_region(2.0, 1.0, 1.0, feedback=True))

# %% [markdown]
# ## Feedback helps a symmetric BC
#
# A linear feedback scheme reaches `P (1 + rho*) / 4` per user, beyond the
# no-feedback sum rate `P / 2`.

# %%
rep = sk_bc_report(1.0)
print(rep)
print("symmetric feedback point inside the no-feedback region:",
      bc_region(1.0, [1.0, 1.0]).contains([rep.per_user_rate] * 2))
for delta in np.logspace(-1, -4, 4):
    print(f"round length {delta:.0e}: per-user rate {sk_rate_series(1.0, delta, 1000):.6f}")
