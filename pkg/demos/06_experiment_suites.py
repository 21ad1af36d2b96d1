# %% [markdown]
# # Experiment suites from Python and from the shell
#
# The `bmchannel` command wraps the suites in `bmchannel.experiments`.
# Each suite returns a `ResultTable` whose boolean columns are the checks;
# the command exits with status 2 if any of them is false.
#
#     bmchannel converge sampling --trials 20000
#     bmchannel converge approx --policy clamped --grid-sizes 32,64,128,256
#     bmchannel mac-demo --format json
#
# The same thing from Python:

# %%
from bmchannel import experiments as ex
from bmchannel.cli import main, render

cfg = ex.make_config({}, {"policy": "modulated", "grid_sizes": "16,32,64", "trials": 2000,
                          "variants": "em_frozen_history,em_frozen_time"})
table = ex.converge_approx(cfg)
print(render(table))
print("all checks passed:", table.passed)

# %% [markdown]
# Results depend only on the config and the seed.  Worker threads take
# whole blocks of 1000 trials, each with its own random stream, so the
# output is byte-identical for any worker count.

# %%
one = render(ex.converge_sampling(ex.make_config({}, {"trials": 3000, "workers": 1})))
four = render(ex.converge_sampling(ex.make_config({}, {"trials": 3000, "workers": 4})))
print("identical CSV with 1 and 4 workers:", one == four)

# %% [markdown]
# The command-line entry point can also be called directly.

# %%
status = main(["capacity", "sk-gain", "--power", "1"])
print("exit status", status)
