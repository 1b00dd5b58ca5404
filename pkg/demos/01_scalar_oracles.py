# %% [markdown]
# # Scalar oracles
#
# Before trusting any fit on the elastic problem, we run the coefficient extraction on spectra
# whose asymptotics are known exactly: the interval `(0, pi)` and the unit disk.

# %%
import math

import numpy as np

from lamespec import DIRICHLET, NEUMANN
from lamespec import asymptotics as asy
from lamespec.exact_spectra import scalar_disk_spectrum, scalar_interval_spectrum

# %% [markdown]
# ## Interval
#
# `Z(t) = sum exp(-k^2 t)` behaves like `sqrt(pi)/(2 sqrt(t)) -+ 1/2`. The grid starts where the
# tail bound drops below `1e-3` of `Z` and spans two decades.

# %%
for bc in (DIRICHLET, NEUMANN):
    table = scalar_interval_spectrum(math.pi, bc, 100_000)
    series = asy.partition_function(table, asy.default_t_grid(table, 1), 1)
    fit = asy.fit_heat_coefficients(series, 1, 3, bc)
    print(f"{bc:>9}: a0 = {fit.a0:.10f} (exact {math.sqrt(math.pi) / 2:.10f}), a1 = {fit.a1:+.8f}")

# %% [markdown]
# ## Disk
#
# Bessel zeros up to `Lambda = 12000` give roughly 3000 eigenvalues. The planar scalar constants
# are `area/4pi`, `-perimeter/(4 sqrt(4pi))` and `1/6`.

# %%
disk = scalar_disk_spectrum(1.0, DIRICHLET, 12_000)
ref = asy.mckean_singer_reference(asy.disk_geometry())
series = asy.partition_function(disk, asy.default_t_grid(disk, 2), 2)
heat = asy.fit_heat_coefficients(series, 2, 3, DIRICHLET)
print(f"{disk.total_count} eigenvalues")
for name, unc in zip(("a0", "a1", "a2"), heat.uncertainty):
    print(f"  {name}: fitted {getattr(heat, name):+.6f} +- {unc:.1e}   reference {ref[name]:+.6f}")

# %% [markdown]
# The counting function oscillates around its two-term law. A Cesàro mean over `[3 Lambda/4, Lambda]`
# tames the oscillation before fitting.

# %%
counting = asy.fit_counting_coefficients(disk, 2, (3000.0, 12000.0), DIRICHLET)
print(f"counting: a0 = {counting.a0:.6f} (1/4), a1 = {counting.a1:+.4f} (-1/2)")
print("pointwise fit for comparison:", counting.extras["pointwise"])

# %% [markdown]
# Running the Laplace transform the other way turns the counting fit into a heat-trace model.
# It tracks the true trace to a fraction of a percent.

# %%
t = np.geomspace(1e-3, 1e-2, 5)
z_true = asy.partition_function(disk, t, 2).values
z_model = asy.tauberian_forward(counting, t).values
for ti, a, b in zip(t, z_true, z_model):
    print(f"t = {ti:.2e}: Z = {a:.6f}, from counting fit {b:.6f} ({(b / a - 1) * 100:+.3f}%)")
