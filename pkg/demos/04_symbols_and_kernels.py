# %% [markdown]
# # Symbols and image kernels
#
# Two local ingredients behind the heat-trace coefficients:
#
# - the lower-order resolvent symbols on a curved metric;
# - the reflected heat kernel that produces the boundary term.

# %%
import numpy as np

from lamespec import DIRICHLET, NEUMANN, ElasticModuli
from lamespec import symbols as sym
from lamespec.image_kernels import HeatKernel1D, halfline_trace_remainder

moduli = ElasticModuli(1.0, 0.5)
metric = sym.synthetic_metric(2, eps=0.1)
rng = np.random.default_rng(0)

# %% [markdown]
# On a non-flat metric `q-3` is nonzero but its trace is odd in `xi`. It therefore integrates to
# nothing over frequency space. `q-4` has an even trace.

# %%
for _ in range(3):
    x, xi = 0.3 * rng.standard_normal(2), rng.standard_normal(2)
    tau = -1.0 + 0.4j
    t3 = [np.trace(sym.q_minus_3(moduli, metric, x, s * xi, tau)) for s in (1, -1)]
    t4 = [np.trace(sym.q_minus_4(moduli, metric, x, s * xi, tau)) for s in (1, -1)]
    print(f"Tr q-3(+xi) = {t3[0]:.3e}, Tr q-3(-xi) = {t3[1]:.3e};  Tr q-4 difference {abs(t4[0] - t4[1]):.1e}")

# %% [markdown]
# The terms of the second-level composition, one per admissible `(k, j, |alpha|)`.

# %%
terms = sym.q_minus_4_terms(moduli, metric, np.array([0.2, -0.1]), np.array([0.7, 0.4]), -1.0 + 0.4j)
for (k, j, a, label), value in zip(sym.Q4_TERMS, terms):
    print(f"(k={k}, j={j}, |alpha|={a}) {label:<48} |term| = {np.abs(value).max():.3e}")

# %% [markdown]
# The diagonal of the half-line kernel, integrated over `(0, a)`, exceeds or falls short of the
# bulk value `a / sqrt(4 pi t)` by exactly a quarter. This is the one-dimensional form of the
# boundary factor in the two-term heat expansion.

# %%
for bc in (DIRICHLET, NEUMANN):
    k = HeatKernel1D(1.0, "halfline", bc_left=bc)
    print(bc, [round(halfline_trace_remainder(k, t, 1.0), 12) for t in (1e-2, 1e-3, 1e-4)])

# %% [markdown]
# The closed forms of the two brackets match direct quadrature over the branches of the
# principal symbol.

# %%
for t in (0.1, 1.0, 10.0):
    print(f"t = {t}: interior {sym.interior_heat_density(moduli, 2, t):.10f} vs "
          f"{sym.interior_heat_density_quadrature(moduli, 2, t):.10f};  boundary "
          f"{sym.boundary_image_term(moduli, 2, t):.10f} vs {sym.boundary_image_quadrature(moduli, 2, t):.10f}")
