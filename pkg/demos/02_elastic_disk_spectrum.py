# %% [markdown]
# # The elastic disk: two independent spectra
#
# The disk's Lamé spectrum comes from two unrelated routes. The first is the roots of Bessel
# determinants. The second is a quadratic finite-element discretization. Their agreement is
# what makes the larger dispersion tables trustworthy.

# %%
import numpy as np

from lamespec import DIRICHLET, NEUMANN, ElasticModuli
from lamespec.exact_spectra import elastic_disk_spectrum
from lamespec.fem import assemble, convergence_study, generate_disk_mesh, solve_eigen

steel_like = ElasticModuli(mu=1.0, lam=0.0)

# %%
mesh = generate_disk_mesh(1.0, 0.05, "quadratic")
print(f"mesh: {mesh.n_nodes} nodes, {len(mesh.triangles)} triangles, area error {mesh.area() - np.pi:.1e}")
for bc in (DIRICHLET, NEUMANN):
    fem = solve_eigen(assemble(steel_like, mesh, bc), 20).expanded()
    exact = elastic_disk_spectrum(steel_like, 1.0, bc, 1.2 * fem[-1]).expanded()[:20]
    pos = exact > 0
    rel = np.abs(fem[pos] - exact[pos]) / exact[pos]
    print(f"{bc:>9}: lowest {exact[pos][:4].round(4)} ... worst relative gap {rel.max():.1e}")

# %% [markdown]
# The traction-free table starts with three zero eigenvalues: two translations and one rotation.
# For a fixed index, traction-free eigenvalues never exceed clamped ones.

# %%
d = elastic_disk_spectrum(steel_like, 1.0, DIRICHLET, 400).expanded()
n = elastic_disk_spectrum(steel_like, 1.0, NEUMANN, 400).expanded()
m = min(d.size, n.size)
print("first traction-free values:", n[:5].round(6))
print("bracketing holds:", bool(np.all(n[:m] <= d[:m])))

# %% [markdown]
# Mesh refinement of the lowest clamped mode. Isoparametric quadratic elements converge at
# roughly fourth order.

# %%
study = convergence_study(steel_like, ("disk", 1.0), DIRICHLET, [0.2, 0.1, 0.05])
print("levels:", study.levels[:, 0], "order:", study.orders[0].round(2), "extrapolated:", study.extrapolated[0])

# %% [markdown]
# Weyl's law. The leading coefficient is `(1/(4 pi mu) + 1/(4 pi (2 mu + lam))) * area = 0.375`.
# The boundary term is negative for clamped disks and decays like `Lambda^{-1/2}` relative to
# the leading term. So `N/Lambda` creeps toward 0.375 from below.

# %%
table = elastic_disk_spectrum(steel_like, 1.0, DIRICHLET, 25_000)
for lam in (2_000, 8_000, 25_000):
    print(f"Lambda = {lam:>6}: N = {table.count(lam):>5}, N/Lambda = {table.count(lam) / lam:.5f}")
