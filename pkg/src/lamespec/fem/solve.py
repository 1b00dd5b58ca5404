"""Generalized eigenvalue solves and mesh-convergence studies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ConfigError, FactorizationError, NumericsError
from ..moduli import ElasticModuli
from ..spectrum import SpectrumTable
from .assemble import DiscreteEigenproblem, assemble
from .mesh import QUADRATIC, generate_disk_mesh, generate_square_mesh

DENSE_LIMIT = 6000
RESIDUAL_TOL = 1e-8
RELIABLE_TOL = 0.01


@dataclass
class EigenSolution:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    method: str


def _residuals(K, M, tau, V):
    KV, MV = K @ V, M @ V
    num = np.linalg.norm(KV - MV * tau, axis=0)
    den = np.linalg.norm(KV, axis=0) + np.abs(tau) * np.linalg.norm(MV, axis=0)
    # rigid modes have K u ~ 0 and are measured against the operator norm instead
    knorm = abs(K).sum(axis=1).max()
    mnorm = abs(M).sum(axis=1).max()
    rigid = np.abs(tau) * mnorm < 1e-10 * knorm
    return num / np.where(rigid, knorm * np.linalg.norm(V, axis=0), den)


def _dense(K, M, count):
    Kd, Md = K.toarray(), M.toarray()
    try:
        L = la.cholesky(Md, lower=True)
    except la.LinAlgError as exc:
        raise FactorizationError("mass matrix is not positive definite") from exc
    X = la.solve_triangular(L, Kd, lower=True)
    C = la.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)  # cancel rounding asymmetry of the two triangular solves
    w, Y = la.eigh(C, subset_by_index=[0, count - 1], driver="evr")
    V = la.solve_triangular(L.T, Y, lower=False)
    return w, V


def _shift_invert(K, M, count, sigma):
    n = K.shape[0]
    try:
        spla.splu(M.tocsc())
    except RuntimeError as exc:
        raise FactorizationError("mass matrix is singular") from exc
    v0 = np.cos(np.arange(n) * 0.7548776662466927)  # fixed start vector
    w, V = spla.eigsh(K.tocsc(), k=count, M=M.tocsc(), sigma=sigma, which="LM", v0=v0, tol=1e-13)
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def generalized_eigen(K, M, count: int, sigma: float | None = None) -> EigenSolution:
    """Smallest ``count`` eigenpairs of ``K u = tau M u``.

    Up to ``DENSE_LIMIT`` unknowns the pencil is reduced with a Cholesky
    factor of ``M`` and solved densely; larger problems use shift-invert
    Lanczos with a fixed start vector so results stay reproducible.
    """
    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    n = K.shape[0]
    if not 1 <= count <= n:
        raise ConfigError(f"count must lie in [1, {n}], got {count}")
    if n <= DENSE_LIMIT:
        w, V, method = *_dense(K, M, count), "dense"
    else:
        if sigma is None:
            sigma = -1e-3 * abs(K.diagonal() / M.diagonal()).min()
        w, V, method = *_shift_invert(K, M, count, sigma), "shift-invert"
    res = _residuals(K, M, w, V)
    if res.max() > RESIDUAL_TOL:
        k = int(np.argmax(res))
        raise NumericsError(f"eigenpair {k} residual {res[k]:.2e} exceeds {RESIDUAL_TOL:g}")
    return EigenSolution(w, V, res, method)


def solve_eigen(problem: DiscreteEigenproblem, count: int, coarse: SpectrumTable | None = None,
                order: float = 4.0, ratio: float = 2.0) -> SpectrumTable:
    """FEM spectrum table of ``problem``.

    With ``coarse`` (the same problem on a mesh ``ratio`` times coarser) the
    error of each eigenvalue is estimated by Richardson's rule and
    ``max_reliable`` is the last eigenvalue before the first estimate above 1%.
    Without it, every returned eigenvalue is taken as reliable.
    """
    sol = generalized_eigen(problem.stiffness, problem.mass, count)
    tau = sol.eigenvalues
    top = float(tau[-1])
    if coarse is not None:
        tc = coarse.expanded()[:count]
        m = min(tc.size, tau.size)
        err = np.abs(tc[:m] - tau[:m]) / (ratio ** order - 1)
        rel = err / np.maximum(np.abs(tau[:m]), 1e-300)
        rel[np.abs(tau[:m]) < 1e-8 * max(top, 1.0)] = 0.0  # rigid modes
        bad = np.nonzero(rel >= RELIABLE_TOL)[0]
        last = (bad[0] if bad.size else m) - 1
        top = float(tau[last]) if last >= 0 else 0.0
    return SpectrumTable(tau, np.ones(tau.size, dtype=int), problem.bc, "fem", top)


@dataclass
class ConvergenceReport:
    hs: list
    levels: np.ndarray  # (levels, count)
    extrapolated: np.ndarray
    orders: np.ndarray
    flags: list = field(default_factory=list)
    dimensions: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "h": [float(h) for h in self.hs],
            "dimensions": [int(d) for d in self.dimensions],
            "levels": self.levels.tolist(),
            "extrapolated": self.extrapolated.tolist(),
            "orders": [None if not np.isfinite(o) else float(o) for o in self.orders],
            "flags": list(self.flags),
        }


def build_mesh(domain, h: float, element_order: str = QUADRATIC):
    """``domain`` is ``("disk", radius)`` or ``("square", side)``."""
    kind, size = domain
    if kind == "disk":
        return generate_disk_mesh(size, h, element_order)
    if kind == "square":
        return generate_square_mesh(size, h, element_order)
    raise ConfigError(f"unknown domain {kind!r}")


def convergence_study(moduli: ElasticModuli, domain, bc: str, hs, count: int = 1,
                      element_order: str = QUADRATIC, zero_tol: float = 1e-8) -> ConvergenceReport:
    """Solve on each mesh level and extrapolate from the three finest levels.

    The observed order is ``log(d1/d2) / log(h1/h2)`` for consecutive
    differences ``d``; non-monotone sequences are flagged and the finest value
    is kept as the estimate.
    """
    hs = [float(h) for h in hs]
    if len(hs) < 3:
        raise ConfigError("a convergence study needs at least 3 mesh levels")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("mesh sizes must decrease")
    levels, dims = [], []
    for h in hs:
        prob = assemble(moduli, build_mesh(domain, h, element_order), bc)
        dims.append(prob.dimension)
        levels.append(generalized_eigen(prob.stiffness, prob.mass, count).eigenvalues)
    L = np.array(levels)
    l1, l2, l3 = L[-3], L[-2], L[-1]
    r1, r2 = hs[-3] / hs[-2], hs[-2] / hs[-1]
    d1, d2 = l1 - l2, l2 - l3
    ext = l3.copy()
    orders = np.full(count, np.nan)
    flags = []
    scale = max(float(np.abs(l3).max()), 1.0)
    for k in range(count):
        if abs(l3[k]) < zero_tol * scale and abs(l2[k]) < zero_tol * scale:
            flags.append(f"mode {k}: zero eigenvalue")
            ext[k] = 0.0 if abs(l3[k]) < 1e-10 else l3[k]
            continue
        if d1[k] * d2[k] <= 0 or abs(d2[k]) >= abs(d1[k]):
            flags.append(f"mode {k}: non-monotone error sequence")
            continue
        p = np.log(abs(d1[k]) / abs(d2[k])) / np.log(0.5 * (r1 + r2))
        orders[k] = p
        ext[k] = l3[k] - d2[k] / (r2 ** p - 1)
    return ConvergenceReport(hs, L, ext, orders, flags, dims)
