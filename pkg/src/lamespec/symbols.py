"""Matrix symbol calculus for the resolvent of the Lamé operator.

Conventions (pinned here and nowhere else):

* Fourier sign ``d/dx_l <-> i xi_l``; ``D_x = -i d/dx``.
* ``P = -mu Delta_g - (lam + mu) grad div - mu Ric`` in the coordinate form of
  the rough Laplacian; ``a_k`` are the order-``k`` pieces of the full symbol of
  ``tau I - P`` (``a_2 = tau I - p_2``).
* Symbols act on contravariant components ``u^j``; matrix row = ``j``, column = ``s``.
* ``q_{-2-l}`` is homogeneous of degree ``-2-l`` under ``(xi, tau) -> (s xi, s^2 tau)``.

The composition recursion for ``(tau I - P) o Q = I`` at level two has five
admissible index triples ``(k, j, |alpha|)``; :data:`Q4_TERMS` lists them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import ConditioningError, ConfigError, DifferentiationError, IntegrationError
from .jets import Jet, stack
from .moduli import ElasticModuli

BACKENDS = ("jet", "fd")
FOURIER_SIGN = "+i x.xi"

Q4_TERMS = (
    (0, 0, 0, "a0 q-2"),
    (1, 0, 1, "sum_l d_xi_l a1 D_x_l q-2"),
    (1, 1, 0, "a1 q-3"),
    (2, 0, 2, "sum_|alpha|=2 d^alpha_xi a2 D^alpha_x q-2 / alpha!"),
    (2, 1, 1, "sum_l d_xi_l a2 D_x_l q-3"),
)


def enumerate_q4_terms(max_j: int = 1):
    """Admissible ``(k, j, |alpha|)`` with ``j + |alpha| - k = 0``, ``j <= max_j``, ``k <= 2``."""
    return [(k, j, k - j) for k in range(3) for j in range(max_j + 1) if k - j >= 0]


# ---------------------------------------------------------------------------
# metrics


@dataclass
class MetricField:
    """Inverse metric ``g^{jk}(x)`` with first and second coordinate derivatives.

    ``evaluator(x)`` returns ``(g, dg, d2g)`` with shapes ``(n, n)``,
    ``(n, n, n)`` and ``(n, n, n, n)``; derivative axes come first.
    """

    dimension: int
    evaluator: Callable
    name: str = "custom"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ConfigError(f"point must have {self.dimension} coordinates")
        g, dg, d2g = (np.asarray(a, dtype=float) for a in self.evaluator(x))
        if not np.allclose(g, g.T, rtol=0, atol=1e-14) or np.linalg.eigvalsh(g).min() <= 0:
            raise ConfigError(f"inverse metric is not symmetric positive definite at {x.tolist()}")
        return g, dg, d2g

    @property
    def is_flat(self) -> bool:
        return self.name == "flat"


def flat_metric(n: int) -> MetricField:
    def ev(x):
        return np.eye(n), np.zeros((n, n, n)), np.zeros((n, n, n, n))

    return MetricField(n, ev, "flat")


def synthetic_metric(n: int, eps: float = 0.1) -> MetricField:
    """``g^{jk} = delta^{jk} + eps x_1 delta^{j1} delta^{k1}`` (first coordinate is ``x_1``)."""

    def ev(x):
        g = np.eye(n)
        g[0, 0] += eps * x[0]
        dg = np.zeros((n, n, n))
        dg[0, 0, 0] = eps
        return g, dg, np.zeros((n, n, n, n))

    return MetricField(n, ev, f"synthetic(eps={eps:g})")


def christoffel(metric: MetricField, x):
    """``Gamma^i_{kl}`` and ``d_p Gamma^i_{kl}`` (derivative axis first)."""
    gi, dgi, d2gi = metric(x)
    gl = np.linalg.inv(gi)
    dgl = -np.einsum("ab,pbc,cd->pad", gl, dgi, gl)
    d2gl = -(np.einsum("qab,pbc,cd->pqad", dgl, dgi, gl)
             + np.einsum("ab,pqbc,cd->pqad", gl, d2gi, gl)
             + np.einsum("ab,pbc,qcd->pqad", gl, dgi, dgl))
    # S[m,k,l] = d_k g_ml + d_l g_mk - d_m g_kl
    S = np.einsum("kml->mkl", dgl) + np.einsum("lmk->mkl", dgl) - dgl
    dS = np.einsum("pkml->pmkl", d2gl) + np.einsum("plmk->pmkl", d2gl) - d2gl
    gam = 0.5 * np.einsum("im,mkl->ikl", gi, S)
    dgam = 0.5 * (np.einsum("pim,mkl->pikl", dgi, S) + np.einsum("im,pmkl->pikl", gi, dS))
    return gam, dgam


def ricci_mixed(metric: MetricField, x) -> np.ndarray:
    """``R^j_s = g^{jm} R_{ms}`` from the Christoffel symbols."""
    gi = metric(x)[0]
    G, dG = christoffel(metric, x)
    # R_{sv} = d_r G^r_{vs} - d_v G^r_{rs} + G^r_{rl} G^l_{vs} - G^r_{vl} G^l_{rs}
    R = (np.einsum("rrvs->sv", dG) - np.einsum("vrrs->sv", dG)
         + np.einsum("rrl,lvs->sv", G, G) - np.einsum("rvl,lrs->sv", G, G))
    return gi @ R


# ---------------------------------------------------------------------------
# pointwise symbols


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ConfigError("xi must be nonzero")
    return xi


def principal_symbol(moduli: ElasticModuli, metric: MetricField, x, xi) -> np.ndarray:
    xi = _check_xi(xi)
    g = metric(x)[0]
    w = g @ xi
    return moduli.mu * (xi @ w) * np.eye(metric.dimension) + (moduli.mu + moduli.lam) * np.outer(w, xi)


def _pole_check(moduli, tau, r2):
    for pole in (moduli.mu * r2, (2 * moduli.mu + moduli.lam) * r2):
        if abs(tau - pole) < 1e-10 * abs(tau):
            raise ConditioningError(f"tau={tau} is within 1e-10 relative of the pole {pole:.6g}")


def resolvent_principal(moduli: ElasticModuli, metric: MetricField, x, xi, tau) -> np.ndarray:
    """``q_{-2} = (tau I - p_2)^{-1}`` via the rank-one (Sherman-Morrison) structure."""
    xi = _check_xi(xi)
    g = metric(x)[0]
    w = g @ xi
    r2 = float(xi @ w)
    _pole_check(moduli, tau, r2)
    alpha = tau - moduli.mu * r2
    beta = moduli.mu + moduli.lam
    n = metric.dimension
    return (np.eye(n) + beta * np.outer(w, xi) / (tau - (2 * moduli.mu + moduli.lam) * r2)) / alpha


def resolvent_trace(moduli: ElasticModuli, n: int, r2: float, tau) -> complex:
    """Partial-fraction form of ``Tr q_{-2}`` at ``|xi|_g^2 = r2``."""
    return (n - 1) / (tau - moduli.mu * r2) + 1 / (tau - moduli.pressure_speed2 * r2)


def first_order_symbol(moduli: ElasticModuli, metric: MetricField, x, xi) -> np.ndarray:
    """``a_1(x, xi)`` from the Christoffel terms of the coordinate representation."""
    gi = metric(x)[0]
    G, _ = christoffel(metric, x)
    return _a1(moduli, gi, G, np.asarray(xi, dtype=float))


def zeroth_order_symbol(moduli: ElasticModuli, metric: MetricField, x) -> np.ndarray:
    gi = metric(x)[0]
    G, dG = christoffel(metric, x)
    mu, lpm = moduli.mu, moduli.mu + moduli.lam
    rough = (np.einsum("kl,kjsl->js", gi, dG)
             + np.einsum("kl,jhl,hsk->js", gi, G, G)
             - np.einsum("kl,jsh,hkl->js", gi, G, G))
    graddiv = np.einsum("jm,mkks->js", gi, dG)
    return (mu * rough + lpm * graddiv + mu * ricci_mixed(metric, x)).astype(complex)


def _a1(moduli, gi, G, xi):
    n = gi.shape[0]
    mu, lpm = moduli.mu, moduli.mu + moduli.lam
    t1 = 2 * np.einsum("kl,jsk,l->js", gi, G, xi)
    t2 = np.einsum("kl,hkl,h->", gi, G, xi) * np.eye(n)
    t3 = np.einsum("jm,kks,m->js", gi, G, xi)
    return 1j * (mu * (t1 - t2) + lpm * t3)


# ---------------------------------------------------------------------------
# jet backend


class _JetSymbols:
    """All symbol pieces as jets in the ``2n`` variables ``(x, xi)``."""

    def __init__(self, moduli, metric, x, xi, tau):
        n = metric.dimension
        N = 2 * n
        self.n = n
        xs = list(range(n))
        gi, dgi, d2gi = metric(x)
        G, dG = christoffel(metric, x)
        gJ = Jet.from_derivatives(gi, dgi, d2gi, xs, N)
        GJ = Jet.from_derivatives(G, dG, np.zeros((n, n) + G.shape), xs, N)
        GJ.order = 1
        xiJ = stack([Jet.variable(xi[k], n + k, N) for k in range(n)])
        mu, lpm = moduli.mu, moduli.mu + moduli.lam
        w = gJ.contract("jm,m->j", xiJ)
        r2 = w.contract("j,j->", xiJ)
        eye = np.eye(n)
        p2 = r2.contract(",ab->ab", Jet.constant(mu * eye, N)) + lpm * w.contract("j,s->js", xiJ)
        self.a2 = Jet.constant(tau * eye, N) - p2
        self.a2inv = self.a2.inv()
        t1 = 2 * gJ.contract("kl,jsk->lsj", GJ).contract("lsj,l->js", xiJ)
        t2 = gJ.contract("kl,hkl->h", GJ).contract("h,h->", xiJ).contract(",ab->ab", Jet.constant(eye, N))
        t3 = gJ.contract("jm,kks->jms", GJ).contract("jms,m->js", xiJ)
        self.a1 = 1j * (mu * (t1 - t2) + lpm * t3)
        self.a0 = zeroth_order_symbol(moduli, metric, x)

    def dx(self, J, l):
        return J.d(l)

    def dxi(self, J, l):
        return J.d(self.n + l)

    def q3_jet(self):
        a2inv = self.a2inv
        inner = self.a1 @ a2inv
        for l in range(self.n):
            inner = inner - 1j * (self.dxi(self.a2, l) @ self.dx(a2inv, l))
        return -(a2inv @ inner)

    def q4_terms(self):
        n = self.n
        q2 = self.a2inv
        q3 = self.q3_jet()
        terms = [self.a0 @ q2.value]
        terms.append(sum(self.dxi(self.a1, l).value @ (-1j * self.dx(q2, l).value) for l in range(n)))
        terms.append(self.a1.value @ q3.value)
        t = 0
        for k in range(n):
            for l in range(n):
                d2a = self.dxi(self.dxi(self.a2, k), l).value
                d2q = self.dx(self.dx(q2, k), l).value
                t = t + 0.5 * d2a @ (-d2q)
        terms.append(t)
        terms.append(sum(self.dxi(self.a2, l).value @ (-1j * self.dx(q3, l).value) for l in range(n)))
        return terms


# ---------------------------------------------------------------------------
# central-difference backend


def _central(f, z, h, order):
    """Central-difference first or second derivatives of ``f`` along each axis of ``z``.

    Returns arrays with derivative axes first.  A second estimate with step
    ``h/2`` guards against cancellation.
    """

    def est(step):
        m = z.size
        if order == 1:
            out = []
            for k in range(m):
                e = np.zeros(m)
                e[k] = step
                out.append((f(z + e) - f(z - e)) / (2 * step))
            return np.stack(out)
        rows = []
        for k in range(m):
            row = []
            for l in range(m):
                ek = np.zeros(m)
                el = np.zeros(m)
                ek[k] = step
                el[l] = step
                row.append((f(z + ek + el) - f(z + ek - el) - f(z - ek + el) + f(z - ek - el)) / (4 * step * step))
            rows.append(np.stack(row))
        return np.stack(rows)

    d1 = est(h)
    d2 = est(h / 2)
    scale = max(np.abs(d2).max(), 1e-300)
    if np.abs(d1 - d2).max() > 1e-3 * scale:
        raise DifferentiationError("central differences did not settle", step=h)
    return (4 * d2 - d1) / 3  # Richardson


class _FDSymbols:
    def __init__(self, moduli, metric, x, xi, tau, step=None):
        self.moduli, self.metric = moduli, metric
        self.x, self.xi, self.tau = np.asarray(x, float), np.asarray(xi, float), tau
        self.n = metric.dimension
        scale = max(1.0, float(np.abs(self.xi).max()))
        self.hx = step or 1e-3
        self.hxi = (step or 1e-3) * scale

    def a2(self, x, xi):
        return self.tau * np.eye(self.n) - principal_symbol(self.moduli, self.metric, x, xi)

    def q2(self, x, xi):
        return np.linalg.inv(self.a2(x, xi))

    def a1(self, x, xi):
        return first_order_symbol(self.moduli, self.metric, x, xi)

    def dxi_a2(self, x, xi):
        return _central(lambda z: self.a2(x, z), xi, self.hxi, 1)

    def dx_q2(self, x, xi):
        return _central(lambda z: self.q2(z, xi), x, self.hx, 1)

    def q3(self, x, xi):
        a2inv = self.q2(x, xi)
        da2 = self.dxi_a2(x, xi)
        dq = self.dx_q2(x, xi)
        inner = self.a1(x, xi) @ a2inv - 1j * np.einsum("lab,lbc->ac", da2, dq)
        return -a2inv @ inner

    def q4_terms(self):
        x, xi = self.x, self.xi
        q2 = self.q2(x, xi)
        dq2 = self.dx_q2(x, xi)
        d2q2 = _central(lambda z: self.q2(z, xi), x, 10 * self.hx, 2)
        da1 = _central(lambda z: self.a1(x, z), xi, self.hxi, 1)
        d2a2 = _central(lambda z: self.a2(x, z), xi, 10 * self.hxi, 2)
        da2 = self.dxi_a2(x, xi)
        dq3 = _central(lambda z: self.q3(z, xi), x, 10 * self.hx, 1)
        return [
            zeroth_order_symbol(self.moduli, self.metric, x) @ q2,
            np.einsum("lab,lbc->ac", da1, -1j * dq2),
            self.a1(x, xi) @ self.q3(x, xi),
            0.5 * np.einsum("klab,klbc->ac", d2a2, -d2q2),
            np.einsum("lab,lbc->ac", da2, -1j * dq3),
        ]


def _backend(backend, moduli, metric, x, xi, tau):
    xi = _check_xi(xi)
    x = np.asarray(x, dtype=float)
    g = metric(x)[0]
    _pole_check(moduli, tau, float(xi @ g @ xi))
    if backend == "jet":
        return _JetSymbols(moduli, metric, x, xi, tau)
    if backend == "fd":
        return _FDSymbols(moduli, metric, x, xi, tau)
    raise ConfigError(f"unknown derivative backend {backend!r}; choose from {BACKENDS}")


def symbol_derivatives(moduli, metric, x, xi, tau, backend: str = "jet"):
    """``(d_xi a_2, d_x a_2^{-1})``, each with the derivative axis first."""
    s = _backend(backend, moduli, metric, x, xi, tau)
    n = metric.dimension
    if backend == "jet":
        return (np.stack([s.dxi(s.a2, l).value for l in range(n)]),
                np.stack([s.dx(s.a2inv, l).value for l in range(n)]))
    return s.dxi_a2(s.x, s.xi), s.dx_q2(s.x, s.xi)


def q_minus_3(moduli: ElasticModuli, metric: MetricField, x, xi, tau, backend: str = "jet") -> np.ndarray:
    s = _backend(backend, moduli, metric, x, xi, tau)
    if backend == "jet":
        return s.q3_jet().value
    return s.q3(s.x, s.xi)


def q_minus_4_terms(moduli, metric, x, xi, tau, backend: str = "jet"):
    """Individual contributions (before the ``-a_2^{-1}`` prefactor), one per :data:`Q4_TERMS` entry."""
    s = _backend(backend, moduli, metric, x, xi, tau)
    return s.q4_terms()


def q_minus_4(moduli: ElasticModuli, metric: MetricField, x, xi, tau, backend: str = "jet") -> np.ndarray:
    s = _backend(backend, moduli, metric, x, xi, tau)
    a2inv = resolvent_principal(moduli, metric, x, xi, tau)
    return -a2inv @ sum(s.q4_terms())


# ---------------------------------------------------------------------------
# graded symbol objects


@dataclass
class SymbolMatrix:
    order: int
    evaluator: Callable
    backend: str = "jet"
    name: str = ""

    def __call__(self, x, xi, tau) -> np.ndarray:
        return self.evaluator(x, xi, tau)

    def homogeneity_residual(self, x, xi, tau, s: float) -> float:
        """Relative defect of ``q(x, s xi, s^2 tau) = s^order q(x, xi, tau)``."""
        base = self(x, xi, tau)
        scaled = self(x, s * np.asarray(xi, dtype=float), s * s * tau)
        ref = max(np.abs(base).max() * s ** self.order, 1e-300)
        return float(np.abs(scaled - s ** self.order * base).max() / ref)


def resolvent_series(moduli: ElasticModuli, metric: MetricField, backend: str = "jet"):
    """``[q_{-2}, q_{-3}, q_{-4}]`` as :class:`SymbolMatrix` objects."""
    return [
        SymbolMatrix(-2, lambda x, xi, tau: resolvent_principal(moduli, metric, x, xi, tau).astype(complex),
                     backend, "q-2"),
        SymbolMatrix(-3, lambda x, xi, tau: q_minus_3(moduli, metric, x, xi, tau, backend), backend, "q-3"),
        SymbolMatrix(-4, lambda x, xi, tau: q_minus_4(moduli, metric, x, xi, tau, backend), backend, "q-4"),
    ]


# ---------------------------------------------------------------------------
# heat densities


def interior_bracket(moduli: ElasticModuli, n: int, t: float) -> float:
    return (n - 1) / (4 * np.pi * moduli.mu * t) ** (n / 2) + 1 / (4 * np.pi * moduli.pressure_speed2 * t) ** (n / 2)


def boundary_bracket(moduli: ElasticModuli, n: int, t: float) -> float:
    d = (n - 1) / 2
    return (n - 1) / (4 * np.pi * moduli.mu * t) ** d + 1 / (4 * np.pi * moduli.pressure_speed2 * t) ** d


def interior_heat_density(moduli: ElasticModuli, n: int, t: float) -> float:
    """Leading interior heat-kernel trace density (flat), closed form."""
    _check_t(t)
    return interior_bracket(moduli, n, t)


def boundary_image_term(moduli: ElasticModuli, n: int, t: float) -> float:
    """Integrated image contribution of the reflected kernel, closed form (sign-free)."""
    _check_t(t)
    return 0.25 * boundary_bracket(moduli, n, t)


def _check_t(t):
    if not t > 0:
        raise ConfigError(f"t must be positive, got {t}")


def _branch_rates(moduli: ElasticModuli, n: int):
    """Pole rates ``c`` (``tau = c |xi|^2``) with residues of ``Tr q_{-2}``, read off the symbol."""
    direction = np.zeros(n)
    direction[0] = 1.0
    ev = np.linalg.eigvalsh(principal_symbol(moduli, flat_metric(n), np.zeros(n), direction))
    rates, counts = np.unique(np.round(ev, 12), return_counts=True)
    return list(zip(rates.tolist(), counts.tolist()))


def _gaussian_moment(dim: int, rate: float, t: float, tol: float) -> float:
    """``(2 pi)^{-dim} int_{R^dim} exp(-t rate |xi|^2) d xi`` by radial quadrature."""
    if dim == 0:
        return 1.0
    sphere = 2 * np.pi ** (dim / 2) / special.gamma(dim / 2)
    scale = 1 / np.sqrt(t * rate)
    val, err = integrate.quad(lambda r: r ** (dim - 1) * np.exp(-(r * r)), 0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    if err > tol * abs(val):
        raise IntegrationError("radial quadrature did not converge", achieved=err / abs(val))
    return sphere * val * scale ** dim / (2 * np.pi) ** dim


def interior_heat_density_quadrature(moduli: ElasticModuli, n: int, t: float, tol: float = 1e-10) -> float:
    _check_t(t)
    return sum(m * _gaussian_moment(n, c, t, tol) for c, m in _branch_rates(moduli, n))


def boundary_image_quadrature(moduli: ElasticModuli, n: int, t: float, tol: float = 1e-10,
                              hermite_nodes: int = 150) -> float:
    """Image term by quadrature: Gauss-Hermite in the normal frequency, adaptive in the distance."""
    _check_t(t)
    s, w = np.polynomial.hermite.hermgauss(hermite_nodes)
    total = 0.0
    for c, m in _branch_rates(moduli, n):
        a = np.sqrt(t * c)

        def normal(xn):
            # (2 pi)^{-1} int cos(2 xn xi) exp(-t c xi^2) d xi with xi = s / a
            return np.dot(w, np.cos(2 * xn * s / a)) / (a * 2 * np.pi)

        # beyond 6a the exact integrand is below e^{-36} of its peak while the
        # Hermite sum stops resolving the oscillation, so the range is truncated there
        val, err = integrate.quad(normal, 0, 6 * a, epsabs=0, epsrel=1e-12, limit=400)
        if err > tol * abs(val):
            raise IntegrationError("image-term quadrature did not converge", achieved=err / abs(val))
        total += m * val * _gaussian_moment(n - 1, c, t, tol)
    return total
