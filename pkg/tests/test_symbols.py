import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lamespec import ConditioningError, ConfigError, ElasticModuli
from lamespec import symbols as sym

MOD = ElasticModuli(1.0, 0.0)
FLAT = sym.flat_metric(2)
SYN = sym.synthetic_metric(2, 0.1)


def random_points(count, n=2, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        x = 0.3 * rng.standard_normal(n)
        xi = rng.standard_normal(n)
        tau = complex(-rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        yield x, xi, tau


class TestPrincipal:
    def test_example_matrix(self):
        assert np.allclose(sym.principal_symbol(MOD, FLAT, [0, 0], [1, 0]), [[2, 0], [0, 1]])

    @pytest.mark.parametrize("n", [2, 3])
    def test_eigenvalues(self, n):
        m = ElasticModuli(1.3, 0.4)
        rng = np.random.default_rng(n)
        for _ in range(5):
            xi = rng.standard_normal(n)
            r2 = xi @ xi
            ev = np.sort(np.linalg.eigvals(sym.principal_symbol(m, sym.flat_metric(n), np.zeros(n), xi)).real)
            ref = np.sort([m.mu * r2] * (n - 1) + [m.pressure_speed2 * r2])
            assert np.allclose(ev, ref)

    def test_not_diagonal(self):
        p = sym.principal_symbol(MOD, FLAT, [0, 0], [1, 1])
        assert p[0, 1] != 0

    def test_resolvent_example(self):
        q = sym.resolvent_principal(MOD, FLAT, [0, 0], [1, 0], -1.0)
        assert np.trace(q) == pytest.approx(-5 / 6, abs=1e-15)

    def test_trace_identity(self):
        for x, xi, tau in random_points(20):
            q = sym.resolvent_principal(MOD, SYN, x, xi, tau)
            r2 = xi @ SYN(x)[0] @ xi
            direct = np.trace(np.linalg.inv(tau * np.eye(2) - sym.principal_symbol(MOD, SYN, x, xi)))
            assert abs(np.trace(q) - sym.resolvent_trace(MOD, 2, r2, tau)) <= 1e-12 * abs(direct)
            assert abs(np.trace(q) - direct) <= 1e-12 * abs(direct)

    def test_scalar_limit_resolvent(self):
        m = ElasticModuli(2.0, -2.0)
        q = sym.resolvent_principal(m, FLAT, [0, 0], [0.6, 0.8], -3.0)
        assert np.allclose(q, np.eye(2) / (-3.0 - 2.0))

    def test_pole_rejected(self):
        with pytest.raises(ConditioningError):
            sym.resolvent_principal(MOD, FLAT, [0, 0], [1, 0], 1.0)

    def test_zero_xi_rejected(self):
        with pytest.raises(ConfigError):
            sym.principal_symbol(MOD, FLAT, [0, 0], [0, 0])

    def test_non_spd_metric_rejected(self):
        with pytest.raises(ConfigError):
            SYN([-20.0, 0.0])


class TestLowerOrder:
    @pytest.mark.parametrize("backend", sym.BACKENDS)
    def test_flat_vanishes(self, backend):
        for x, xi, tau in random_points(5):
            assert np.abs(sym.q_minus_3(MOD, FLAT, x, xi, tau, backend)).max() <= 1e-12
            assert np.abs(sym.q_minus_4(MOD, FLAT, x, xi, tau, backend)).max() <= 1e-12

    def test_synthetic_nonzero(self):
        x, xi, tau = next(random_points(1))
        assert np.abs(sym.q_minus_3(MOD, SYN, x, xi, tau)).max() > 1e-4
        assert np.abs(sym.q_minus_4(MOD, SYN, x, xi, tau)).max() > 1e-5

    @pytest.mark.parametrize("backend", sym.BACKENDS)
    def test_parity(self, backend):
        m = ElasticModuli(1.0, 0.7)
        for x, xi, tau in random_points(10, seed=3):
            t3 = [np.trace(sym.q_minus_3(m, SYN, x, s * xi, tau, backend)) for s in (1, -1)]
            t4 = [np.trace(sym.q_minus_4(m, SYN, x, s * xi, tau, backend)) for s in (1, -1)]
            assert abs(t3[0] + t3[1]) <= 1e-9
            assert abs(t4[0] - t4[1]) <= 1e-9

    def test_homogeneity(self):
        for q in sym.resolvent_series(MOD, SYN):
            for x, xi, tau in random_points(4, seed=5):
                for s in (2.0, 1 / 3, 4.0):
                    assert q.homogeneity_residual(x, xi, tau, s) <= 1e-9

    def test_backends_agree(self):
        for x, xi, tau in random_points(6, seed=7):
            for a, b in zip(sym.symbol_derivatives(MOD, SYN, x, xi, tau, "jet"),
                            sym.symbol_derivatives(MOD, SYN, x, xi, tau, "fd")):
                assert np.abs(a - b).max() <= 1e-6
            q_j = sym.q_minus_4(MOD, SYN, x, xi, tau, "jet")
            q_f = sym.q_minus_4(MOD, SYN, x, xi, tau, "fd")
            assert np.abs(q_j - q_f).max() <= 1e-6 * max(np.abs(q_j).max(), 1e-12)

    def test_dxi_a2_matches_analytic(self):
        # d_xi_l of tau - p2: -(mu 2 g xi delta + (lam+mu)(g_{jl} xi_s + w_j delta_{sl}))
        x, xi, tau = np.array([0.2, -0.1]), np.array([0.4, 1.1]), -1.0 + 0.2j
        g = SYN(x)[0]
        w = g @ xi
        dxi, _ = sym.symbol_derivatives(MOD, SYN, x, xi, tau)
        for l in range(2):
            e = np.zeros(2)
            e[l] = 1
            ref = -(MOD.mu * 2 * w[l] * np.eye(2) + (MOD.mu + MOD.lam) * (np.outer(g[:, l], xi) + np.outer(w, e)))
            assert np.allclose(dxi[l], ref, atol=1e-13)

    def test_unknown_backend(self):
        with pytest.raises(ConfigError):
            sym.q_minus_3(MOD, SYN, [0, 0], [1, 0], -1.0, "autodiff")

    def test_term_enumeration(self):
        assert sym.enumerate_q4_terms() == [(k, j, a) for k, j, a, _ in sym.Q4_TERMS]
        assert all(j + a - k == 0 for k, j, a in sym.enumerate_q4_terms())
        x, xi, tau = next(random_points(1))
        assert len(sym.q_minus_4_terms(MOD, SYN, x, xi, tau)) == 5


class TestGeometry:
    def test_flat_christoffel_zero(self):
        G, dG = sym.christoffel(FLAT, [0.3, 0.1])
        assert not G.any() and not dG.any()

    def test_conformal_metric_curvature(self):
        # g_{ij} = e^{2 f} delta with f = a x1: scalar curvature -2 e^{-2f} Delta f = 0; use f = a x1^2 / 2
        a = 0.3

        def ev(x):
            f = a * x[0] ** 2 / 2
            gi = np.exp(-2 * f) * np.eye(2)
            df = np.array([a * x[0], 0.0])
            d2f = np.array([[a, 0.0], [0.0, 0.0]])
            dgi = -2 * np.einsum("p,ij->pij", df, gi)
            d2gi = np.einsum("pq,ij->pqij", 4 * np.outer(df, df) - 2 * d2f, gi)
            return gi, dgi, d2gi

        metric = sym.MetricField(2, ev, "conformal")
        x = np.array([0.4, -0.2])
        ric = sym.ricci_mixed(metric, x)
        # in 2D, Ric^j_s = (K) delta with Gaussian curvature K = -e^{-2f} Delta f
        K = -math.exp(-a * x[0] ** 2) * a
        assert np.allclose(ric, K * np.eye(2), atol=1e-12)


class TestHeatDensities:
    def test_examples(self):
        assert sym.interior_heat_density(MOD, 2, 1.0) == pytest.approx(0.1193662, abs=1e-7)
        assert sym.boundary_image_term(MOD, 2, 1.0) == pytest.approx(0.1203915, abs=1e-7)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("n", [2, 3])
    def test_interior_quadrature(self, t, n):
        m = ElasticModuli(1.0, 0.5)
        closed = sym.interior_heat_density(m, n, t)
        assert abs(sym.interior_heat_density_quadrature(m, n, t) - closed) <= 1e-8 * closed

    @pytest.mark.parametrize("t", [0.1, 0.25, 1.0, 10.0])
    def test_boundary_quadrature(self, t):
        closed = sym.boundary_image_term(MOD, 2, t)
        assert abs(sym.boundary_image_quadrature(MOD, 2, t) - closed) <= 1e-8 * closed

    def test_scalar_limit_interior(self):
        m = ElasticModuli(1.5, -1.5)
        for n in (1, 2, 3):
            assert sym.interior_heat_density(m, n, 0.7) == pytest.approx(n / (4 * math.pi * 1.5 * 0.7) ** (n / 2))

    def test_quarter_ratio(self):
        for n in (2, 3):
            assert sym.boundary_image_term(MOD, n, 0.3) / sym.boundary_bracket(MOD, n, 0.3) == 0.25

    def test_closed_forms_symbolically(self):
        # Gaussian and image integrals of one branch reproduce the bracket terms exactly
        xi, x, t, c = sp.symbols("xi x t c", positive=True)
        one_d = sp.integrate(sp.exp(-t * c * xi**2), (xi, -sp.oo, sp.oo)) / (2 * sp.pi)
        assert sp.simplify(one_d**2 - 1 / (4 * sp.pi * c * t)) == 0
        image = sp.integrate(sp.integrate(sp.cos(2 * x * xi) * sp.exp(-t * c * xi**2), (xi, -sp.oo, sp.oo))
                             / (2 * sp.pi), (x, 0, sp.oo))
        assert sp.simplify(image - sp.Rational(1, 4)) == 0

    def test_invalid_t(self):
        with pytest.raises(ConfigError):
            sym.interior_heat_density(MOD, 2, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-0.09, 3.0), st.floats(0.05, 20.0))
def test_bracket_ratio_property(mu, lam_rel, t):
    m = ElasticModuli(mu, lam_rel * mu - 0.0)
    if m.mu + m.lam < 0:
        return
    assert sym.boundary_image_term(m, 2, t) == 0.25 * sym.boundary_bracket(m, 2, t)
    assert sym.interior_heat_density(m, 2, t) > 0
