import math

import numpy as np
import pytest
from scipy import special

from lamespec import DIRICHLET, NEUMANN, ConfigError, ElasticModuli, IncompleteSpectrumError
from lamespec.exact_spectra import (
    _certify, elastic_disk_dispersion, elastic_disk_spectrum, rayleigh_speed_ratio, scalar_disk_spectrum,
    scalar_interval_spectrum,
)
from lamespec.spectrum import SpectrumTable

J01 = 2.404825557695773


class TestModuli:
    def test_speeds(self):
        m = ElasticModuli(2.0, 3.0)
        assert m.shear_speed2 == 2.0 and m.pressure_speed2 == 7.0

    @pytest.mark.parametrize("mu,lam,needle", [(-1, 0, "mu > 0"), (0, 0, "mu > 0"), (1, -1.5, "mu + lambda")])
    def test_inadmissible(self, mu, lam, needle):
        with pytest.raises(ConfigError, match=needle.replace("+", r"\+")):
            ElasticModuli(mu, lam)

    def test_scalar_limit_flag(self):
        assert ElasticModuli(1, -1).is_scalar_limit
        assert not ElasticModuli(1, 0).is_scalar_limit


class TestScalar:
    def test_interval_examples(self):
        assert scalar_interval_spectrum(math.pi, DIRICHLET, 3).expanded().tolist() == [1, 4, 9]
        assert scalar_interval_spectrum(math.pi, NEUMANN, 3).expanded().tolist() == [0, 1, 4]
        assert scalar_interval_spectrum(2 * math.pi, DIRICHLET, 1).expanded() == pytest.approx([0.25])

    def test_disk_examples(self):
        t = scalar_disk_spectrum(1.0, DIRICHLET, 6.0)
        assert t.total_count == 1 and abs(t.eigenvalues[0] - J01**2) < 1e-6
        t = scalar_disk_spectrum(1.0, NEUMANN, 0.5)
        assert t.expanded().tolist() == [0.0]
        t = scalar_disk_spectrum(2.0, DIRICHLET, 1.5)
        assert abs(t.eigenvalues[0] - J01**2 / 4) < 1e-4

    def test_disk_against_scipy_zeros(self):
        t = scalar_disk_spectrum(1.0, DIRICHLET, 900.0)
        ref = []
        for n in range(31):
            z = special.jn_zeros(n, 12) ** 2
            ref += [v for v in z if v <= 900.0] * (1 if n == 0 else 2)
        assert np.allclose(t.expanded(), np.sort(ref), rtol=1e-12)

    def test_neumann_disk_against_scipy_zeros(self):
        t = scalar_disk_spectrum(1.0, NEUMANN, 400.0)
        ref = [0.0]
        for n in range(21):
            z = special.jnp_zeros(n, 10) ** 2
            ref += [v for v in z if v <= 400.0] * (1 if n == 0 else 2)
        assert np.allclose(t.expanded(), np.sort(ref), rtol=1e-11, atol=1e-12)

    def test_disk_certified_large(self, scalar_disk):
        assert scalar_disk.total_count >= 2000
        assert np.all(np.diff(scalar_disk.eigenvalues) >= 0)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            scalar_interval_spectrum(-1.0, DIRICHLET, 3)
        with pytest.raises(ConfigError):
            scalar_disk_spectrum(1.0, "robin", 10.0)


class TestElasticDisk:
    def test_neumann_rigid_modes(self, steel_like):
        t = elastic_disk_spectrum(steel_like, 1.0, NEUMANN, 20.0)
        assert t.eigenvalues[0] == 0.0 and t.multiplicities[0] == 3
        assert t.eigenvalues[1] > 0

    def test_dirichlet_positive(self, elastic_disk_dirichlet):
        assert elastic_disk_dirichlet.eigenvalues[0] > 0
        assert np.all(np.diff(elastic_disk_dirichlet.eigenvalues) >= 0)

    def test_decoupled_limit_doubles_scalar(self):
        el = elastic_disk_spectrum(ElasticModuli(1.0, -1.0), 1.0, DIRICHLET, 600.0)
        sc = scalar_disk_spectrum(1.0, DIRICHLET, 600.0)
        assert el.total_count == 2 * sc.total_count
        assert np.allclose(el.expanded(), np.repeat(sc.expanded(), 2), rtol=1e-12)

    def test_dispersion_reduces_to_scalar_products(self):
        m = ElasticModuli(1.0, -1.0)
        # equal speeds: D_n(k^2) = -k^2 J_{n+1}(k) J_{n-1}(k)
        for n in range(1, 4):
            for k in (0.7, 3.3, 8.1):
                ref = -k * k * special.jv(n + 1, k) * special.jv(n - 1, k)
                assert elastic_disk_dispersion(m, 1.0, DIRICHLET, n, k * k) == pytest.approx(ref, rel=1e-10, abs=1e-13)
            for z in special.jn_zeros(n + 1, 2):
                assert abs(elastic_disk_dispersion(m, 1.0, DIRICHLET, n, z**2)) < 1e-10

    @pytest.mark.parametrize("bc", [DIRICHLET, NEUMANN])
    def test_scaling_covariance(self, steel_like, bc):
        a = elastic_disk_spectrum(steel_like, 1.0, bc, 300.0)
        b = elastic_disk_spectrum(steel_like, 2.0, bc, 75.0)
        assert a.total_count == b.total_count
        ea, eb = a.expanded(), b.expanded()
        pos = ea > 0
        assert np.allclose(eb[pos] * 4, ea[pos], rtol=1e-8)

    def test_bracketing_dirichlet_neumann(self, elastic_disk_dirichlet, elastic_disk_neumann):
        d = elastic_disk_dirichlet.expanded()
        n = elastic_disk_neumann.expanded()
        m = min(d.size, n.size)
        assert np.all(n[:m] <= d[:m] * (1 + 1e-12))

    def test_lambda_mu_continuity(self):
        sc = np.repeat(scalar_disk_spectrum(1.0, DIRICHLET, 200.0).expanded(), 2)
        errs = []
        for eps in (1e-2, 1e-4):
            t = elastic_disk_spectrum(ElasticModuli(1.0, -1.0 + eps), 1.0, DIRICHLET, 200.0).expanded()
            m = min(t.size, sc.size) - 4  # roots near the cut-off may cross it
            errs.append((np.abs(t[:m] - sc[:m]) / sc[:m]).max())
            # pressure-type modes move by at most the relative change in p-speed^2
            assert errs[-1] <= eps * (1 + 1e-6)
        assert errs[1] < errs[0]

    def test_rayleigh_ratio(self):
        # Poisson solid, lam = mu: c_R / c_s = sqrt(2 - 2/sqrt(3))
        assert rayleigh_speed_ratio(ElasticModuli(1.0, 1.0)) == pytest.approx(math.sqrt(2 - 2 / math.sqrt(3)), rel=1e-10)

    def test_weyl_certificate_holds(self, elastic_disk_dirichlet):
        lam = elastic_disk_dirichlet.max_reliable
        assert elastic_disk_dirichlet.count(lam) >= 500
        assert abs(elastic_disk_dirichlet.count(lam) / lam - 0.375) / 0.375 < 0.1


def test_certify_flags_missing_roots():
    ev = np.arange(1, 801, dtype=float)
    table = SpectrumTable(ev, np.ones(800, dtype=int), DIRICHLET, "exact", 1000.0)
    with pytest.raises(IncompleteSpectrumError) as info:
        _certify(table, 1.0, 1)
    assert info.value.interval[1] == 1000.0
