import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lamespec import DIRICHLET, NEUMANN, ConfigError
from lamespec import asymptotics as asy
from lamespec.exact_spectra import scalar_interval_spectrum
from lamespec.image_kernels import (
    HeatKernel1D, free_kernel, halfline_trace_remainder, halfplane_kernel, image_kernel, interval_eigenvalues,
    kernel_trace,
)


def test_free_kernel_origin():
    assert free_kernel(1.0, 1.0, 0.0, 0.0) == pytest.approx((4 * math.pi) ** -0.5, abs=1e-7)


def test_free_kernel_normalised():
    val = integrate.quad(lambda x: free_kernel(2.0, 0.3, x, 0.4), -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert abs(val - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 5.0), st.floats(-3, 3), st.floats(-3, 3))
def test_free_kernel_symmetric(t, x, y):
    assert free_kernel(1.3, t, x, y) == free_kernel(1.3, t, y, x)


def test_halfline_dirichlet_vanishes_on_boundary():
    k = HeatKernel1D(1.0, "halfline", bc_left=DIRICHLET)
    for t in (1e-3, 0.5, 4.0):
        for x in (0.0, 0.2, 3.0):
            assert image_kernel(k, t, x, 0.0) == 0.0


def test_halfline_neumann_flux():
    k = HeatKernel1D(1.0, "halfline", bc_left=NEUMANN)
    h = 1e-5
    for t in (0.05, 1.0):
        for x in (0.1, 0.7):
            d = (k(t, x, h) - k(t, x, -h)) / (2 * h)
            assert abs(d) <= 1e-8


@pytest.mark.parametrize("bc", [DIRICHLET, NEUMANN])
def test_interval_against_eigen_expansion(bc):
    k = HeatKernel1D(1.0, "interval", math.pi, bc, bc)
    t = 0.1
    j = np.arange(200)
    for x, y in [(0.3, 1.2), (2.0, 2.0), (0.0, 1.0), (3.0, 0.1)]:
        if bc == DIRICHLET:
            ref = 2 / math.pi * np.sum(np.exp(-((j + 1) ** 2) * t) * np.sin((j + 1) * x) * np.sin((j + 1) * y))
        else:
            w = np.where(j == 0, 1 / math.pi, 2 / math.pi)
            ref = np.sum(w * np.exp(-(j**2) * t) * np.cos(j * x) * np.cos(j * y))
        assert abs(k(t, x, y) - ref) <= 1e-10


def test_mixed_interval_eigen_expansion():
    k = HeatKernel1D(1.0, "interval", math.pi, DIRICHLET, NEUMANN)
    t = 0.2
    j = np.arange(300) + 0.5
    x, y = 0.7, 2.1
    ref = 2 / math.pi * np.sum(np.exp(-(j**2) * t) * np.sin(j * x) * np.sin(j * y))
    assert abs(k(t, x, y) - ref) <= 1e-10


def test_interval_trace_matches_partition_function():
    spec = scalar_interval_spectrum(math.pi, DIRICHLET, 200)
    z = asy.partition_function(spec, [0.5], 1).values[0]
    assert abs(kernel_trace(HeatKernel1D(1.0, "interval", math.pi), 0.5) - z) <= 1e-12


def test_interval_trace_neumann_minus_dirichlet():
    d = kernel_trace(HeatKernel1D(1.0, "interval", math.pi, DIRICHLET, DIRICHLET), 0.05)
    n = kernel_trace(HeatKernel1D(1.0, "interval", math.pi, NEUMANN, NEUMANN), 0.05)
    assert abs(n - d - 1) <= 1e-8


@pytest.mark.parametrize("geometry,length", [("interval", 2.0), ("halfline", None)])
def test_trace_closed_form_against_quadrature(geometry, length):
    k = HeatKernel1D(0.7, geometry, length, NEUMANN, DIRICHLET)
    assert k.trace(0.2, 1.5) == pytest.approx(k.trace_quadrature(0.2, 1.5), rel=1e-11)


@pytest.mark.parametrize("bc,sign", [(DIRICHLET, -1), (NEUMANN, 1)])
def test_quarter_law(bc, sign):
    k = HeatKernel1D(1.0, "halfline", bc_left=bc)
    assert abs(halfline_trace_remainder(k, 1e-4, 1.0) - sign * 0.25) <= 1e-6


def test_semigroup():
    k = HeatKernel1D(1.0, "interval", 2.0, DIRICHLET, NEUMANN)
    x, y, t, s = 0.4, 1.3, 0.07, 0.11
    val = integrate.quad(lambda z: k(t, x, z) * k(s, z, y), 0, 2.0, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert abs(val - k(t + s, x, y)) <= 1e-8


def test_halfplane_factorises():
    x = np.array([0.3, 0.5])
    y = np.array([-0.2, 0.1])
    normal = HeatKernel1D(1.0, "halfline", bc_left=DIRICHLET)(0.4, 0.5, 0.1)
    assert halfplane_kernel(1.0, DIRICHLET, 0.4, x, y) == pytest.approx(free_kernel(1.0, 0.4, 0.3, -0.2) * normal)


def test_interval_eigenvalues():
    assert interval_eigenvalues(math.pi, DIRICHLET, DIRICHLET, 3).tolist() == [1, 4, 9]
    assert interval_eigenvalues(math.pi, NEUMANN, NEUMANN, 2).tolist() == [0, 1]
    assert interval_eigenvalues(math.pi, DIRICHLET, NEUMANN, 2).tolist() == [0.25, 2.25]


def test_invalid_specs():
    with pytest.raises(ConfigError):
        HeatKernel1D(1.0, "interval")
    with pytest.raises(ConfigError):
        HeatKernel1D(-1.0, "line")
    with pytest.raises(ConfigError):
        HeatKernel1D(1.0, "halfline").trace(0.1)
