import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamespec.jets import Jet, stack

finite = st.floats(-2.0, 2.0, allow_nan=False)


def xy(x0, y0):
    return Jet.variable(x0, 0, 2), Jet.variable(y0, 1, 2)


@settings(max_examples=50, deadline=None)
@given(finite, finite)
def test_product_rule(x0, y0):
    x, y = xy(x0, y0)
    f = x * x * y + 3.0 * y
    assert f.value == pytest.approx(x0 * x0 * y0 + 3 * y0)
    assert f.partial((1, 0)) == pytest.approx(2 * x0 * y0)
    assert f.partial((0, 1)) == pytest.approx(x0 * x0 + 3)
    assert f.partial((2, 0)) == pytest.approx(2 * y0)
    assert f.partial((1, 1)) == pytest.approx(2 * x0)
    assert f.partial((0, 2)) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(finite, finite)
def test_reciprocal(x0, y0):
    x, y = xy(x0, y0)
    d = 3.0 + x * x + y * y
    r = d.reciprocal()
    D = 3 + x0 * x0 + y0 * y0
    assert r.value == pytest.approx(1 / D)
    assert r.partial((1, 0)) == pytest.approx(-2 * x0 / D**2)
    assert r.partial((2, 0)) == pytest.approx(-2 / D**2 + 8 * x0 * x0 / D**3)


def test_matrix_inverse_derivatives():
    x, y = xy(0.3, -0.2)
    one = Jet.constant(1.0, 2)
    A = stack([stack([2.0 * one + x, y]), stack([y, one + x * y])])
    Ainv = A.inv()
    ident = (A @ Ainv)
    assert np.allclose(ident.value, np.eye(2))
    for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert np.allclose(ident.partial(alpha), 0.0, atol=1e-13)


def test_derivative_lowers_order():
    x, _ = xy(1.0, 0.0)
    f = (x * x * x).d(0)
    assert f.order == 1
    assert f.value == pytest.approx(3.0)
    with pytest.raises(ValueError):
        f.partial((2, 0))


def test_from_derivatives_round_trip():
    grad = np.array([1.5, -2.0])
    hess = np.array([[0.5, 0.25], [0.25, -1.0]])
    f = Jet.from_derivatives(2.0, grad, hess, [0, 1], 2)
    assert f.partial((1, 0)) == 1.5 and f.partial((0, 1)) == -2.0
    assert f.partial((2, 0)) == pytest.approx(0.5)
    assert f.partial((1, 1)) == pytest.approx(0.25)
    assert f.partial((0, 2)) == pytest.approx(-1.0)
