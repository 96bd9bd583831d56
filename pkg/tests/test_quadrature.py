import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from bureshall.errors import ConvergenceError
from bureshall.quadrature import QuadratureResult, adaptive_gk, gauss_legendre, geometric_breaks


def test_result_validation():
    with pytest.raises(ValueError):
        QuadratureResult(1.0, -1.0, 10)
    with pytest.raises(ValueError):
        QuadratureResult(1.0, 0.0, 0)


@given(st.integers(min_value=0, max_value=28))
def test_polynomials_exact(k):
    r = adaptive_gk(lambda x: x ** k, [0.0, 1.0], tol=1e-13)
    assert r.value == pytest.approx(1 / (k + 1), rel=1e-13)
    assert r.evaluations >= 15


def test_smooth_against_scipy():
    f = lambda x: np.cos(3 * x) * np.exp(-x * x)
    r = adaptive_gk(f, [-4.0, 0.0, 4.0], tol=1e-13)
    ref, _ = integrate.quad(f, -4, 4, epsabs=1e-14)
    assert r.value == pytest.approx(ref, abs=1e-12)


def test_singular_endpoint_with_graded_breaks():
    # int_0^1 x**-0.5 ln x dx = -4
    r = adaptive_gk(lambda x: x ** -0.5 * np.log(x), geometric_breaks(0.0, 1.0, "left", depth=60), tol=1e-10)
    assert r.value == pytest.approx(-4.0, abs=1e-8)


def test_error_estimate_covers_error():
    for f, ref in [(lambda x: np.sqrt(x), 2 / 3), (lambda x: 1 / (1 + 25 * x * x), math.atan(5) / 5)]:
        r = adaptive_gk(f, [0.0, 1.0], tol=1e-9)
        assert abs(r.value - ref) <= max(r.abs_error_estimate, 1e-14)


def test_panel_cap_raises():
    with pytest.raises(ConvergenceError):
        adaptive_gk(lambda x: np.sign(x - 1 / 3), [0.0, 1.0], tol=1e-16, max_panels=50)


@pytest.mark.parametrize("side", ["left", "right", "both"])
def test_geometric_breaks(side):
    b = geometric_breaks(2.0, 5.0, side, depth=10)
    assert b[0] == 2.0 and b[-1] == 5.0
    assert np.all(np.diff(b) > 0)
    if side == "left":
        assert b[1] - b[0] < 1e-2
    if side == "right":
        assert b[-1] - b[-2] < 1e-2
    with pytest.raises(ValueError):
        geometric_breaks(0, 1, "middle")


def test_gauss_legendre():
    x, w = gauss_legendre(16)
    assert w.sum() == pytest.approx(2.0)
    assert np.dot(w, x ** 30) == pytest.approx(2 / 31, rel=1e-13)
