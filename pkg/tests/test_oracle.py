import math

import mpmath as mp
import pytest

from bureshall import closed_form as cf
from bureshall.closed_form import EnsembleParams
from bureshall.errors import ParameterError
from bureshall.oracle import (constrained_average_m2, constrained_average_m3, gamma_log_integral_check,
                              unconstrained_average)
from bureshall.special import digamma

ALPHAS = (-0.5, 0.0, 0.5, 1.0, 2.5)


def _within(result, ref, tol):
    assert abs(result.value - ref) <= tol
    # the reported estimate is honest: it bounds the true deviation up to round-off
    assert abs(result.value - ref) <= result.abs_error_estimate + 1e-13


@pytest.mark.parametrize("a", ALPHAS)
def test_m2_against_closed_form(a):
    p = EnsembleParams(2, a)
    _within(constrained_average_m2(a, "S_P"), cf.avg_purity_general(p), 1e-10)
    _within(constrained_average_m2(a, "S_vN"), cf.avg_vn_general(p), 1e-10)
    assert constrained_average_m2(a, "unity").value == pytest.approx(1.0, abs=1e-10)


def test_m2_against_mpmath():
    # independent oracle: direct mpmath integral of the m = 2 constrained density
    a = 0.5
    w = lambda l: (2 * l - 1) ** 2 * (l * (1 - l)) ** a
    z = mp.quad(w, [0, 0.5, 1])
    ent = mp.quad(lambda l: w(l) * -(l * mp.log(l) + (1 - l) * mp.log(1 - l)), [0, 0.5, 1]) / z
    assert constrained_average_m2(a, "S_vN").value == pytest.approx(float(ent), abs=1e-11)


@pytest.mark.parametrize("a", [-0.5, 0.5, 1.5])
def test_m3_against_closed_form(a):
    p = EnsembleParams(3, a)
    _within(constrained_average_m3(a, "S_P"), cf.avg_purity_general(p), 1e-7)
    _within(constrained_average_m3(a, "S_vN"), cf.avg_vn_general(p), 1e-7)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("a", ALPHAS)
def test_unconstrained_against_closed_form(m, a):
    p = EnsembleParams(m, a)
    _within(unconstrained_average(m, a, "T_P"), cf.induced_purity_mean(p), 1e-9 * cf.induced_purity_mean(p))
    _within(unconstrained_average(m, a, "T_vN"), cf.induced_vn_mean(p), 1e-9 * max(1, cf.induced_purity_mean(p)))
    assert unconstrained_average(m, a, "unity").value == pytest.approx(1.0, abs=1e-9)
    # the trace is Gamma-distributed with shape m*alpha + m**2/2 + m/2
    assert unconstrained_average(m, a, "trace_sum").value == pytest.approx(m * a + m * m / 2 + m / 2, rel=1e-9)


@pytest.mark.parametrize("d", [0.5, 1.0, 2.5, 7.0])
def test_gamma_log_integral(d):
    r = gamma_log_integral_check(d)
    assert r.value == pytest.approx(math.gamma(d) * digamma(d), abs=1e-11 * math.gamma(d) + 1e-12)


def test_validation():
    with pytest.raises(ParameterError):
        constrained_average_m2(-1.0, "S_P")
    with pytest.raises(ParameterError):
        constrained_average_m2(0.5, "T_P")
    with pytest.raises(ParameterError):
        constrained_average_m3(0.5, "S_P", tol=0)
    with pytest.raises(ParameterError):
        unconstrained_average(3, 0.5, "T_P")
    with pytest.raises(ParameterError):
        gamma_log_integral_check(0.0)


def test_m3_n4_purity_value():
    # oracle-confirmed value of the (3, 4) mean purity
    assert cf.avg_purity_bures(cf.Dims(3, 4)) == pytest.approx(10 / 17, rel=1e-15)
    assert constrained_average_m3(0.5, "S_P").value == pytest.approx(10 / 17, abs=1e-7)
    ref = float(mp.digamma(8.5) - mp.digamma(4.5))
    assert constrained_average_m3(0.5, "S_vN").value == pytest.approx(ref, abs=1e-7)
