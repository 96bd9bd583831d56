"""Brute-force quadrature of the joint eigenvalue densities for m <= 3.

These integrals never touch the closed forms: they integrate the raw joint
densities directly, so agreement with :mod:`bureshall.closed_form` is a
genuine cross-check.  Endpoint powers lambda**alpha and the lambda*ln(lambda)
pieces of the entropy are absorbed into QUADPACK's algebraic-logarithmic
weights (QAWS), which keeps alpha = -1/2 as cheap as any other case.
"""
from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate

from .closed_form import EnsembleParams, log_norm_constant_constrained, log_norm_constant_unconstrained
from .errors import ConvergenceError, ParameterError
from .quadrature import QuadratureResult

CONSTRAINED_STATISTICS = ("S_P", "S_vN", "unity")
UNCONSTRAINED_STATISTICS = ("T_P", "T_vN", "trace_sum", "unity")

# relative round-off floor folded into every reported error estimate
_ROUNDOFF = 50 * np.finfo(float).eps
_TINY = 1e-300


class _Counter:
    def __init__(self):
        self.n = 0


def _qaws(f, a, b, alpha, beta, kind, tol, counter, rel=None):
    """One QAWS call; ``kind`` is '', 'a' or 'b' for the log factor.

    ``tol`` is absolute; ``rel`` (default: same number) is relative.
    """
    weight = {"": "alg", "a": "alg-loga", "b": "alg-logb"}[kind]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err, info = integrate.quad(f, a, b, weight=weight, wvar=(alpha, beta),
                                            epsabs=tol, epsrel=tol if rel is None else rel, limit=400, full_output=True)[:3]
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"oracle quadrature failed: {exc}") from None
    counter.n += info["neval"]
    return val, err


def _check(alpha, statistic, allowed, tol):
    if not alpha > -1:
        raise ParameterError(f"alpha must exceed -1, got {alpha!r}")
    if statistic not in allowed:
        raise ParameterError(f"statistic must be one of {allowed}, got {statistic!r}")
    if not tol > 0:
        raise ParameterError("tol must be positive")


def _ratio(num, num_err, den, den_err):
    r = num / den
    err = (num_err + abs(r) * den_err) / abs(den)
    return r, err + _ROUNDOFF * abs(r)


# ---------------------------------------------------------------------------
# constrained ensemble
# ---------------------------------------------------------------------------

def constrained_average_m2(alpha: float, statistic: str, tol: float = 1e-10) -> QuadratureResult:
    """Average over the m = 2 constrained density with lambda_2 = 1 - lambda_1.

    The density reduces to (2l - 1)**2 * (l (1 - l))**alpha on [0, 1].  For
    ``statistic="unity"`` the integral is divided by the normalisation
    constant instead, so the result should be exactly 1.
    """
    _check(alpha, statistic, CONSTRAINED_STATISTICS, tol)
    cnt = _Counter()
    t = tol / 4

    def sq(l):
        return (2 * l - 1) ** 2

    den, den_err = _qaws(sq, 0, 1, alpha, alpha, "", _TINY, cnt, rel=t)
    if statistic == "unity":
        c = math.exp(log_norm_constant_constrained(EnsembleParams(2, alpha)))
        v = den / c
        return QuadratureResult(v, den_err / c + _ROUNDOFF * abs(v), cnt.n)
    if statistic == "S_P":
        num, num_err = _qaws(lambda l: sq(l) * (l * l + (1 - l) ** 2), 0, 1, alpha, alpha, "", _TINY, cnt, rel=t)
    else:
        # -l ln l - (1-l) ln(1-l), each log carried by the weight
        na, ea = _qaws(lambda l: -sq(l) * l, 0, 1, alpha, alpha, "a", _TINY, cnt, rel=t)
        nb, eb = _qaws(lambda l: -sq(l) * (1 - l), 0, 1, alpha, alpha, "b", _TINY, cnt, rel=t)
        num, num_err = na + nb, ea + eb
    v, e = _ratio(num, num_err, den, den_err)
    return QuadratureResult(v, e, cnt.n)


def _pair(x, y):
    # (x - y)^2 / (x + y), continuous extension 0 at the origin
    s = x + y
    return (x - y) ** 2 / s if s > 0 else 0.0


def _interaction3(l1, l2, l3):
    return _pair(l1, l2) * _pair(l1, l3) * _pair(l2, l3)


def constrained_average_m3(alpha: float, statistic: str, tol: float = 1e-7) -> QuadratureResult:
    """Average over the m = 3 constrained density on the 2-simplex.

    Coordinates l1 = u, l2 = (1-u) v, l3 = (1-u)(1-v) turn the simplex
    into the unit square; the face powers become u**a (1-u)**(2a+1) and
    v**a (1-v)**a and go into the quadrature weights.
    """
    _check(alpha, statistic, CONSTRAINED_STATISTICS, tol)
    cnt = _Counter()
    a = alpha
    # every integrand below is positive, so tolerances are relative
    inner_rel = tol / 40
    outer_rel = tol / 8
    worst_inner = [0.0]

    def R(u, v):
        return _interaction3(u, (1 - u) * v, (1 - u) * (1 - v))

    def inner(f, kind=""):
        val, err = _qaws(f, 0, 1, a, a, kind, _TINY, cnt, rel=inner_rel)
        if val:
            worst_inner[0] = max(worst_inner[0], err / abs(val))
        return val

    @lru_cache(maxsize=None)
    def g0(u):
        return inner(lambda v: R(u, v))

    @lru_cache(maxsize=None)
    def g_entropy(u):
        # int R(u, v) * (-v ln v - (1-v) ln(1-v)) v^a (1-v)^a dv
        return inner(lambda v: -R(u, v) * v, "a") + inner(lambda v: -R(u, v) * (1 - v), "b")

    @lru_cache(maxsize=None)
    def g_purity(u):
        return inner(lambda v: R(u, v) * (v * v + (1 - v) ** 2))

    b = 2 * a + 1

    def outer(f, kind=""):
        return _qaws(f, 0, 1, a, b, kind, _TINY, cnt, rel=outer_rel)

    den, den_err = outer(g0)
    den_err += worst_inner[0] * den

    if statistic == "unity":
        c = math.exp(log_norm_constant_constrained(EnsembleParams(3, alpha)))
        v = den / c
        return QuadratureResult(v, den_err / c + _ROUNDOFF * abs(v), cnt.n)

    if statistic == "S_P":
        # l1^2 + (1-u)^2 (v^2 + (1-v)^2)
        num, num_err = outer(lambda u: u * u * g0(u) + (1 - u) ** 2 * g_purity(u))
    else:
        # -u ln u - (1-u) ln(1-u) + (1-u) * [binary entropy of v]
        n1, e1 = outer(lambda u: -u * g0(u), "a")
        n2, e2 = outer(lambda u: -(1 - u) * g0(u), "b")
        n3, e3 = outer(lambda u: (1 - u) * g_entropy(u))
        num, num_err = n1 + n2 + n3, e1 + e2 + e3
    num_err += worst_inner[0] * abs(num)
    v, e = _ratio(num, num_err, den, den_err)
    return QuadratureResult(v, e, cnt.n)


# ---------------------------------------------------------------------------
# unconstrained ensemble
# ---------------------------------------------------------------------------

def _cutoff(alpha: float, power: float, tol: float) -> float:
    """X with X**(alpha + power) e**-X comfortably below tol / 10."""
    x = 20.0
    while (alpha + power) * math.log(x) - x > math.log(tol / 10) - 5:
        x += 5.0
    return x


def unconstrained_average(m: int, alpha: float, statistic: str, tol: float = 1e-10) -> QuadratureResult:
    """Average of an induced statistic over the unconstrained density, m in {1, 2}.

    ``statistic="unity"`` returns the raw mass divided by c', which should be 1.
    """
    _check(alpha, statistic, UNCONSTRAINED_STATISTICS, tol)
    if m not in (1, 2):
        raise ParameterError("unconstrained oracle only covers m = 1 and m = 2")
    cnt = _Counter()
    X = _cutoff(alpha, 2 * m + 4, tol)
    a = alpha
    # normalising mass first (relative, tighter because the ratio scales its
    # error by the average itself), then numerators to tol * mass
    rel = tol / 4
    den_rel = tol / 200

    if m == 1:
        def outer(f, kind="", scale=None):
            if scale is None:
                return _qaws(f, 0, X, a, 0, kind, _TINY, cnt, rel=den_rel)
            return _qaws(f, 0, X, a, 0, kind, rel * scale, cnt, rel=0.0)

        den, den_err = outer(lambda x: np.exp(-x))
        if statistic == "unity":
            num, num_err = den, den_err
        elif statistic == "T_P":
            num, num_err = outer(lambda x: x * x * np.exp(-x), scale=den)
        elif statistic == "trace_sum":
            num, num_err = outer(lambda x: x * np.exp(-x), scale=den)
        else:
            num, num_err = outer(lambda x: x * np.exp(-x), "a", scale=den)
    else:
        inner_rel = tol / 400
        worst_inner = [0.0]

        def make_inner(power, log):
            @lru_cache(maxsize=None)
            def J(x1):
                f = lambda x2: _pair(x1, x2) * x2 ** power * math.exp(-x2)
                if log:
                    # sign-changing: tolerance relative to the same integral without the log
                    scale = J1(x1)
                    val, err = _qaws(f, 0, X, a, 0, "a", max(inner_rel * scale, _TINY), cnt, rel=0.0)
                    rel_err = err / scale if scale else 0.0
                else:
                    val, err = _qaws(f, 0, X, a, 0, "", _TINY, cnt, rel=inner_rel)
                    rel_err = err / abs(val) if val else 0.0
                worst_inner[0] = max(worst_inner[0], rel_err)
                return val
            return J

        J0, J1, J2 = make_inner(0, False), make_inner(1, False), make_inner(2, False)
        JL = make_inner(1, True)

        def outer(f, kind="", scale=None):
            if scale is None:
                return _qaws(f, 0, X, a, 0, kind, _TINY, cnt, rel=den_rel)
            return _qaws(f, 0, X, a, 0, kind, rel * scale, cnt, rel=0.0)

        den, den_err = outer(lambda x: math.exp(-x) * J0(x))
        if statistic == "unity":
            num, num_err = den, den_err
        elif statistic == "T_P":
            num, num_err = outer(lambda x: math.exp(-x) * (x * x * J0(x) + J2(x)), scale=den)
        elif statistic == "trace_sum":
            num, num_err = outer(lambda x: math.exp(-x) * (x * J0(x) + J1(x)), scale=den)
        else:
            n1, e1 = outer(lambda x: math.exp(-x) * x * J0(x), "a", scale=den)
            n2, e2 = outer(lambda x: math.exp(-x) * JL(x), scale=den)
            num, num_err = n1 + n2, e1 + e2
        # inner relative errors, carried through the outer weight
        den_err += worst_inner[0] * den
        num_err += worst_inner[0] * (abs(num) + den)

    if statistic == "unity":
        c = math.exp(log_norm_constant_unconstrained(EnsembleParams(m, alpha)))
        v = den / c
        return QuadratureResult(v, den_err / c + _ROUNDOFF * abs(v), cnt.n)
    v, e = _ratio(num, num_err, den, den_err)
    return QuadratureResult(v, e, cnt.n)


def gamma_log_integral_check(d: float, tol: float = 1e-12) -> QuadratureResult:
    """int_0^inf e**-theta theta**(d-1) ln(theta) dtheta by quadrature."""
    if not d > 0:
        raise ParameterError(f"d must be positive, got {d!r}")
    cnt = _Counter()
    X = _cutoff(d - 1, 1, tol)
    v, e = _qaws(lambda x: np.exp(-x), 0, X, d - 1, 0, "a", tol / 2, cnt, rel=0.0)
    return QuadratureResult(v, e + _ROUNDOFF * abs(v), cnt.n)
