"""Closed-form averages, normalisation constants, moment relations and the
finite-sum integrals of the Meijer G product.

Everything here is a plain function of ``(m, n)`` or ``(m, alpha)``.  The
Bures-Hall case is alpha = n - m - 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError
from .special import digamma, gamma_ratio, log_gamma


@dataclass(frozen=True)
class Dims:
    """Subsystem dimensions, smaller one first."""

    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n:
            raise ParameterError("dimensions must be integers")
        if not 1 <= self.m <= self.n:
            raise ParameterError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")

    @property
    def alpha(self) -> float:
        return alpha_from_dims(self)

    def params(self) -> "EnsembleParams":
        return EnsembleParams(self.m, self.alpha)


@dataclass(frozen=True)
class EnsembleParams:
    m: int
    alpha: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}")
        if not self.alpha > -1:
            raise ParameterError(f"alpha must exceed -1, got {self.alpha!r}")

    @property
    def trace_shape(self) -> float:
        """Gamma shape m(m+2a+1)/2 of the trace of an unconstrained sample."""
        return self.m * (self.m + 2 * self.alpha + 1) / 2


def alpha_from_dims(dims: Dims) -> float:
    return dims.n - dims.m - 0.5


# -- averages in the (m, n) form ----------------------------------------------

def avg_purity_bures(dims: Dims) -> float:
    m, n = dims.m, dims.n
    return (2 * n * (2 * n + m) - m * m + 1) / (2 * n * (2 * m * n - m * m + 2))


def avg_vn_bures(dims: Dims) -> float:
    m, n = dims.m, dims.n
    return digamma(m * n - m * m / 2 + 1) - digamma(n + 0.5)


# -- general alpha ------------------------------------------------------------

def _purity_poly(m: int, a: float) -> float:
    return 5 * m * m + 10 * a * m + 5 * m + 4 * a * a + 4 * a + 2


def avg_purity_general(params: EnsembleParams) -> float:
    m, a = params.m, params.alpha
    return _purity_poly(m, a) / ((2 * m + 2 * a + 1) * (m * m + 2 * a * m + m + 2))


def avg_vn_general(params: EnsembleParams) -> float:
    m, a = params.m, params.alpha
    return digamma(m * (m + 1) / 2 + a * m + 1) - digamma(m + a + 1)


def induced_purity_mean(params: EnsembleParams) -> float:
    """E_h[sum x_i^2] over the unconstrained ensemble."""
    m, a = params.m, params.alpha
    return m * (m + 2 * a + 1) / (4 * (2 * m + 2 * a + 1)) * _purity_poly(m, a)


def induced_vn_mean(params: EnsembleParams) -> float:
    """E_h[sum x_i ln x_i] over the unconstrained ensemble."""
    m, a = params.m, params.alpha
    return m * (m + 2 * a + 1) / 2 * digamma(m + a + 1)


def purity_moment_relation(params: EnsembleParams, ehTP: float) -> float:
    """Map an unconstrained mean of sum x^2 to the constrained mean purity."""
    m, a = params.m, params.alpha
    return 4 * ehTP / (m * (m + 2 * a + 1) * (m * m + 2 * a * m + m + 2))


def vn_moment_relation(params: EnsembleParams, ehTvN: float) -> float:
    """Map an unconstrained mean of sum x ln x to the constrained mean entropy."""
    m, a = params.m, params.alpha
    d = m * (m + 1) / 2 + a * m + 1
    return digamma(d) - 2 * ehTvN / (m * (m + 2 * a + 1))


# -- integrals of x^beta G11 G21 ----------------------------------------------

def I_beta_sum(q: float, beta: float, params: EnsembleParams) -> float:
    """t-independent part of int_0^inf x^beta G11(q|tx) G21(q|tx) dx.

    Finite k-sum with reciprocal gammas taken as exact zeros at the
    non-positive integers, so for integer beta only the top ``beta`` terms
    survive.
    """
    if beta < 0:
        raise DomainError("beta must be non-negative")
    m, a = params.m, params.alpha
    total = 0.0
    for k in range(m):
        num = [k + 2 * a + m + 2, k + beta + 1, k + beta + 2 * a + 2, k + beta + 2 * a + 2 - q]
        den = [k + 2 * a + 2, k + 2 * a + 2 - q, m - k, k + 1,
               k + beta + 2 * a + m + 2, k + beta - m + 1]
        if any(d <= 0 and float(d).is_integer() for d in den):
            continue
        try:
            term = gamma_ratio(num, den)
        except DomainError as exc:
            raise ParameterError(f"I_beta_sum singular at k={k}: {exc}") from None
        total += (-1) ** (k + m) * term
    return total


def I_beta_closed(q: float, beta: int, params: EnsembleParams, t: float = 1.0) -> float:
    """Closed forms of the beta = 0, 1, 2 integrals, including the t**(-beta-1) factor."""
    if not t > 0:
        raise DomainError("t must be positive")
    m, a = params.m, params.alpha
    lead = m * (m + 2 * a + 1) * (m + 2 * a + 1 - q) / (2 * m + 2 * a + 1)
    if beta == 0:
        return 0.0
    if beta == 1:
        return -lead * t ** -2
    if beta == 2:
        cubic = ((m + 2 * a + 1) * (5 * m * m + 8 * a * m + 4 * m + 4 * a * a + 4 * a)
                 - (3 * m * m + 6 * a * m + 3 * m + 4 * a * a + 4 * a) * q)
        return -lead / (2 * (m + a) * (m + a + 1)) * cubic * t ** -3
    raise ParameterError(f"closed form only for beta in {{0, 1, 2}}, got {beta!r}")


def _check_hq_domain(q: float, params: EnsembleParams) -> None:
    if params.m + 2 * params.alpha + 2 - q <= 0:
        raise DomainError("H_q needs m + 2*alpha + 2 - q > 0")


def H_q_sum(q: float, params: EnsembleParams) -> float:
    """d/dbeta of the t-independent integral at beta = 1, digamma-bracket form."""
    _check_hq_domain(q, params)
    m, a = params.m, params.alpha
    lead = m * (m + 2 * a + 1) * (m + 2 * a + 1 - q) / (2 * m + 2 * a + 1)
    bracket = (digamma(m + 1) + digamma(m + 2 * a + 2) + digamma(m + 2 * a + 2 - q)
               - digamma(2 * m + 2 * a + 2) - digamma(1))
    tail = math.fsum((k + 1) * (k + 2 * a + 2) * (k + 2 * a + 2 - q) / ((m - k - 1) * (k + m + 2 * a + 2))
                     for k in range(m - 1))
    return -lead * bracket + tail


def _hq_coefficients(m: int, a: float) -> tuple[float, float]:
    a1 = (-4 * m ** 3 - 24 * a * m ** 2 - 14 * m ** 2 - 36 * a ** 2 * m - 40 * a * m - 11 * m
          - 16 * a ** 3 - 28 * a ** 2 - 16 * a - 3)
    a2 = 4 * m ** 2 + 8 * a * m + 3 * m + 4 * a ** 2 + 4 * a + 1
    return a1, a2


def H_q_closed(q: float, params: EnsembleParams) -> float:
    """Simplified H_q with the polynomial coefficients folded in."""
    _check_hq_domain(q, params)
    if params.m + 2 * params.alpha + 1 - q <= 0:
        raise DomainError("H_q_closed needs m + 2*alpha + 1 - q > 0")
    m, a = params.m, params.alpha
    a1, a2 = _hq_coefficients(m, a)
    inner = ((a1 + 2 * a2 * q) / (2 * (m + 2 * a + 1) * (2 * m + 2 * a + 1))
             + (2 * a + 1 - 2 * q) * (digamma(2 * m + 2 * a + 2) - digamma(m + 2 * a + 2))
             - (m + 2 * a + 1 - q) * digamma(m + 2 * a + 1 - q))
    return m * (m + 2 * a + 1) / (2 * m + 2 * a + 1) * inner


def H_pair(params: EnsembleParams) -> float:
    """H_alpha + H_{alpha+1}, collapsed."""
    m, a = params.m, params.alpha
    return -m * (m + 2 * a + 1) * (digamma(m + a + 1) + 1)


def I1_pair(params: EnsembleParams, t: float = 1.0) -> float:
    m, a = params.m, params.alpha
    return -m * (m + 2 * a + 1) * t ** -2


# -- normalisation ------------------------------------------------------------

def log_norm_constant_constrained(params: EnsembleParams) -> float:
    """ln c for the trace-constrained density."""
    m, a = params.m, params.alpha
    out = -m * (m + 2 * a) * math.log(2) + (m / 2) * math.log(math.pi) - log_gamma(m * (m + 2 * a + 1) / 2)
    for i in range(1, m + 1):
        out += log_gamma(i + 1) + log_gamma(i + 2 * a + 1) - log_gamma(i + a + 0.5)
    return out


def log_norm_constant_unconstrained(params: EnsembleParams) -> float:
    return log_norm_constant_constrained(params) + log_gamma(params.trace_shape)


__all__ = [
    "Dims", "EnsembleParams", "alpha_from_dims",
    "avg_purity_bures", "avg_vn_bures", "avg_purity_general", "avg_vn_general",
    "induced_purity_mean", "induced_vn_mean", "purity_moment_relation", "vn_moment_relation",
    "I_beta_sum", "I_beta_closed", "H_q_sum", "H_q_closed", "H_pair", "I1_pair",
    "log_norm_constant_constrained", "log_norm_constant_unconstrained",
]
