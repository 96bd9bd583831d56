"""Scalar special functions: log-gamma, digamma, Pochhammer, the terminating
2F2 and the two Meijer G-functions of the Cauchy-Laguerre family.

The two G-functions are

    G11(q | y) = G^{1,1}_{2,3}( -m; m+2a+1 / 2a+1; 0, q | y )
    G21(q | y) = G^{2,1}_{2,3}( -m-2a-1; m / 0, -q; -2a-1 | y )

with ``a`` the ensemble parameter alpha.  G11 is a polynomial times
``y**(2a+1)``; G21 is evaluated either as a residue series (small ``y``) or
through its partial-fraction form in upper incomplete gamma functions
(large ``y``, where the residue series cancels catastrophically).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, DomainError, ParameterError

EULER_GAMMA = 0.57721566490153286060651209008240243
LN2 = math.log(2.0)

# Largest integer / half-integer argument served by the exact finite sums.
_DIGAMMA_SUM_LIMIT = 10_000

# Bernoulli numbers B_2k / (2k) for the digamma asymptotic series.
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

SERIES_MAX_TERMS = 500
SERIES_SWITCH_Y = 2.0


def _is_int(x: float) -> bool:
    return float(x).is_integer()


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and _is_int(x)


# ---------------------------------------------------------------------------
# gamma family
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def signed_log_gamma(x: float) -> tuple[float, float]:
    """Return ``(sign, log|Gamma(x)|)`` for any real x that is not a pole."""
    if _is_nonpositive_int(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    if x > 0:
        return 1.0, math.lgamma(x)
    # Gamma alternates sign between consecutive negative integers.
    sign = -1.0 if math.floor(x) % 2 else 1.0
    return sign, math.lgamma(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma, exactly 0 at the non-positive integers."""
    if _is_nonpositive_int(x):
        return 0.0
    sign, lg = signed_log_gamma(x)
    return sign * math.exp(-lg)


def gamma_ratio(numer: list[float], denom: list[float]) -> float:
    """prod Gamma(numer) / prod Gamma(denom).

    Numerator/denominator arguments an integer apart are paired and their
    ratio taken as a finite product; the rest is done in log space.  A
    denominator argument at a pole makes the ratio exactly zero; a numerator
    pole raises :class:`DomainError`.
    """
    if any(_is_nonpositive_int(d) for d in denom):
        return 0.0
    for a in numer:
        if _is_nonpositive_int(a):
            raise DomainError(f"Gamma has a pole at {a!r}")
    rest_den = list(denom)
    rest_num = []
    prod = 1.0
    for a in numer:
        for i, b in enumerate(rest_den):
            k = a - b
            if _is_int(k) and abs(k) <= 64:
                prod *= pochhammer(b, int(k)) if k >= 0 else 1.0 / pochhammer(a, int(-k))
                del rest_den[i]
                break
        else:
            rest_num.append(a)
    sign, acc = 1.0, 0.0
    for a in rest_num:
        s, lg = signed_log_gamma(a)
        sign *= s
        acc += lg
    for b in rest_den:
        s, lg = signed_log_gamma(b)
        sign *= s
        acc -= lg
    return prod * sign * math.exp(acc)


def digamma(x: float) -> float:
    """psi_0(x) for x > 0.

    Integer and half-integer arguments go through the exact finite sums

        psi(l)       = -gamma + sum_{k=1}^{l-1} 1/k
        psi(l + 1/2) = -gamma - 2 ln 2 + 2 sum_{k=0}^{l-1} 1/(2k+1)

    everything else through upward recurrence and the asymptotic series.
    """
    if not x > 0:
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    if x <= _DIGAMMA_SUM_LIMIT:
        if _is_int(x):
            return digamma_int(int(x))
        if _is_int(2.0 * x):
            return digamma_half_int(int(x - 0.5))
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail, p = 0.0, inv2
    for c in _DIGAMMA_ASYMPTOTIC:
        tail += c * p
        p *= inv2
    return shift + math.log(x) - 0.5 / x - tail


def digamma_int(l: int) -> float:
    """psi_0(l) for a positive integer l, as the harmonic sum."""
    if l < 1:
        raise DomainError(f"digamma_int requires l >= 1, got {l}")
    return -EULER_GAMMA + math.fsum(1.0 / k for k in range(1, l))


def digamma_half_int(l: int) -> float:
    """psi_0(l + 1/2) for an integer l >= 0."""
    if l < 0:
        raise DomainError(f"digamma_half_int requires l >= 0, got {l}")
    return -EULER_GAMMA - 2.0 * LN2 + 2.0 * math.fsum(1.0 / (2 * k + 1) for k in range(l))


def digamma_shift(x: float, n: int) -> float:
    """psi_0(x + n) via psi_0(x) + sum_{k=0}^{n-1} 1/(x+k)."""
    if n < 0:
        raise DomainError("shift must be non-negative")
    return digamma(x) + math.fsum(1.0 / (x + k) for k in range(n))


def pochhammer(a: float, k: int) -> float:
    """Rising factorial (a)_k as a direct product; (a)_0 = 1."""
    if k < 0:
        raise DomainError(f"pochhammer requires k >= 0, got {k}")
    out = 1.0
    for j in range(k):
        out *= a + j
    return out


def upper_incomplete_gamma(s: float, y):
    """Gamma(s, y) for real s (any sign) and y > 0; vectorised over y."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("upper_incomplete_gamma requires y > 0")
    if s > 0:
        return sc.gammaincc(s, y) * math.gamma(s)
    if s == 0:
        return sc.exp1(y)
    out = np.empty_like(y)
    big = y >= 1.0
    if np.any(big):
        out[big] = _gamma_cf(s, y[big])
    if np.any(~big):
        out[~big] = _gamma_recurrence(s, y[~big])
    return out


def _gamma_cf(s: float, y: np.ndarray) -> np.ndarray:
    # Legendre continued fraction, modified Lentz.
    tiny = 1e-300
    b = y + 1.0 - s
    c = np.full_like(y, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    # converged entries are frozen; round-off jitter would otherwise keep
    # some element of a large batch above the threshold forever
    live = np.ones(y.shape, dtype=bool)
    for i in range(1, SERIES_MAX_TERMS):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(live, h * delta, h)
        live &= ~(np.abs(delta - 1.0) < 4e-16)
        if not live.any():
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return np.exp(-y + s * np.log(y)) * h


def _gamma_recurrence(s: float, y: np.ndarray) -> np.ndarray:
    # Gamma(t, y) = (Gamma(t+1, y) - y**t e**-y) / t, stable for y < 1.
    n = math.ceil(-s)
    t = s + n
    val = sc.exp1(y) if t == 0 else sc.gammaincc(t, y) * math.gamma(t)
    for _ in range(n):
        t -= 1.0
        val = (val - np.exp(t * np.log(y) - y)) / t
    return val


# ---------------------------------------------------------------------------
# Meijer G family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeijerFamilyParams:
    m: int
    alpha: float
    q: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}")
        if not self.alpha > -1:
            raise ParameterError(f"alpha must exceed -1, got {self.alpha!r}")


def terminating_2f2(m: int, alpha: float, q: float, z):
    """2F2(1-m, m+2a+2; 2a+2, 2a+2-q | z) as its m-term finite sum."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    if not alpha > -1:
        raise ParameterError("alpha must exceed -1")
    c2 = 2 * alpha + 2 - q
    if _is_nonpositive_int(c2) and c2 >= -(m - 1):
        raise ParameterError(f"2*alpha+2-q = {c2} gives a zero denominator in the sum")
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    zk = np.ones_like(z)
    for k in range(m):
        coef = (pochhammer(1 - m, k) * pochhammer(m + 2 * alpha + 2, k)
                / (pochhammer(2 * alpha + 2, k) * pochhammer(c2, k) * math.factorial(k)))
        total = total + coef * zk
        zk = zk * z
    return total if total.ndim else float(total)


def meijer_g_1_1(params: MeijerFamilyParams, y):
    """G^{1,1}_{2,3}(q | y) as prefactor * y**(2a+1) * terminating 2F2."""
    m, a, q = params.m, params.alpha, params.q
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("meijer_g_1_1 requires y > 0")
    pre = gamma_ratio([m + 2 * a + 2], [m, 2 * a + 2, 2 * a + 2 - q])
    out = pre * y ** (2 * a + 1) * terminating_2f2(m, a, q, y)
    return out if out.ndim else float(out)


def _residue_weights(m: int, alpha: float) -> list[float]:
    """Partial-fraction residues r_k of (2a+2-s)_m / (s)_m at s = -k."""
    return [(-1) ** k * pochhammer(2 * alpha + 2 + k, m) / (math.factorial(k) * math.factorial(m - 1 - k))
            for k in range(m)]


def meijer_g_2_1(params: MeijerFamilyParams, y, tol: float = 1e-15, method: str = "auto"):
    """G^{2,1}_{2,3}(q | y) for y > 0.

    ``method="series"`` sums the residues at the left poles s = -k
    (k < m) and s = q - k (k >= 0); q must not be an integer.
    ``method="incgamma"`` uses the exact decomposition

        (-1)**m y**-q e**-y + sum_{k<m} r_k y**k Gamma(-q-k, y)

    which holds for every real q and stays accurate at large y.
    ``"auto"`` takes the series for y <= SERIES_SWITCH_Y when q is not an
    integer and the incomplete-gamma form otherwise.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    if np.any(y <= 0):
        raise DomainError("meijer_g_2_1 requires y > 0")
    if method == "series":
        out = _g21_series(params, y, tol)
    elif method == "incgamma":
        out = _g21_incgamma(params, y)
    elif method == "auto":
        out = np.empty_like(y)
        small = y <= SERIES_SWITCH_Y if not _is_int(params.q) else np.zeros(y.shape, bool)
        if np.any(small):
            out[small] = _g21_series(params, y[small], tol)
        if np.any(~small):
            out[~small] = _g21_incgamma(params, y[~small])
    else:
        raise ParameterError(f"unknown method {method!r}")
    return float(out[0]) if scalar else out


def _g21_series(params: MeijerFamilyParams, y: np.ndarray, tol: float) -> np.ndarray:
    m, a, q = params.m, params.alpha, params.q
    if _is_int(q):
        raise ParameterError("residue series needs non-integer q (colliding poles)")
    # poles of Gamma(s): finite because 1/Gamma(m+s) kills k >= m
    finite = np.zeros_like(y)
    for k, r in enumerate(_residue_weights(m, a)):
        finite += r * math.gamma(-q - k) * y ** k
    # poles of Gamma(s-q)
    total = np.zeros_like(y)
    small_run = np.zeros(y.shape, dtype=int)
    ymq = y ** (-q)
    yk = np.ones_like(y)
    for k in range(SERIES_MAX_TERMS):
        coef = (-1) ** k / math.factorial(k) if k < 170 else 0.0
        coef *= pochhammer(2 * a + 2 - q + k, m) / pochhammer(q - k, m)
        with np.errstate(over="ignore", invalid="ignore"):
            term = coef * yk * ymq
            total = total + term
        if not np.all(np.isfinite(total)):
            raise ConvergenceError("G21 residue series overflowed; use the incomplete-gamma form")
        partial = np.abs(total + finite)
        small_run = np.where(np.abs(term) < tol * partial, small_run + 1, 0)
        if np.all(small_run >= 3):
            return total + finite
        with np.errstate(over="ignore"):
            yk = yk * y
    raise ConvergenceError(f"G21 residue series not converged after {SERIES_MAX_TERMS} terms")


def _g21_incgamma(params: MeijerFamilyParams, y: np.ndarray) -> np.ndarray:
    m, a, q = params.m, params.alpha, params.q
    out = (-1) ** m * np.exp(-q * np.log(y) - y)
    for k, r in enumerate(_residue_weights(m, a)):
        out = out + r * y ** k * upper_incomplete_gamma(-q - k, y)
    return out


def mellin_g21(params: MeijerFamilyParams, s: float) -> float:
    """Closed-form Mellin transform int_0^inf y**(s-1) G21(q|y) dy.

    Valid for s > max(0, q).
    """
    m, a, q = params.m, params.alpha, params.q
    if not s > max(0.0, q):
        raise DomainError(f"Mellin transform of G21 needs s > max(0, q), got s={s}")
    # Gamma(m+2a+2-s) / Gamma(2a+2-s) is the polynomial (2a+2-s)_m
    return gamma_ratio([s, s - q], [m + s]) * pochhammer(2 * a + 2 - s, m)
