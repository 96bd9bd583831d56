"""One-point eigenvalue density of the unconstrained ensemble.

    h1(x) = (G_a(x) + G_{a+1}(x)) / (2m),
    G_q(x) = int_0^1 G11(q|tx) G21(q|tx) dt = -int_1^inf G11(q|tx) G21(q|tx) dt.

The two representations agree because the integral of the kernel product
over (0, inf) vanishes.  The finite form is used for small x, the tail form
for large x where the finite one would be a difference of O(1) quantities.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .closed_form import EnsembleParams
from .errors import ConvergenceError, ParameterError
from .quadrature import QuadratureResult, adaptive_gk, gauss_legendre, geometric_breaks
from .special import MeijerFamilyParams, meijer_g_1_1, meijer_g_2_1

# relative floor for reported error estimates: the G-function evaluations
# themselves are good to about 1e-12 relative
_ACCURACY_FLOOR = 1e-11

WEIGHTS = ("unity", "x", "x_squared", "x_log_x")

# below this x the moment integrand is replaced by its leading power
SMALL_X = 1e-8
# moment integration: F accumulated upward below, downward above
SPLIT_X = 1.0
# finite representation up to here, tail representation beyond
REPRESENTATION_SWITCH_X = 2.0
# Gauss orders compared by density_moment, most accurate last
MOMENT_ORDERS = (16, 20, 24)


def kernel_product(q: float, params: EnsembleParams, y):
    """G11(q|y) * G21(q|y), vectorised over y > 0."""
    mp = MeijerFamilyParams(params.m, params.alpha, q)
    y = np.asarray(y, dtype=float)
    return meijer_g_1_1(mp, y) * meijer_g_2_1(mp, y)


def _tail_end(q: float, params: EnsembleParams, x: float, tol: float) -> float:
    """Smallest probed y >= x beyond which |y * K(y)| stays below tol * 1e-3."""
    y = max(x, 1.0)
    while True:
        probe = y * np.array([1.0, 1.25, 1.5, 2.0])
        if np.all(np.abs(probe * kernel_product(q, params, probe)) < tol * 1e-3) and y > 10:
            return y
        y *= 1.5
        if y > 1e4:
            raise ConvergenceError("kernel tail did not decay")


def kernel_quadrature(q: float, params: EnsembleParams, x: float, tol: float = 1e-6,
                      representation: str = "finite") -> QuadratureResult:
    if not x > 0:
        raise ParameterError("x must be positive")
    if representation == "finite":
        f = lambda t: kernel_product(q, params, t * x)
        return adaptive_gk(f, geometric_breaks(0.0, 1.0, "left"), tol=tol)
    if representation == "tail":
        y_end = _tail_end(q, params, x, tol)
        t_end = y_end / x
        if t_end <= 1.0:
            return QuadratureResult(0.0, 0.0, 1)
        breaks = np.geomspace(1.0, t_end, 24)
        r = adaptive_gk(lambda t: kernel_product(q, params, t * x), breaks, tol=tol)
        return QuadratureResult(-r.value, r.abs_error_estimate, r.evaluations)
    raise ParameterError(f"representation must be 'finite' or 'tail', got {representation!r}")


def G_q_kernel(q: float, params: EnsembleParams, x: float, tol: float = 1e-6,
               representation: str = "auto") -> float:
    """G_q(x) to absolute accuracy ``tol`` (the quadrature runs at tol / 4)."""
    if representation == "auto":
        representation = "finite" if x <= REPRESENTATION_SWITCH_X else "tail"
    return kernel_quadrature(q, params, x, tol / 4, representation).value


def one_point_density(params: EnsembleParams, x: float, tol: float = 1e-6,
                      representation: str = "auto") -> float:
    a = params.alpha
    total = (G_q_kernel(a, params, x, tol, representation)
             + G_q_kernel(a + 1, params, x, tol, representation))
    return total / (2 * params.m)


@dataclass(frozen=True)
class DensityGrid:
    params: EnsembleParams
    points: tuple[tuple[float, float], ...]
    tol: float

    def __post_init__(self):
        xs = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("grid abscissae must be strictly increasing")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "h1"])
            for x, h in self.points:
                w.writerow([repr(x), repr(h)])

    @staticmethod
    def read_csv(path) -> list[tuple[float, float]]:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["x", "h1"]:
            raise ValueError(f"{path}: expected header x,h1")
        return [(float(a), float(b)) for a, b in rows[1:]]


def density_grid(params: EnsembleParams, xs, tol: float = 1e-6) -> DensityGrid:
    """Tabulate h1; negative round-off down to -tol is clamped to 0."""
    pts = []
    for x in xs:
        h = one_point_density(params, float(x), tol)
        if h < -tol:
            raise ConvergenceError(f"h1({x}) = {h} is negative beyond tolerance")
        pts.append((float(x), max(h, 0.0)))
    return DensityGrid(params, tuple(pts), tol)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def _weight_fn(weight: str):
    if weight == "unity":
        return lambda x: np.ones_like(x)
    if weight == "x":
        return lambda x: x
    if weight == "x_squared":
        return lambda x: x * x
    if weight == "x_log_x":
        return lambda x: x * np.log(x)
    raise ParameterError(f"weight must be one of {WEIGHTS}, got {weight!r}")


def _power_fit(f, x0: float, scale: float):
    """(f(x0), p) with f ~ c x**p fitted between x0 / scale and x0; p = None if no fit."""
    f0, f1 = float(f(np.array([x0]))[0]), float(f(np.array([x0 / scale]))[0])
    if f0 == 0.0 or f1 == 0.0 or f0 * f1 < 0:
        return f0, None
    return f0, math.log(f0 / f1) / math.log(scale)


def _power_head(f, x0: float) -> tuple[float, float]:
    """int_0^x0 f assuming a leading power there, with the spread of two fits as error."""
    vals = []
    for scale in (math.e, math.e ** 3):
        f0, p = _power_fit(f, x0, scale)
        if p is None:
            vals.append(0.5 * x0 * f0)
            continue
        if p <= -1:
            raise ConvergenceError("integrand not integrable at the origin")
        vals.append(x0 * f0 / (p + 1))
    return vals[0], abs(vals[0] - vals[1])


def _moment_end(ksum, tol: float) -> float:
    """x beyond which |x**3 K(x)| stays below tol * 1e-4 on a probe ladder."""
    x = 10.0
    while True:
        probe = x * np.array([1.0, 1.3, 1.7, 2.2, 3.0])
        if np.all(np.abs(probe ** 3 * ksum(probe)) < tol * 1e-4):
            return x
        x *= 1.25
        if x > 1e4:
            raise ConvergenceError("moment integrand did not decay")


def _moment_pass(params: EnsembleParams, weight: str, tol: float, order: int, du: float = 0.25):
    """One Gauss order over a log-x panel mesh.

    F(x) = int_0^x K is accumulated upward from the origin for x <= SPLIT_X
    and as -int_x^inf K downward from the cutoff above it, so an error in the
    extrapolated small-x head never leaks into the large-x weights.
    """
    a = params.alpha
    wfun = _weight_fn(weight)
    gx, gw = gauss_legendre(order)

    def ksum(y):
        return kernel_product(a, params, y) + kernel_product(a + 1, params, y)

    u0 = math.log(SMALL_X)
    u_end = math.log(_moment_end(ksum, tol))
    n_pan = math.ceil((u_end - u0) / du)
    h = (u_end - u0) / n_pan
    lo = u0 + h * np.arange(n_pan)
    half = 0.5 * h
    un = (lo + half)[:, None] + half * gx[None, :]
    sub_half = 0.5 * (un - lo[:, None])
    vv = (0.5 * (un + lo[:, None]))[..., None] + sub_half[..., None] * gx
    ev = np.exp(vv)
    xn = np.exp(un)
    # int from panel start to each node, and over each whole panel, in u = ln x
    partial = sub_half * ((ksum(ev.ravel()).reshape(ev.shape) * ev) @ gw)
    panel = half * ((ksum(xn.ravel()).reshape(xn.shape) * xn) @ gw)
    evals = ev.size + xn.size

    # K ~ c x**p near 0, so F(x) ~ F0 (x/x0)**(p+1)
    p = _local_power(ksum, SMALL_X)
    F0, F0_err = _power_head(ksum, SMALL_X)
    head, head_err = _power_head(lambda x: wfun(x) * F0 * (x / SMALL_X) ** (p + 1) / (2 * x), SMALL_X)

    before = np.concatenate([[0.0], np.cumsum(panel)[:-1]])
    after = np.concatenate([np.cumsum(panel[::-1])[::-1][1:], [0.0]])
    F_up = F0 + before[:, None] + partial
    F_down = -(after[:, None] + panel[:, None] - partial)
    upward = np.exp(lo + h) <= SPLIT_X
    Fn = np.where(upward[:, None], F_up, F_down)
    # m * w(x) h1(x) dx = w(x) F(x) / 2 du
    wn = wfun(xn)
    total = head + 0.5 * half * float(np.sum((wn * Fn) @ gw))
    # an offset in F0 moves every upward node by the same amount
    spread = 0.5 * half * float(np.sum((np.abs(wn) @ gw)[upward]))
    return total, evals + 8, head_err + F0_err * spread


def _local_power(f, x0: float) -> float:
    p = _power_fit(f, x0, math.e)[1]
    return 0.0 if p is None else p


def density_moment(params: EnsembleParams, weight: str, tol: float = 1e-5) -> QuadratureResult:
    """m * int_0^inf w(x) h1(x) dx.

    Runs three Gauss orders on a log-spaced panel mesh; their spread plus the
    spread of the small-x power extrapolation is the error estimate.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    passes = [_moment_pass(params, weight, tol, order=o) for o in MOMENT_ORDERS]
    vals = [v for v, _, _ in passes]
    head_err = passes[0][2]
    # two orders can agree by accident when special-function round-off
    # dominates; the 3x factor covers it on the m <= 6 grid checked against
    # the closed forms
    err = 3 * (max(vals) - min(vals) + head_err) + _ACCURACY_FLOOR * (abs(vals[-1]) + 1.0)
    return QuadratureResult(vals[-1], err, sum(e for _, e, _ in passes))
