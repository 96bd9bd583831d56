"""Small adaptive quadrature toolkit shared by the density and oracle code.

``adaptive_gk`` is a globally adaptive Gauss-Kronrod (7, 15) integrator
working on vectorised integrands.  ``geometric_breaks`` builds the graded
initial mesh used for integrands with an algebraic endpoint singularity.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point abscissae on [-1, 1] and the matching Kronrod / Gauss weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[1:7:2] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[9:15:2] = _WG[:3][::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0 or self.evaluations < 1:
            raise ValueError("invalid QuadratureResult")


def _gk_panels(f, a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = half * (fx @ _WK)
    g = half * (fx @ _WG15)
    return k, np.abs(k - g)


def adaptive_gk(f, breaks, tol: float = 1e-10, rel_tol: float = 0.0,
                max_panels: int = 4000) -> QuadratureResult:
    """Integrate vectorised ``f`` over the union of panels given by ``breaks``.

    Panels are bisected, worst first, until the summed Kronrod-Gauss error
    estimate drops below ``max(tol, rel_tol * |value|)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    vals, errs = _gk_panels(f, a, b)
    evals = 15 * len(a)
    heap = [(-e, float(lo), float(hi), float(v)) for e, lo, hi, v in zip(errs, a, b, vals)]
    heapq.heapify(heap)
    total, err = float(np.sum(vals)), float(np.sum(errs))
    rounds = 0
    while err > max(tol, rel_tol * abs(total)):
        if len(heap) >= max_panels:
            raise ConvergenceError(
                f"adaptive quadrature hit {max_panels} panels, error estimate {err:.3e}")
        # split a batch of the worst panels at once to keep numpy calls large
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 16))]
        lo = np.array([p[1] for p in batch])
        hi = np.array([p[2] for p in batch])
        mid = 0.5 * (lo + hi)
        na = np.concatenate([lo, mid])
        nb = np.concatenate([mid, hi])
        nv, ne = _gk_panels(f, na, nb)
        evals += 15 * len(na)
        for p in batch:
            total -= p[3]
            err -= -p[0]
        for e, l, h, v in zip(ne, na, nb, nv):
            heapq.heappush(heap, (-e, float(l), float(h), float(v)))
        total += float(np.sum(nv))
        err += float(np.sum(ne))
        rounds += 1
        # resum to keep round-off from accumulating in the running totals
        if rounds % 32 == 0:
            total = float(np.sum([p[3] for p in heap]))
            err = float(np.sum([-p[0] for p in heap]))
    return QuadratureResult(total, float(max(err, 0.0)), evals)


def geometric_breaks(a: float, b: float, singular: str = "left", ratio: float = 0.5,
                     depth: int = 40) -> np.ndarray:
    """Breakpoints on [a, b] graded geometrically toward a singular endpoint."""
    width = b - a
    steps = ratio ** np.arange(depth, -1, -1)
    if singular == "left":
        inner = a + width * steps
        return np.concatenate([[a], inner])
    if singular == "right":
        inner = b - width * steps[::-1]
        return np.concatenate([inner, [b]])
    if singular == "both":
        mid = 0.5 * (a + b)
        left = geometric_breaks(a, mid, "left", ratio, depth)
        right = geometric_breaks(mid, b, "right", ratio, depth)
        return np.concatenate([left, right[1:]])
    raise ValueError(f"singular must be left/right/both, got {singular!r}")


def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)
