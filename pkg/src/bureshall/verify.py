"""The verification suite behind ``bures verify``.

Every check compares two independently computed numbers and records the
identity it witnesses.  ``fast`` covers the exact identities, quadrature
oracles and Mellin spot checks; ``full`` adds the m = 3 oracle, the density
closure and the Monte Carlo gates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import closed_form as cf
from . import density, oracle, sampling
from .closed_form import Dims, EnsembleParams
from .quadrature import adaptive_gk, geometric_breaks
from .records import ResultEntry
from .special import MeijerFamilyParams, meijer_g_2_1, mellin_g21

ALPHA_GRID = (-0.5, 0.0, 0.5, 1.0, 1.5, 2.5)
MC_SIGMAS = 3.0


def _exact(name, value, reference, tol, witness, relative=False) -> ResultEntry:
    diff = abs(value - reference)
    if relative:
        diff /= abs(reference)
    return ResultEntry(name, value, reference=reference, abs_diff=abs(value - reference), tol=tol,
                       passed=bool(diff <= tol), witness=witness)


def _max_dev(name, pairs, tol, witness, relative=False) -> ResultEntry:
    """Worst deviation over (a, b) pairs, reported as value against reference 0."""
    worst = 0.0
    for a, b in pairs:
        d = abs(a - b)
        if relative:
            d /= max(abs(b), 1e-300)
        worst = max(worst, d)
    return ResultEntry(name, worst, reference=0.0, abs_diff=worst, tol=tol,
                       passed=bool(worst <= tol), witness=witness)


def _mc(name, value, std_err, reference, witness) -> ResultEntry:
    tol = MC_SIGMAS * std_err
    return ResultEntry(name, value, std_err=std_err, reference=reference,
                       abs_diff=abs(value - reference), tol=tol,
                       passed=bool(abs(value - reference) <= tol), witness=witness)


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def check_specialisation() -> list[ResultEntry]:
    dims = [Dims(m, n) for n in range(1, 13) for m in range(1, n + 1)]
    pur = [(cf.avg_purity_general(d.params()), cf.avg_purity_bures(d)) for d in dims]
    ent = [(cf.avg_vn_general(d.params()), cf.avg_vn_bures(d)) for d in dims if d.m > 1]
    w = "general-alpha mean at alpha = n - m - 1/2 equals the (m, n) form"
    return [
        _max_dev("purity: general form vs (m,n) form, 1<=m<=n<=12", pur, 1e-12, w, relative=True),
        _max_dev("entropy: general form vs (m,n) form, 2<=m<=n<=12", ent, 1e-12, w, relative=True),
        _max_dev("entropy at m=1 is zero", [(cf.avg_vn_bures(Dims(1, n)), 0.0) for n in range(1, 13)],
                 1e-14, "m = 1 subsystem is always pure"),
    ]


def _grid():
    for m in range(1, 7):
        for a in ALPHA_GRID:
            yield EnsembleParams(m, a)


def check_finite_sums() -> list[ResultEntry]:
    i_pairs, h_pairs = [], []
    for p in _grid():
        for q in (p.alpha, p.alpha + 1):
            for beta in (0, 1, 2):
                i_pairs.append((cf.I_beta_sum(q, beta, p), cf.I_beta_closed(q, beta, p)))
            h_pairs.append((cf.H_q_sum(q, p), cf.H_q_closed(q, p)))
    return [
        _max_dev("I_beta: finite sum vs closed form, beta=0,1,2", i_pairs, 1e-11,
                 "integral of x^beta G11 G21 collapses to a polynomial in m, alpha, q"),
        _max_dev("H_q: digamma sum vs closed form", h_pairs, 1e-10,
                 "beta-derivative of the G11 G21 integral at beta = 1 in simplified form"),
    ]


def check_pair_identities() -> list[ResultEntry]:
    i1, hp = [], []
    for p in _grid():
        a = p.alpha
        i1.append((cf.I_beta_closed(a, 1, p) + cf.I_beta_closed(a + 1, 1, p), cf.I1_pair(p)))
        hp.append((cf.H_q_closed(a, p) + cf.H_q_closed(a + 1, p), cf.H_pair(p)))
    return [
        _max_dev("I1 pair: I_a + I_(a+1) at beta=1", i1, 1e-11, "first-moment pair sum is -m(m+2a+1)"),
        _max_dev("H pair: H_a + H_(a+1)", hp, 1e-11, "entropy pair sum collapses to one digamma"),
    ]


def _hq_finite_difference(q: float, p: EnsembleParams) -> float:
    def d(h):
        return (cf.I_beta_sum(q, 1 + h, p) - cf.I_beta_sum(q, 1 - h, p)) / (2 * h)
    h = 1e-3
    return (4 * d(h / 2) - d(h)) / 3


def check_hq_derivative() -> list[ResultEntry]:
    pairs = []
    for m in (1, 2, 3, 4):
        for a in (-0.5, 0.5, 1.5):
            p = EnsembleParams(m, a)
            for q in (a, a + 1):
                pairs.append((_hq_finite_difference(q, p), cf.H_q_sum(q, p)))
    return [_max_dev("H_q vs finite-difference beta-derivative of I_beta", pairs, 1e-6,
                     "H_q is the beta-derivative of the finite-sum integral at beta = 1", relative=True)]


def check_moment_relations() -> list[ResultEntry]:
    pur, ent = [], []
    for p in _grid():
        pur.append((cf.purity_moment_relation(p, cf.induced_purity_mean(p)), cf.avg_purity_general(p)))
        ent.append((cf.vn_moment_relation(p, cf.induced_vn_mean(p)), cf.avg_vn_general(p)))
    return [
        _max_dev("purity moment relation maps induced mean to constrained mean", pur, 1e-12,
                 "E_f[S_P] = E_h[T_P] / (k (k + 1)), k the trace Gamma shape"),
        _max_dev("entropy moment relation maps induced mean to constrained mean", ent, 1e-12,
                 "E_f[S_vN] = psi(k + 1) - E_h[T_vN] / k"),
    ]


# ---------------------------------------------------------------------------
# Mellin transform spot checks
# ---------------------------------------------------------------------------

MELLIN_CASES = (
    (1, 0.0, 0.5, 1.0),
    (2, -0.5, -0.5, 0.5),
    (2, 0.5, 1.5, 2.0),
    (3, 0.5, 0.5, 1.3),
    (3, 1.5, 2.5, 3.0),
    (4, 0.5, 1.5, 2.5),
)


def mellin_numeric(mp: MeijerFamilyParams, s: float, tol: float = 1e-10) -> float:
    f = lambda y: y ** (s - 1) * meijer_g_2_1(mp, y)
    head = adaptive_gk(f, geometric_breaks(0.0, 1.0, "left"), tol=tol)
    tail = adaptive_gk(f, np.geomspace(1.0, 200.0, 30), tol=tol)
    return head.value + tail.value


def check_mellin() -> list[ResultEntry]:
    out = []
    for m, a, q, s in MELLIN_CASES:
        mp = MeijerFamilyParams(m, a, q)
        ref = mellin_g21(mp, s)
        out.append(_exact(f"Mellin of G21 (m={m}, alpha={a}, q={q}, s={s})", mellin_numeric(mp, s), ref,
                          1e-6, "Mellin transform of G21 is a ratio of gammas", relative=True))
    out.append(_exact("Mellin closed form at (1, 0, 1/2, 1) is sqrt(pi)", mellin_g21(MeijerFamilyParams(1, 0.0, 0.5), 1.0),
                      math.sqrt(math.pi), 1e-14, "analytic special value"))
    return out


def check_g21_methods() -> list[ResultEntry]:
    pairs = []
    y = np.array([0.5, 1.0, 2.0])
    for m in (1, 2, 3):
        for a in (-0.5, 0.5, 1.5):
            for q in (a, a + 1):
                mp = MeijerFamilyParams(m, a, q)
                s = meijer_g_2_1(mp, y, method="series")
                g = meijer_g_2_1(mp, y, method="incgamma")
                pairs.extend(zip(s, g))
    return [_max_dev("G21: residue series vs incomplete-gamma form", pairs, 1e-9,
                     "two independent evaluations of the same G function", relative=True)]


# ---------------------------------------------------------------------------
# quadrature oracles
# ---------------------------------------------------------------------------

def _oracle_entry(name, res, reference, tol, witness) -> ResultEntry:
    e = ResultEntry(name, res.value, reference=reference, error_estimate=res.abs_error_estimate,
                    tol=tol, witness=witness)
    e.passed = bool(e.abs_diff <= tol)
    return e


def check_oracle_m2() -> list[ResultEntry]:
    out = []
    for n in (2, 3, 4, 5):
        d = Dims(2, n)
        a = d.alpha
        out.append(_oracle_entry(f"quadrature S_P (m=2, n={n})", oracle.constrained_average_m2(a, "S_P"),
                                 cf.avg_purity_bures(d), 1e-8, "mean purity formula vs direct integration"))
        out.append(_oracle_entry(f"quadrature S_vN (m=2, n={n})", oracle.constrained_average_m2(a, "S_vN"),
                                 cf.avg_vn_bures(d), 1e-8, "mean entropy formula vs direct integration"))
        out.append(_oracle_entry(f"normalisation (m=2, n={n})", oracle.constrained_average_m2(a, "unity"),
                                 1.0, 1e-8, "normalisation constant of the constrained density"))
    return out


def check_oracle_m3() -> list[ResultEntry]:
    out = []
    for n in (3, 4, 5):
        d = Dims(3, n)
        a = d.alpha
        out.append(_oracle_entry(f"quadrature S_P (m=3, n={n})", oracle.constrained_average_m3(a, "S_P", tol=1e-8),
                                 cf.avg_purity_bures(d), 1e-6, "mean purity formula vs direct integration"))
        out.append(_oracle_entry(f"quadrature S_vN (m=3, n={n})", oracle.constrained_average_m3(a, "S_vN", tol=1e-8),
                                 cf.avg_vn_bures(d), 1e-6, "mean entropy formula vs direct integration"))
    out.append(_oracle_entry("normalisation (m=3, n=3)", oracle.constrained_average_m3(-0.5, "unity", tol=1e-8),
                             1.0, 1e-6, "normalisation constant of the constrained density"))
    return out


def check_oracle_unconstrained(alphas=(-0.5, 0.0, 0.5, 1.5)) -> list[ResultEntry]:
    out = []
    for m in (1, 2):
        for a in alphas:
            p = EnsembleParams(m, a)
            out.append(_oracle_entry(f"quadrature E_h[T_P] (m={m}, alpha={a})",
                                     oracle.unconstrained_average(m, a, "T_P", tol=1e-9),
                                     cf.induced_purity_mean(p), 1e-8, "induced purity mean vs direct integration"))
            out.append(_oracle_entry(f"quadrature E_h[T_vN] (m={m}, alpha={a})",
                                     oracle.unconstrained_average(m, a, "T_vN", tol=1e-9),
                                     cf.induced_vn_mean(p), 1e-8, "induced entropy mean vs direct integration"))
    out.append(_oracle_entry("gamma-log integral (d=2.5)", oracle.gamma_log_integral_check(2.5),
                             math.gamma(2.5) * cf.digamma(2.5), 1e-10,
                             "int e^-t t^(d-1) ln t dt = Gamma(d) psi(d)"))
    return out


# ---------------------------------------------------------------------------
# density closure
# ---------------------------------------------------------------------------

DENSITY_CASES = ((2, -0.5), (2, 0.5), (3, 0.5))


def check_density() -> list[ResultEntry]:
    out = []
    for m, a in DENSITY_CASES:
        p = EnsembleParams(m, a)
        refs = (("unity", m, 1e-5, "one-point density integrates to one per eigenvalue"),
                ("x", p.trace_shape, 1e-5, "first moment equals the trace Gamma shape"),
                ("x_squared", cf.induced_purity_mean(p), 1e-5, "second moment equals the induced purity mean"),
                ("x_log_x", cf.induced_vn_mean(p), 1e-4, "x ln x moment equals the induced entropy mean"))
        for weight, ref, tol, witness in refs:
            out.append(_oracle_entry(f"density moment {weight} (m={m}, alpha={a})",
                                     density.density_moment(p, weight), ref, tol, witness))
        pairs = [(density.one_point_density(p, x, representation="finite"),
                  density.one_point_density(p, x, representation="tail")) for x in (0.25, 1.0, 4.0)]
        out.append(_max_dev(f"density: finite vs tail representation (m={m}, alpha={a})", pairs, 1e-6,
                            "integral of G11 G21 over (0, inf) vanishes"))
    return out


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def correlation_stats(a: np.ndarray, b: np.ndarray, independent: bool) -> tuple[float, float]:
    z = (a - a.mean()) * (b - b.mean()) / (a.std() * b.std())
    return sampling.mean_and_stderr(z, independent)


def mcmc_checks(dims: Dims, count: int, seed: int) -> list[ResultEntry]:
    p = dims.params()
    tag = f"(m={dims.m}, n={dims.n})"
    batch = sampling.sample_unconstrained_mcmc(p, count, seed=seed)
    lam, theta = sampling.constrain(batch)
    sp = sampling.estimate_entropy_stats(lam, "S_P")
    sv = sampling.estimate_entropy_stats(lam, "S_vN")
    tp = sampling.estimate_entropy_stats(batch, "T_P")
    k = p.trace_shape
    t1 = sampling.mean_and_stderr(theta, False)
    t2 = sampling.mean_and_stderr(theta ** 2, False)
    corr = correlation_stats(theta, sampling.statistic_values(lam, "S_P"), False)
    out = [
        _mc(f"MCMC S_P {tag}", sp.mean, sp.std_err, cf.avg_purity_bures(dims), "mean purity formula"),
        _mc(f"MCMC S_vN {tag}", sv.mean, sv.std_err, cf.avg_vn_bures(dims), "mean entropy formula"),
        _mc(f"MCMC E_h[T_P] {tag}", tp.mean, tp.std_err, cf.induced_purity_mean(p), "induced purity mean"),
        _mc(f"MCMC theta mean {tag}", t1[0], t1[1], k, "trace is Gamma with shape m(m+2a+1)/2"),
        _mc(f"MCMC theta second moment {tag}", t2[0], t2[1], k * (k + 1), "trace is Gamma with shape m(m+2a+1)/2"),
        _mc(f"MCMC corr(theta, S_P) {tag}", corr[0], corr[1], 0.0, "trace independent of the normalised spectrum"),
    ]
    # sample-level moment relation: same batch, errors combined conservatively
    mapped = cf.purity_moment_relation(p, tp.mean)
    scale = cf.purity_moment_relation(p, 1.0)
    e = ResultEntry(f"MCMC moment relation closure {tag}", mapped, std_err=scale * tp.std_err + sp.std_err,
                    reference=sp.mean, witness="purity moment relation on samples")
    e.tol = MC_SIGMAS * e.std_err
    e.passed = bool(e.abs_diff <= e.tol)
    out.append(e)
    return out


def mcmc_gamma_checks(seed: int, count: int = 50000) -> list[ResultEntry]:
    out = []
    for a in (-0.5, 0.0, 1.5):
        b = sampling.sample_unconstrained_mcmc(EnsembleParams(1, a), count, seed=seed)
        x = b.samples[:, 0]
        m1 = sampling.mean_and_stderr(x, False)
        m2 = sampling.mean_and_stderr(x * x, False)
        out.append(_mc(f"MCMC m=1 E[x] (alpha={a})", m1[0], m1[1], a + 1, "m = 1 target is Gamma(alpha + 1)"))
        out.append(_mc(f"MCMC m=1 E[x^2] (alpha={a})", m2[0], m2[1], (a + 1) * (a + 2), "m = 1 target is Gamma(alpha + 1)"))
    return out


def matrix_model_checks(dims: Dims, count: int, seed: int) -> list[ResultEntry]:
    b = sampling.sample_bures_matrix_model(dims, count, seed=seed)
    sp = sampling.estimate_entropy_stats(b, "S_P")
    sv = sampling.estimate_entropy_stats(b, "S_vN")
    tag = f"(m={dims.m}, n={dims.n})"
    return [
        _mc(f"matrix model S_P {tag}", sp.mean, sp.std_err, cf.avg_purity_bures(dims), "mean purity formula"),
        _mc(f"matrix model S_vN {tag}", sv.mean, sv.std_err, cf.avg_vn_bures(dims), "mean entropy formula"),
    ]


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable[[int], list[ResultEntry]]
    level: str


SUITES = (
    Suite("specialisation", lambda seed: check_specialisation(), "fast"),
    Suite("finite_sums", lambda seed: check_finite_sums(), "fast"),
    Suite("pairs", lambda seed: check_pair_identities(), "fast"),
    Suite("hq_derivative", lambda seed: check_hq_derivative(), "fast"),
    Suite("moment_relations", lambda seed: check_moment_relations(), "fast"),
    Suite("g21_methods", lambda seed: check_g21_methods(), "fast"),
    Suite("mellin", lambda seed: check_mellin(), "fast"),
    Suite("oracle_m2", lambda seed: check_oracle_m2(), "fast"),
    Suite("oracle_unconstrained", lambda seed: check_oracle_unconstrained(), "fast"),
    Suite("oracle_m3", lambda seed: check_oracle_m3(), "full"),
    Suite("density", lambda seed: check_density(), "full"),
    Suite("mcmc_gamma", lambda seed: mcmc_gamma_checks(seed), "full"),
    Suite("mcmc", lambda seed: mcmc_checks(Dims(2, 2), 200_000, seed) + mcmc_checks(Dims(4, 5), 200_000, seed), "full"),
    Suite("matrix_model", lambda seed: matrix_model_checks(Dims(2, 2), 100_000, seed)
          + matrix_model_checks(Dims(3, 3), 100_000, seed), "full"),
)


def run_verification(level: str = "fast", seed: int = 0) -> list[ResultEntry]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    out = []
    for suite in SUITES:
        if suite.level == "fast" or level == "full":
            out.extend(suite.run(seed))
    return out
