"""Acceptance criteria 1-10, one pass/fail line each in the terminal summary."""
import json
import math
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import integrate

from bureshall import closed_form as cf
from bureshall.closed_form import Dims, EnsembleParams
from bureshall.density import density_moment, kernel_quadrature
from bureshall.oracle import constrained_average_m2, constrained_average_m3, unconstrained_average
from bureshall.sampling import (constrain, estimate_entropy_stats, mean_and_stderr, sample_bures_matrix_model,
                                sample_unconstrained_mcmc, statistic_values)
from bureshall.special import EULER_GAMMA, MeijerFamilyParams, meijer_g_2_1, mellin_g21

from conftest import ACCEPTANCE_LINES

SIGMAS = 3


@contextmanager
def criterion(number, label, budget_s):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < budget_s, f"runtime {elapsed:.1f}s over budget {budget_s}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {label}  ({elapsed:.2f}s, budget {budget_s}s)"
        ACCEPTANCE_LINES[number] = line
        print(line)


def within_sigma(est, se, ref):
    assert se > 0
    assert abs(est - ref) <= SIGMAS * se, f"{est} vs {ref}: {(est - ref) / se:.2f} sigma"


def test_c01_specialisation():
    with criterion(1, "general-alpha averages reduce to the (m, n) forms, 78 pairs", 1.0):
        worst = 0.0
        pairs = 0
        for n in range(1, 13):
            for m in range(1, n + 1):
                d = Dims(m, n)
                p = d.params()
                for gen, mn in ((cf.avg_purity_general(p), cf.avg_purity_bures(d)),
                                (cf.avg_vn_general(p), cf.avg_vn_bures(d))):
                    if mn == 0.0:
                        assert abs(gen) < 1e-14
                    else:
                        worst = max(worst, abs(gen - mn) / abs(mn))
                pairs += 1
        assert pairs == 78
        assert worst <= 1e-12


def test_c02_quadrature_m2():
    with criterion(2, "m = 2 quadrature oracle vs closed forms, n = 2..5", 5.0):
        assert cf.avg_purity_bures(Dims(2, 2)) == pytest.approx(7 / 8, rel=1e-15)
        assert cf.avg_vn_bures(Dims(2, 2)) == pytest.approx(2 * math.log(2) - 7 / 6, rel=1e-14)
        for n in (2, 3, 4, 5):
            d = Dims(2, n)
            a = d.params().alpha
            assert abs(constrained_average_m2(a, "S_P", tol=1e-9).value - cf.avg_purity_bures(d)) <= 1e-8
            assert abs(constrained_average_m2(a, "S_vN", tol=1e-9).value - cf.avg_vn_bures(d)) <= 1e-8


def test_c03_quadrature_m3():
    with criterion(3, "m = 3 quadrature oracle vs closed forms, n = 3..5", 60.0):
        for n in (3, 4, 5):
            d = Dims(3, n)
            a = d.params().alpha
            assert abs(constrained_average_m3(a, "S_P", tol=1e-7).value - cf.avg_purity_bures(d)) <= 1e-6
            assert abs(constrained_average_m3(a, "S_vN", tol=1e-7).value - cf.avg_vn_bures(d)) <= 1e-6


def test_c04_unconstrained_oracle():
    with criterion(4, "unconstrained oracle vs induced means, m <= 2", 5.0):
        assert cf.induced_purity_mean(EnsembleParams(1, 0.0)) == pytest.approx(2.0, rel=1e-15)
        assert cf.induced_vn_mean(EnsembleParams(1, 0.0)) == pytest.approx(1 - EULER_GAMMA, rel=1e-14)
        for m in (1, 2):
            for a in (-0.5, 0.0, 0.5, 1.5):
                p = EnsembleParams(m, a)
                assert abs(unconstrained_average(m, a, "T_P", tol=1e-9).value - cf.induced_purity_mean(p)) <= 1e-8
                assert abs(unconstrained_average(m, a, "T_vN", tol=1e-9).value - cf.induced_vn_mean(p)) <= 1e-8


def test_c05_finite_sum_identities():
    with criterion(5, "I_beta and H_q finite sums vs closed forms, pair identities", 1.0):
        for m in range(1, 7):
            for a in (-0.5, 0.0, 0.5, 1.0, 1.5, 2.5):
                p = EnsembleParams(m, a)
                for q in (a, a + 1):
                    for beta in (0, 1, 2):
                        assert abs(cf.I_beta_sum(q, beta, p) - cf.I_beta_closed(q, beta, p)) <= 1e-11
                    assert abs(cf.H_q_sum(q, p) - cf.H_q_closed(q, p)) <= 1e-10
                assert abs(cf.I_beta_closed(a, 1, p) + cf.I_beta_closed(a + 1, 1, p) - cf.I1_pair(p)) <= 1e-11
                assert abs(cf.H_q_closed(a, p) + cf.H_q_closed(a + 1, p) - cf.H_pair(p)) <= 1e-11


MELLIN = ((1, 0.0, 0.5, 1.0), (2, -0.5, -0.5, 0.5), (2, 0.5, 1.5, 2.0),
          (3, 0.5, 0.5, 1.3), (3, 1.5, 2.5, 3.0), (4, 0.5, 1.5, 2.5))


def test_c06_mellin():
    with criterion(6, "Mellin transform of G21, 6 cases and the sqrt(pi) value", 10.0):
        assert mellin_g21(MeijerFamilyParams(1, 0.0, 0.5), 1.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        for m, a, q, s in MELLIN:
            mp = MeijerFamilyParams(m, a, q)
            f = lambda y: y ** (s - 1) * float(meijer_g_2_1(mp, y))
            head, _ = integrate.quad(f, 0, 1, epsabs=1e-13, epsrel=1e-11, limit=400)
            tail, _ = integrate.quad(f, 1, np.inf, epsabs=1e-13, epsrel=1e-11, limit=400)
            ref = mellin_g21(mp, s)
            assert abs(head + tail - ref) <= 1e-6 * abs(ref)


def test_c07_density_closure():
    with criterion(7, "one-point density moments and representation agreement", 120.0):
        for m, a in ((2, -0.5), (2, 0.5), (3, 0.5)):
            p = EnsembleParams(m, a)
            assert abs(density_moment(p, "unity").value - m) <= 1e-5
            assert abs(density_moment(p, "x").value - m * (m + 2 * a + 1) / 2) <= 1e-5
            assert abs(density_moment(p, "x_squared").value - cf.induced_purity_mean(p)) <= 1e-5
            assert abs(density_moment(p, "x_log_x").value - cf.induced_vn_mean(p)) <= 1e-4
            for x in (0.5, 2.0, 5.0):
                for q in (a, a + 1):
                    fin = kernel_quadrature(q, p, x, 1e-9, "finite").value
                    tail = kernel_quadrature(q, p, x, 1e-9, "tail").value
                    assert abs(fin - tail) <= 1e-6


def test_c08_mcmc_gates():
    with criterion(8, "MCMC gates at seed 42, 2e5 samples, (2,2) and (4,5)", 120.0):
        for d in (Dims(2, 2), Dims(4, 5)):
            p = d.params()
            batch = sample_unconstrained_mcmc(p, 200_000, seed=42)
            assert batch.samples.shape == (200_000, d.m)
            lam, theta = constrain(batch)
            sp = estimate_entropy_stats(lam, "S_P")
            sv = estimate_entropy_stats(lam, "S_vN")
            within_sigma(sp.mean, sp.std_err, cf.avg_purity_bures(d))
            within_sigma(sv.mean, sv.std_err, cf.avg_vn_bures(d))
            k = d.m * (d.m + 2 * p.alpha + 1) / 2
            within_sigma(*mean_and_stderr(theta, False), k)
            within_sigma(*mean_and_stderr(theta ** 2, False), k * (k + 1))
            # correlation: mean of standardised products
            s = statistic_values(lam, "S_P")
            z = (theta - theta.mean()) / theta.std() * (s - s.mean()) / s.std()
            within_sigma(*mean_and_stderr(z, False), 0.0)


def test_c09_matrix_model():
    with criterion(9, "matrix-model sampler at m = n, (2,2) and (3,3), 1e5 draws", 60.0):
        for d in (Dims(2, 2), Dims(3, 3)):
            batch = sample_bures_matrix_model(d, 100_000, seed=42)
            assert not batch.experimental
            sp = estimate_entropy_stats(batch, "S_P")
            sv = estimate_entropy_stats(batch, "S_vN")
            within_sigma(sp.mean, sp.std_err, cf.avg_purity_bures(d))
            within_sigma(sv.mean, sv.std_err, cf.avg_vn_bures(d))


def _verify_json():
    proc = subprocess.run([sys.executable, "-m", "bureshall", "verify", "--level", "full", "--seed", "1",
                           "--format", "json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    d = json.loads(proc.stdout)
    d["elapsed_ms"] = 0
    return json.dumps(d, indent=2)


def test_c10_determinism():
    with criterion(10, "full verify with seed 1 is byte-identical across runs", 300.0):
        first = _verify_json()
        second = _verify_json()
        assert first == second
