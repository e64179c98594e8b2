"""End-to-end acceptance checks; each prints one PASS/FAIL line.

Tolerances are fixed by the acceptance contract and must not be relaxed here.
Where the contract leaves a parameter panel open, the panel is stated in the
test body.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import i0e

from acceptance_log import record
from kappamu_aep import aep, awgn, fading
from kappamu_aep.aep import SeriesControl, Which
from kappamu_aep.awgn import ModulationSpec
from kappamu_aep.fading import KappaMuShadowedParams as Params
from kappamu_aep.fading import McControl
from kappamu_aep.specfun import marcum_q1
from reference_tables import DQPSK_BEP_PRINTED, MPSK_SEP_PRINTED

DQPSK = ModulationSpec.parse("dqpsk")


def db(x):
    return 10.0 ** (x / 10.0)


def test_criterion_01_mpsk_table():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for (M, g), (exact_ref, approx_ref) in MPSK_SEP_PRINTED.items():
        for name, val, ref in (("exact", awgn.mpsk_sep_exact(M, g), exact_ref),
                               ("approx", awgn.mpsk_sep_approx(M, g), approx_ref)):
            err = abs(val - ref) / ref
            worst = max(worst, err)
            if err > 1e-3:
                bad.append(f"M={M} g={g} {name} {val:.5g} vs {ref:.4g}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0
    record(1, "M-PSK SEP table", ok, f"worst rel {worst:.2e}, {elapsed:.2f}s; off: {'; '.join(bad) or 'none'}")
    assert ok


def test_criterion_02_dqpsk_table():
    t0 = time.perf_counter()
    worst = 0.0
    for g, (exact_ref, approx_ref) in DQPSK_BEP_PRINTED.items():
        worst = max(worst, abs(awgn.dqpsk_bep_exact(g) / exact_ref - 1),
                    abs(awgn.dqpsk_bep_approx(g) / approx_ref - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 1.0
    record(2, "DQPSK BEP table", ok, f"{len(DQPSK_BEP_PRINTED)} rows, worst rel {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_03_bound_ordering():
    g = np.geomspace(1e-3, 30.0, 200)
    exact = np.array([awgn.dqpsk_bep_exact(x) for x in g])
    lo, hi = awgn.dqpsk_bep_lower(g), awgn.dqpsk_bep_upper(g)
    bad = g[(lo > exact) | (exact > hi)]
    ok = bad.size == 0
    record(3, "L <= H2 <= U", ok, f"{bad.size} violations on 200 points")
    assert ok


def _marcum_quad(a, b):
    # scaled Bessel keeps the integrand finite: x exp(-(x - a)^2 / 2) i0e(a x)
    f = lambda x: x * math.exp(-0.5 * (x - a) ** 2) * i0e(a * x)
    val, _ = integrate.quad(f, b, math.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    return val


def test_criterion_04_marcum():
    grid = np.linspace(0.0, 5.0, 20)
    worst = max(abs(marcum_q1(a, b) / _marcum_quad(a, b) - 1) for a, b in itertools.product(grid, grid))
    edge = max(
        max(abs(marcum_q1(a, 0.0) - 1.0) for a in grid),
        max(abs(marcum_q1(0.0, b) - math.exp(-b * b / 2)) for b in grid),
    )
    ok = worst <= 1e-9 and edge <= 1e-12
    record(4, "Marcum Q1 series vs quadrature", ok, f"worst rel {worst:.2e}, edge cases {edge:.1e}")
    assert ok


def test_criterion_05_pdf_moments():
    rng = np.random.default_rng(20240605)
    tuples = [Params(rng.uniform(0, 10), rng.uniform(0.5, 4), rng.uniform(0.5, 10), rng.uniform(0.5, 50))
              for _ in range(10)]
    t0 = time.perf_counter()
    norm = max(abs(fading.integrate_pdf(p) - 1.0) for p in tuples)
    mean = max(abs(fading.integrate_pdf(p, lambda g: g) / p.gamma_bar - 1.0) for p in tuples)
    elapsed = time.perf_counter() - t0
    ok = norm <= 1e-8 and mean <= 1e-6 and elapsed < 10.0
    record(5, "pdf normalization and mean", ok, f"|1-int| {norm:.1e}, mean rel {mean:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_06_sampler():
    n = 100_000
    tuples = [Params(2, 2, 3, 5), Params(5, 0.6, 1.2, 3), Params(0.5, 3, 8, 40), Params(10, 1, 2.5, 10)]
    limit = 1.63 / math.sqrt(n)
    ks, pvals = [], []
    for i, p in enumerate(tuples):
        x = fading.sample(p, McControl(n, 100 + i, 4))
        F = np.sort(fading.cdf_numeric(p, x))
        k = np.arange(1, n + 1)
        ks.append(max(np.max(k / n - F), np.max(F - (k - 1) / n)))
        if p.mu == int(p.mu):
            y = fading.sample(p, McControl(n, 200 + i, 4), "physical")
            pvals.append(stats.ks_2samp(x, y).pvalue)
    ok = max(ks) <= limit and min(pvals) > 0.01
    record(6, "sampler fidelity", ok,
           f"max KS {max(ks):.2e} vs {limit:.2e}; two-sample p min {min(pvals):.3f} over {len(pvals)} tuples")
    assert ok


# panels: the weak/strong LOS parameter sets of the M-PSK and DQPSK sweeps,
# plus the truncation set, each over 0-20 dB
MPSK_PANEL = [(1, 1, 1.3), (1, 2, 1.3), (1, 3, 1.3), (10, 2, 1), (10, 2, 2), (10, 2, 4)]
DQPSK_PANEL = [(1, 1, 1.3), (1, 2, 1.3), (1, 3, 1.3), (10, 2.3, 1), (10, 2.3, 2), (10, 2.3, 4.7),
               (1, 2.3, 4.7), (5, 2.3, 4.7)]
SNR_7 = (0, 5, 10, 15, 20)


def test_criterion_07_oracle_triangle():
    t0 = time.perf_counter()
    asep_err = 0.0
    for (k, mu, m), d in itertools.product(MPSK_PANEL, SNR_7):
        p = Params(k, mu, m, db(d))
        for M in (4, 8, 16):
            quad = aep.aep_quadrature_oracle(p, ModulationSpec.parse(f"mpsk:{M}"), Which.APPROX_EP)
            asep_err = max(asep_err, abs(aep.asep_mpsk_closed(p, M).value / quad - 1))
    abep_err, abep_bad = 0.0, []
    for (k, mu, m), d in itertools.product(DQPSK_PANEL, SNR_7):
        p = Params(k, mu, m, db(d))
        closed = aep.abep_dqpsk_closed(p, SeriesControl(60, 1e-14, require_convergence=False))
        quad = aep.aep_quadrature_oracle(p, DQPSK, Which.APPROX_EP, chi_row=closed.chi_row)
        err = abs(closed.value / quad - 1)
        abep_err = max(abep_err, err)
        if err > 1e-3:
            abep_bad.append(f"({k},{mu},{m}) {d} dB {err:.1e}")
    z_scores = []
    for (k, mu, m), scheme, d in [((1, 2, 1.3), ModulationSpec.parse("mpsk:4"), 10),
                                  ((5, 2.3, 4.7), DQPSK, 5),
                                  ((10, 2, 4), ModulationSpec.parse("mpsk:8"), 15),
                                  ((1, 3, 1.3), DQPSK, 10)]:
        p = Params(k, mu, m, db(d))
        mean, se = aep.aep_monte_carlo(p, scheme, mc=McControl(1_000_000, 7, 4))
        z_scores.append(abs(mean - aep.aep_quadrature_oracle(p, scheme)) / se)
    elapsed = time.perf_counter() - t0
    ok = asep_err <= 1e-8 and abep_err <= 1e-3 and max(z_scores) <= 3 and elapsed < 120
    record(7, "oracle triangle", ok,
           f"ASEP rel {asep_err:.1e}, ABEP(L=60) rel {abep_err:.1e}, MC max |z| {max(z_scores):.2f}, "
           f"{elapsed:.0f}s; ABEP over 1e-3: {'; '.join(abep_bad) or 'none'}")
    assert ok


def test_criterion_08_end_to_end():
    snrs = np.arange(0.0, 25.01, 2.5)
    mpsk_err = dqpsk_err = 0.0
    for mu, d in itertools.product((1, 2, 3), snrs):
        p = Params(1, mu, 1.3, db(d))
        for M in (2, 4, 8, 16):
            scheme = ModulationSpec.parse(f"mpsk:{M}")
            exact = aep.aep_quadrature_oracle(p, scheme)
            mpsk_err = max(mpsk_err, abs(aep.asep_mpsk_closed(p, M).value / exact - 1))
        exact = aep.aep_quadrature_oracle(p, DQPSK)
        dqpsk_err = max(dqpsk_err, abs(aep.abep_dqpsk_closed(p).value / exact - 1))
    ok = mpsk_err <= 0.02 and dqpsk_err <= 0.05
    record(8, "closed form vs exact EP", ok, f"M-PSK worst {mpsk_err:.2%}, DQPSK worst {dqpsk_err:.2%}")
    assert ok


def test_criterion_09_diversity():
    gb = db(60.0)
    out, worst = [], 0.0
    for mu in (1, 2, 3):
        p = Params(5, mu, 4.7, 1.0)
        for scheme in (ModulationSpec.parse("mpsk:4"), DQPSK):
            ratio = aep.diversity_order(p, scheme, [gb / 10, gb])[-1][1]
            slope = aep.diversity_order(p, scheme, [gb / 10, gb], method="local")[-1][1]
            worst = max(worst, abs(ratio - mu))
            out.append(f"{scheme} mu={mu}: ratio {ratio:.3f} slope {slope:.4f}")
    ok = worst <= 0.05
    record(9, "-log P / log gamma_bar -> mu at 60 dB", ok, f"worst |ratio-mu| {worst:.3f}; " + "; ".join(out))
    assert ok


def test_criterion_10_truncation_bound():
    full_ctrl = SeriesControl(60, 1e-14, require_convergence=False)
    covered, dec_L, dec_g = True, True, True
    for k in (1.0, 5.0):
        for d in (0, 5, 10, 15, 20):
            p = Params(k, 2.3, 4.7, db(d))
            full = aep.abep_dqpsk_closed(p, full_ctrl).value
            for L in (1, 2, 5, 10):
                part = aep.abep_dqpsk_closed(p, SeriesControl(L, 1e-300, False)).value
                covered &= aep.truncation_bound(p, L) >= abs(full - part)
            dec_L &= bool(np.all(np.diff([aep.truncation_bound(p, L) for L in range(1, 11)]) < 0))
        for L in (1, 2, 5, 10):
            b = [aep.truncation_bound(Params(k, 2.3, 4.7, db(d)), L) for d in (0, 5, 10, 15, 20)]
            dec_g &= bool(np.all(np.diff(b) < 0))
    ok = covered and dec_L and dec_g
    record(10, "truncation bound validity", ok, f"covers tail {covered}, decreasing in L {dec_L}, in gamma_bar {dec_g}")
    assert ok


def test_criterion_11_rayleigh_bpsk():
    worst = 0.0
    for gb in (1.0, 10.0, 100.0):
        ref = 0.5 * (1.0 - math.sqrt(gb / (1.0 + gb)))
        got = aep.aep_quadrature_oracle(Params(0, 1, 5e4, gb), ModulationSpec.parse("mpsk:2"))
        worst = max(worst, abs(got / ref - 1))
    ok = worst <= 1e-4
    record(11, "Rayleigh BPSK reduction", ok, f"worst rel {worst:.1e}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
