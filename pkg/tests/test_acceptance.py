"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from fracfp.config import RunConfig
from fracfp.experiments import (run_decay_rate, run_eps_limit, run_gclt, run_lyapunov, run_positivity,
                                run_regularity, run_s_limit, run_verify_kernel, run_wild_verify)
from fracfp.grids import Grid1D
from fracfp.kernels import Family, KernelSpec, density_at, fourier_symbol
from fracfp.spectral import (EquilibriumInitial, EvolutionSetup, GaussianInitial, equilibrium_hat, evolve,
                             exponent_cache)
from fracfp.stable_laws import StableParams, convolution_identity_check, stable_density


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, text: str):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}: {text}")
        assert ok, text
    return emit


def test_criterion_01_kernel_hypotheses(report):
    res = run_verify_kernel(RunConfig.build("verify-kernel"))
    rows = [r for r in res.results if "family" in r]
    j0 = all(r["symbol_at_0"] == 1.0 for r in rows)
    rem = all(r["remainder_sup_ratio"] <= r["c0"] for r in rows)
    mix = [r for r in rows if r["family"] == "student_gauss_mixture"]
    coef = all(0 < r["mixture_a"] < 1 and r["mixture_gamma"] > 0 for r in mix)
    ratio = next(r["value"] for r in res.results if r.get("check") == "mixture_weight_ratio_s0.95")
    ok = len(rows) == 9 and j0 and rem and coef and 0.8 <= ratio <= 1.2
    worst = max(r["remainder_sup_ratio"] / r["c0"] for r in rows)
    report(1, ok, f"J(0)=1 {j0}; max sup|R|/rho^(2s+delta)/C0 = {worst:.3f}; a(0.95)/(2(1-s)) = {ratio:.4f}")


def test_criterion_02_stable_oracles(report):
    grid = Grid1D(4096, 50.0)
    g1 = stable_density(StableParams(1.0), grid).at([0.0])[0]
    g_half = density_at(KernelSpec.limit_member(Family.STABLE, 0.5), 0.0)[0]
    sp1 = density_at(KernelSpec.limit_member(Family.SCREENED_POISSON, 1.0), 0.0)[0]
    conv = max(convolution_identity_check(s, a, b, grid) for s, a, b in [(0.75, 0.5, 0.5), (1.0, 1.0, 1.0),
                                                                         (0.6, 0.3, 1.2)])
    e1, e2, e3 = abs(g1 - (4 * math.pi) ** -0.5), abs(g_half - 1 / math.pi), abs(sp1 - 0.5)
    ok = e1 < 1e-6 and e2 < 1e-6 and e3 < 1e-6 and conv < 1e-10
    report(2, ok, f"|G1(0)-(4pi)^-1/2|={e1:.1e}, |G1/2(0)-1/pi|={e2:.1e}, |J1_SP(0)-1/2|={e3:.1e}, "
                  f"convolution error={conv:.1e}")


def test_criterion_03_solution_machinery(report):
    grid = Grid1D(4096, 50.0)
    mass_ok, drift, semi = True, 0.0, 0.0
    for fam in (Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE):
        ker = KernelSpec(fam, 0.75)
        for eps in (0.1, 0.5, 1.0):
            setup = EvolutionSetup(ker, eps, GaussianInitial(1.0, 0.5), grid)
            mass_ok &= all(evolve(setup, t).values[0] == 1.0 for t in (0.0, 0.5, 2.0, 5.0))
            F = equilibrium_hat(ker, eps, grid)
            stat = EvolutionSetup(ker, eps, EquilibriumInitial(ker, eps), grid)
            drift = max(drift, max(np.max(np.abs(evolve(stat, t).values - F.values)) for t in np.linspace(0, 5, 11)))
            cache = exponent_cache(ker)
            rho = np.abs(grid.xi)
            for t1, t2 in [(0.5, 1.0), (2.0, 3.0)]:
                lhs = cache.exponent(eps, t1 + t2, rho)
                rhs = cache.exponent(eps, t2, rho) + cache.exponent(eps, t1, math.exp(-t2) * rho)
                semi = max(semi, float(np.max(np.abs(lhs - rhs))))
    t0 = time.perf_counter()
    wild = run_wild_verify(RunConfig.build("wild-verify"))
    elapsed = time.perf_counter() - t0
    rec = wild.results[0]
    ok = mass_ok and drift < 1e-8 and semi < 1e-9 and rec["max_z"] <= 3 and elapsed < 120
    report(3, ok, f"u^(t,0)=1 {mass_ok}; stationarity drift={drift:.1e}; semigroup={semi:.1e}; "
                  f"Wild max z={rec['max_z']:.2f} over 20 probes (M={rec['samples']}, {elapsed:.1f}s)")


def test_criterion_04_gclt(report):
    res = run_gclt(RunConfig.build("gclt"))
    control = res.results[0]
    by_s = {r["s"]: r for r in res.results if r.get("kernel", "").startswith("screened")}
    r75 = by_s[0.75]
    fit_ok = abs(r75["slope"] - r75["target"]) <= 0.25
    spread = abs(by_s[0.9]["slope"] - by_s[0.99]["slope"])
    ok = control["max_distance"] < 1e-10 and fit_ok and spread < 0.15
    report(4, ok, f"stable input max distance={control['max_distance']:.1e}; SP s=0.75 slope={r75['slope']:.3f} "
                  f"(target {r75['target']:.3f}); |slope(0.9)-slope(0.99)|={spread:.4f}")


def test_criterion_05_spectral_gap(report):
    cfg = RunConfig.build("decay-rate")
    assert cfg.epsilons == [0.1, 0.5, 1.0] and cfg.s_values == [0.6, 0.75, 0.9] and cfg.weights[0] == 0.5
    res = run_decay_rate(cfg)
    rates = [r["lambda_hat"] for r in res.results if "lambda_hat" in r]
    ratio = max(rates) / min(rates)
    ok = len(rates) == 9 and min(rates) >= 0.3 and ratio < 3
    report(5, ok, f"lambda_hat in [{min(rates):.3f}, {max(rates):.3f}], max/min={ratio:.3f}")


def test_criterion_06_eps_limit(report):
    cfg = RunConfig.build("eps-limit")
    assert cfg.epsilons == [0.2, 0.1, 0.05, 0.025] and cfg.weights[:2] == (0.25, 0.75)
    rec = run_eps_limit(cfg).results[0]
    ok = rec["theta"] == pytest.approx(0.4) and rec["slope"] >= 0.4 - 0.1
    report(6, ok, f"slope={rec['slope']:.3f} >= theta*delta - 0.1 = {0.4 * rec['delta'] - 0.1:.2f}")


def test_criterion_07_s_limit(report):
    cfg = RunConfig.build("s-limit")
    assert cfg.epsilons == [0.3] and cfg.s_values == [0.85, 0.9, 0.95, 0.975]
    rec = run_s_limit(cfg).results[0]
    ok = rec["slope"] >= rec["theta"] - 0.15
    report(7, ok, f"slope={rec['slope']:.3f} >= theta - 0.15 = {rec['theta'] - 0.15:.2f}")


def test_criterion_08_regularity(report):
    rec = run_regularity(RunConfig.build("regularity")).results[0]
    slope_ok = abs(rec["slope"] + 1.0) <= 0.05
    ok = (slope_ok and rec["m_below"] == pytest.approx(0.4) and not rec["divergent_below"]
          and rec["m_above"] == pytest.approx(0.6) and rec["divergent_above"])
    report(8, ok, f"Fourier-tail slope={rec['slope']:.4f}; band ratio m=0.4: {rec['band_ratio_below']:.3f} (finite), "
                  f"m=0.6: {rec['band_ratio_above']:.3f} (divergent)")


def test_criterion_09_positivity(report):
    res = run_positivity(RunConfig.build("positivity"))
    summ = next(r for r in res.results if r.get("summary") == "positivity")
    cells = [r for r in res.results if "alpha" in r]
    ok = len(cells) == 12 and all(r["alpha"] > 0 for r in cells) and summ["ratio"] < 1e3
    report(9, ok, f"min alpha={summ['alpha_min']:.4f} at (eps, s)={tuple(summ['worst'])}, max/min={summ['ratio']:.3f}")


def test_criterion_10_lyapunov(report):
    res = run_lyapunov(RunConfig.build("lyapunov"))
    summ = next(r for r in res.results if r.get("summary") == "uniformity")
    cells = [r for r in res.results if "lambda_L" in r]
    tail = run_positivity(RunConfig.build("positivity")).results[-1]
    ok = (len(cells) == 9 and summ["lambda_min"] >= 0.1 and summ["ratio"] < 2
          and tail["min_m_le_1000"] >= 0.49 and abs(tail["value_m1"] - 0.551819) <= 1e-6)
    report(10, ok, f"lambda_L in [{summ['lambda_min']:.3f}, {summ['lambda_max']:.3f}], max/min={summ['ratio']:.3f}; "
                   f"min poisson_tail={tail['min_m_le_1000']:.4f}, poisson_tail(1)={tail['value_m1']:.7f}")
