import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from fracfp.errors import DomainError
from fracfp.grids import Grid1D
from fracfp.kernels import Family, KernelSpec
from fracfp.spectral import EquilibriumInitial, GaussianInitial, IndicatorInitial, equilibrium_hat, exponent_cache
from fracfp.wildsum import (PositivityReport, TruncationWarning, WildConfig, poisson_tail, poisson_weights,
                            positivity_scan, truncation_deficit, wild_spectral, wild_terms_exact)

KER = KernelSpec(Family.STABLE, 0.75)
U0 = GaussianInitial(0.0, 1.0)


def exact_hat(cfg, rho):
    return U0.hat(math.exp(-cfg.t) * rho) * np.exp(exponent_cache(cfg.kernel).exponent(cfg.epsilon, cfg.t, rho))


def test_zeroth_term_only():
    cfg = WildConfig(KER, 0.5, 1.0, n_max=0, samples=64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = wild_spectral(cfg, U0, [0.0])
    assert res.value[0] == pytest.approx(math.exp(-1.0 / 0.5 ** 1.5), rel=1e-14)


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        wild_spectral(WildConfig(KER, 0.5, 1.0, n_max=2, samples=16), U0, [1.0])


def test_mass_at_zero():
    cfg = WildConfig(KER, 0.5, 1.0, samples=2000)
    res = wild_spectral(cfg, U0, [0.0])
    assert res.value[0] == pytest.approx(1.0 - res.deficit, abs=1e-12)


@pytest.mark.parametrize("eps,s", [(0.5, 0.75), (1.0, 0.6), (0.3, 0.9)])
def test_oracle_equivalence(eps, s):
    cfg = WildConfig(KER.with_s(s), eps, 1.0, samples=10_000, seed=11)
    rho = np.linspace(0.3, 6.0, 20)
    res = wild_spectral(cfg, U0, rho)
    z = np.abs(res.value - exact_hat(cfg, rho)) / res.stderr
    assert np.all(z <= 3.0)


def test_exact_terms_cross_check():
    cfg = WildConfig(KER, 0.5, 1.0, samples=10_000, seed=5)
    rho = np.linspace(0.3, 6.0, 20)
    res = wild_spectral(cfg, U0, rho)
    terms = wild_terms_exact(cfg, U0, rho)
    z = np.abs(res.terms[1:7] - terms[1:]) / res.term_stderr[1:7]
    assert np.all(z <= 4.0)
    np.testing.assert_allclose(res.terms[0], terms[0], rtol=1e-14)


def test_standard_error_scaling():
    rho = np.linspace(0.5, 6.0, 20)
    a = wild_spectral(WildConfig(KER, 0.5, 1.0, samples=2048, seed=1), U0, rho)
    b = wild_spectral(WildConfig(KER, 0.5, 1.0, samples=8192, seed=1), U0, rho)
    ratio = np.median(a.stderr / b.stderr)
    assert ratio == pytest.approx(2.0, rel=0.15)


def test_block_determinism():
    cfg = WildConfig(KER, 0.5, 1.0, samples=3000, seed=9)
    a = wild_spectral(cfg, U0, [1.0, 2.0])
    b = wild_spectral(cfg, U0, [1.0, 2.0])
    np.testing.assert_array_equal(a.value, b.value)


def test_poisson_weights_and_deficit():
    for lam in (0.5, 2.83, 40.0):
        cfg_order = math.ceil(lam + 6 * math.sqrt(lam) + 10)
        w = poisson_weights(lam, cfg_order)
        d = truncation_deficit(lam, cfg_order)
        assert w.sum() == pytest.approx(1 - d, abs=1e-14)
        assert d < 1e-4
    assert np.array_equal(poisson_weights(0.0, 3), [1.0, 0.0, 0.0, 0.0])


def _tail_rational(m: int) -> float:
    """``e^-m sum m^n/n!`` with the sum done exactly in rationals."""
    total = Fraction(0)
    term = Fraction(m) ** m / math.factorial(m)
    for n in range(m, 2 * m + 1):
        total += term
        term = term * m / (n + 1)
    return float(total) * math.exp(-m)


def test_poisson_tail_oracles():
    assert poisson_tail(1) == pytest.approx(1.5 / math.e, abs=1e-15)
    for m in range(1, 21):
        assert poisson_tail(m) == pytest.approx(_tail_rational(m), rel=1e-12)
    assert poisson_tail(10_000) == pytest.approx(0.5, abs=0.01)
    vals = np.array([poisson_tail(m) for m in range(1, 1001)])
    assert np.all((vals > 0) & (vals < 1)) and vals.min() >= 0.49
    with pytest.raises(DomainError):
        poisson_tail(0)


def test_positivity_examples(light_grid):
    rep = positivity_scan(KER, [0.05, 0.1, 0.5, 1.0], [0.6, 0.75, 0.9], 1.0, 1.0, 1.0, light_grid)
    assert rep.passed and np.all(rep.alpha > 0)
    i_small, i_one = 0, 3
    assert np.all(rep.alpha[i_small] / rep.alpha[i_one] < 1e3)
    eq = positivity_scan(KER, [0.5], [0.75], 1.0, 1.0, 1.0, light_grid, initial="equilibrium")
    F = equilibrium_hat(KER, 0.5, light_grid).to_density()
    assert eq.alpha[0, 0] == pytest.approx(F.values[np.abs(light_grid.x) <= 1.0].min(), abs=1e-8)
    assert eq.alpha[0, 0] > 0


def test_positivity_monotone_in_r2(light_grid):
    vals = [positivity_scan(KER, [0.1, 1.0], [0.75], 1.0, 1.0, r2, light_grid).alpha[:, 0]
            for r2 in (0.25, 0.5, 1.0, 2.0)]
    assert np.all(np.diff(np.array(vals), axis=0) >= -1e-12)


def test_report_properties():
    rep = PositivityReport((0.1, 1.0), (0.75,), np.array([[0.1], [0.3]]), 1.0, 1.0, 1.0)
    assert rep.ratio == pytest.approx(3.0) and rep.worst == (0.1, 0.75) and rep.passed
    with pytest.raises(DomainError):
        WildConfig(KER, 1.5, 1.0)
