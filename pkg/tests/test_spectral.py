import math

import numpy as np
import pytest

from fracfp.errors import DomainError
from fracfp.fitting import fit_loglog
from fracfp.grids import Grid1D, tail_integral, weighted_l1_norm
from fracfp.kernels import Family, KernelSpec
from fracfp.spectral import (EquilibriumInitial, EvolutionSetup, GaussianInitial, IndicatorInitial, StableInitial,
                             consistency_multiplier_eps, consistency_multiplier_s, equilibrium_hat,
                             equilibrium_tail, evolve, exponent_cache, exponent_integral, ffp_equilibrium,
                             ffp_reference, matern_cell_mean, matern_density)
from fracfp.stable_laws import sigma_schedule

FAMILIES = [Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE]
STABLE = KernelSpec(Family.STABLE, 0.75)


def test_exponent_examples():
    assert exponent_integral(STABLE, 0.5, 0.0, 1.3) == 0.0
    rho = np.array([0.5, 1.0, 2.0])
    limit = -sigma_schedule(0.75, 1.0) * rho ** 1.5
    np.testing.assert_allclose(exponent_integral(STABLE, 1e-3, 1.0, rho), limit, rtol=1e-3)
    eq = exponent_cache(STABLE).exponent(0.5, math.inf, rho)
    np.testing.assert_allclose(exponent_integral(STABLE, 0.5, 50.0, rho), eq, atol=1e-10)


@pytest.mark.parametrize("fam", FAMILIES)
def test_exponent_two_routes_agree(fam):
    """Adaptive quadrature and the tabulated antiderivative are independent routes."""
    ker = KernelSpec(fam, 0.75)
    rho = np.array([0.01, 0.3, 1.0, 4.0, 20.0])
    for eps, t in [(1.0, 0.5), (0.5, 2.0), (0.1, 1.0)]:
        a = exponent_integral(ker, eps, t, rho)
        b = exponent_cache(ker).exponent(eps, t, rho)
        np.testing.assert_allclose(a, b, atol=1e-11, rtol=1e-12)


def test_semigroup_exponent_identity():
    cache = exponent_cache(STABLE)
    rho = np.linspace(0, 30, 301)
    for eps in (0.1, 0.5, 1.0):
        for t1, t2 in [(0.3, 0.7), (1.0, 2.5), (2.0, 3.0)]:
            lhs = cache.exponent(eps, t1 + t2, rho)
            rhs = cache.exponent(eps, t2, rho) + cache.exponent(eps, t1, math.exp(-t2) * rho)
            assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("fam", FAMILIES)
@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_mass_conservation_and_positivity(fam, eps, light_grid):
    ker = KernelSpec(fam, 0.75)
    setup = EvolutionSetup(ker, eps, GaussianInitial(1.0, 0.5), light_grid)
    for t in (0.0, 0.5, 2.0):
        prof = evolve(setup, t)
        assert prof.values[0] == 1.0
        dens = prof.to_density()
        assert dens.values.min() >= -1e-6
        total = dens.mass() + (0.0 if dens.tail is None else tail_integral(dens.tail, light_grid.half_width, 0.0))
        assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("fam", FAMILIES)
def test_stationarity(fam, light_grid):
    ker = KernelSpec(fam, 0.75)
    eq = EquilibriumInitial(ker, 0.5)
    F = equilibrium_hat(ker, 0.5, light_grid)
    setup = EvolutionSetup(ker, 0.5, eq, light_grid)
    for t in np.linspace(0, 5, 11):
        assert np.max(np.abs(evolve(setup, t).values - F.values)) < 1e-8


def test_small_eps_matches_fractional_flow(light_grid):
    u0 = GaussianInitial(1.0, 0.5)
    u = evolve(EvolutionSetup(STABLE, 1e-3, u0, light_grid), 1.0)
    v = ffp_reference(u0, 0.75, 1.0, light_grid)
    assert np.max(np.abs(u.values - v.values)) < 1e-2


def test_equilibrium_examples(light_grid):
    F = equilibrium_hat(STABLE, 0.05, light_grid)
    assert F.values[0] == 1.0
    xi = light_grid.xi
    win = (np.abs(xi) <= 0.1) & (xi != 0)
    target = np.exp(-np.abs(xi[win]) ** 1.5 / 1.5)
    assert np.max(np.abs(F.values[win].real / target - 1)) < 1e-2


@pytest.mark.parametrize("eps", [0.7, 1.0])
def test_equilibrium_fourier_tail_slope(eps, light_grid):
    F = equilibrium_hat(STABLE, eps, light_grid)
    xi = light_grid.xi
    top = (xi >= 0.1 * light_grid.nyquist)
    fit = fit_loglog(xi[top], np.abs(F.values[top]))
    p = eps ** -1.5
    assert fit.slope == pytest.approx(-p, rel=0.05)
    tail = equilibrium_tail(STABLE, eps)
    assert tail.power == pytest.approx(p)
    assert np.abs(F.values[top][-1]) == pytest.approx(tail.amplitude * xi[top][-1] ** -p, rel=1e-3)


def test_equilibrium_tail_log_amplitude_small_eps():
    tail = equilibrium_tail(STABLE, 0.01)
    assert math.isfinite(tail.log_amplitude) and tail.power == pytest.approx(1000.0)


def test_ffp_reference_examples(light_grid):
    u0 = GaussianInitial(0.7, 0.4)
    xi = light_grid.xi
    np.testing.assert_allclose(ffp_reference(u0, 0.75, 0.0, light_grid).values, u0.hat(xi), atol=1e-15)
    late = ffp_reference(u0, 0.75, 60.0, light_grid).values
    np.testing.assert_allclose(late, np.exp(-np.abs(xi) ** 1.5 / 1.5), atol=1e-14)
    np.testing.assert_allclose(ffp_equilibrium(0.75, light_grid).values, np.exp(-np.abs(xi) ** 1.5 / 1.5))
    # s = 1: Ornstein-Uhlenbeck with mean m e^-t and variance v e^-2t + 1 - e^-2t
    t = 0.8
    ou = np.exp(-1j * 0.7 * math.exp(-t) * xi - 0.5 * (0.4 * math.exp(-2 * t) + 1 - math.exp(-2 * t)) * xi ** 2)
    np.testing.assert_allclose(ffp_reference(u0, 1.0, t, light_grid).values, ou, atol=1e-14)


def test_consistency_multiplier_eps():
    assert consistency_multiplier_eps(STABLE, 0.3, 0.0) == 0.0
    sups = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        rho = np.linspace(1e-4, 1 / eps, 20000)
        ratio = np.abs(consistency_multiplier_eps(STABLE, eps, rho)) / rho ** 2.5
        assert np.max(ratio / eps) <= 0.5
        sups.append(np.max(ratio))
    assert sups[1] / sups[0] == pytest.approx(0.5, rel=0.1)
    fit = fit_loglog([0.2, 0.1, 0.05, 0.025], sups)
    assert fit.slope == pytest.approx(1.0, rel=0.15)


def test_consistency_multiplier_s():
    one = STABLE.short_range()
    rho = np.linspace(0, 10, 1001)
    assert np.all(consistency_multiplier_s(one, 0.3, rho) == 0.0)
    assert consistency_multiplier_s(STABLE, 0.3, 0.0) == 0.0
    cs = []
    for s in (0.9, 0.95, 0.99):
        r = rho[1:]
        m = consistency_multiplier_s(KernelSpec(Family.STABLE, s), 0.1, r)
        bound = (1 - s) * r ** (2 * s) * np.maximum(1, np.abs(np.log(r))) * (1 + r ** (2 * (1 - s)))
        cs.append(np.max(np.abs(m) / bound))
    assert max(cs) < 1.5 and max(cs) / min(cs) < 1.1


def test_initial_data_validation(light_grid):
    with pytest.raises(DomainError):
        EvolutionSetup(STABLE, 1.5, GaussianInitial(), light_grid)
    with pytest.raises(DomainError):
        evolve(EvolutionSetup(STABLE, 0.5, GaussianInitial(), light_grid), -1.0)


def test_indicator_and_stable_initial(light_grid, heavy_grid):
    ind = evolve(EvolutionSetup(STABLE, 0.5, IndicatorInitial(1.0), light_grid), 1.0).to_density()
    assert ind.values.min() >= -1e-6
    st = evolve(EvolutionSetup(STABLE, 0.5, StableInitial(0.75, 1.0, 2.0), heavy_grid), 1.0).to_density()
    assert weighted_l1_norm(st, 0.0) == pytest.approx(1.0, abs=1e-6)


def test_matern_density():
    x = np.array([0.3, 1.0, 2.5])
    np.testing.assert_allclose(matern_density(2.0, x), 0.5 * np.exp(-x), rtol=1e-12)
    g = Grid1D(4096, 60.0)
    # singular at the origin for p <= 1; cell means keep the mass
    for p in (0.5, 0.9, 1.0, 2.5):
        assert np.sum(matern_cell_mean(p, g.x, g.dx)) * g.dx == pytest.approx(1.0, abs=1e-10)
