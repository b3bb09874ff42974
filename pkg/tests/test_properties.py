"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfp.config import RunConfig
from fracfp.errors import ConfigurationError
from fracfp.gclt import ScaleSequence, rescaled_convolution_hat
from fracfp.grids import (DensityProfile, Grid1D, SpectralProfile, interpolation_constant,
                          interpolation_inequality_check, weighted_l1_norm)
from fracfp.kernels import Family, KernelSpec, fourier_symbol, mixture_coefficients, remainder
from fracfp.spectral import exponent_cache
from fracfp.stable_laws import StableParams, sigma_schedule, stable_density
from fracfp.wildsum import poisson_tail

GRID = Grid1D(2048, 40.0)
WIDE = Grid1D(2 ** 14, 200.0)
S = st.floats(0.51, 0.99)
FAM = st.sampled_from([Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE])
FAST = settings(max_examples=40, deadline=None)


def gaussian_mixture(weights, means, variances):
    x = GRID.x
    vals = sum(w * np.exp(-(x - m) ** 2 / (2 * v)) / math.sqrt(2 * math.pi * v)
               for w, m, v in zip(weights, means, variances))
    return DensityProfile(GRID, vals)


mixtures = st.tuples(st.lists(st.floats(0.1, 1.0), min_size=3, max_size=3),
                     st.lists(st.floats(-5, 5), min_size=3, max_size=3),
                     st.lists(st.floats(0.2, 3.0), min_size=3, max_size=3))


@FAST
@given(FAM, S, st.lists(st.floats(0, 50), min_size=1, max_size=20))
def test_symbol_bounds(fam, s, rho):
    ker = KernelSpec(fam, s)
    j = fourier_symbol(ker, np.array(rho))
    assert fourier_symbol(ker, 0.0) == 1.0
    assert np.all(np.abs(j) <= 1.0)
    r = np.array(rho)
    assert np.all(np.abs(remainder(ker, r) + 1 - r ** (2 * s) - j) <= 4e-16 * (1 + r ** (2 * s)))


@FAST
@given(st.floats(0.5001, 0.9999))
def test_mixture_coefficients(s):
    mc = mixture_coefficients(s)
    assert 0 < mc.a < 1 and mc.gamma > 0


@FAST
@given(mixtures, mixtures, st.floats(0, 1))
def test_weighted_norm_triangle_and_monotone(a, b, k):
    f, g = gaussian_mixture(*a), gaussian_mixture(*b)
    assert weighted_l1_norm(f + g, k) <= weighted_l1_norm(f, k) + weighted_l1_norm(g, k) * (1 + 1e-14)
    assert weighted_l1_norm(f, k) <= weighted_l1_norm(f, min(1.0, k + 0.3)) * (1 + 1e-14)


@FAST
@given(mixtures)
def test_round_trip_and_parseval(a):
    f = gaussian_mixture(*a)
    spec = f.to_spectral()
    assert np.max(np.abs(spec.to_density().values - f.values)) < 1e-10
    l2x = np.sum(f.values ** 2) * GRID.dx
    l2k = np.sum(np.abs(spec.values) ** 2) * GRID.dxi / (2 * math.pi)
    assert abs(l2x - l2k) <= 1e-8 * l2x


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0.55, 1.0), st.floats(0.1, 1.0), st.floats(0.5, 3.0)), min_size=1, max_size=3),
       st.sampled_from([(0.1, 0.5), (0.3, 0.9), (0.25, 0.75)]))
def test_interpolation_bound_stable_mixtures(comps, km):
    k, m = km
    total = None
    for s, w, gamma in comps:
        d = stable_density(StableParams(s, gamma), WIDE).scaled(w)
        total = d if total is None else total + d
    assert interpolation_inequality_check(total, k, m) <= interpolation_constant(k, m)


@FAST
@given(S, st.floats(0, 20), st.floats(0, 20))
def test_sigma_semigroup(s, t, h):
    lhs = sigma_schedule(s, t + h)
    rhs = sigma_schedule(s, t) * math.exp(-2 * s * h) + sigma_schedule(s, h)
    assert abs(lhs - rhs) <= 1e-14


@FAST
@given(FAM, S, st.floats(0.05, 1.0), st.floats(0, 4), st.floats(0, 4),
       st.lists(st.floats(0, 40), min_size=1, max_size=10))
def test_exponent_semigroup_and_mass(fam, s, eps, t1, t2, rho):
    cache = exponent_cache(KernelSpec(fam, round(s, 2)))
    r = np.array(rho)
    lhs = cache.exponent(eps, t1 + t2, r)
    rhs = cache.exponent(eps, t2, r) + cache.exponent(eps, t1, math.exp(-t2) * r)
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * np.maximum(1, np.abs(lhs)))
    assert cache.exponent(eps, t1, np.zeros(1))[0] == 0.0
    assert np.all(lhs <= 1e-12)


@FAST
@given(st.integers(1, 5000))
def test_poisson_tail_range(m):
    assert 0 < poisson_tail(m) < 1


@FAST
@given(FAM, S, st.integers(1, 2000), st.sampled_from(["constant", "uniform", "alternating"]), st.integers(0, 99))
def test_rescaled_convolution_mass(fam, s, n, pol, seed):
    seq = ScaleSequence.make(pol, n, s, 0.5, 2.0, seed)
    ker = KernelSpec(fam, s)
    assert rescaled_convolution_hat(ker, seq, 0.0) == 1.0
    assert np.all(np.abs(rescaled_convolution_hat(ker, seq, np.linspace(0, 10, 50))) <= 1.0)


@FAST
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_config_weight_invariant(k, m, big_m):
    doc = {"weights": {"k": k, "m": m, "M": big_m}}
    if 0 < k < m <= big_m <= 1:
        assert RunConfig.build("evolve", doc).weights == (k, m, big_m)
    else:
        try:
            RunConfig.build("evolve", doc)
        except ConfigurationError:
            return
        raise AssertionError("invalid weights accepted")
