import numpy as np
import pytest

from fracfp.errors import TailDivergenceError
from fracfp.fitting import fit_loglog
from fracfp.grids import japanese
from fracfp.kernels import Family, KernelSpec
from fracfp.lyapunov import (drift_term, dual_generator_apply, far_field_jump, fractional_laplacian_weight,
                             fractional_weight_decay, lyapunov_fit, near_field_jump, near_radius,
                             truncated_second_moment, weight_second_derivative)

KER = KernelSpec(Family.STABLE, 0.75)
X = np.linspace(-40, 40, 161)


def test_drift_term():
    x = np.array([0.0, 0.5, 3.0, -12.0])
    k = 0.5
    h = 1e-6
    deriv = ((1 + (x + h) ** 2) ** (k / 2) - (1 + (x - h) ** 2) ** (k / 2)) / (2 * h)
    np.testing.assert_allclose(drift_term(k, x), -x * deriv, rtol=1e-8)
    np.testing.assert_allclose(drift_term(k, x), -k * japanese(x) ** k + k * japanese(x) ** (k - 2), rtol=1e-14)
    assert drift_term(k, 0.0) == 0.0


def test_origin_and_far_field():
    at0 = dual_generator_apply(KER, 0.5, 0.5, [0.0])[0]
    assert at0 > 0
    v = dual_generator_apply(KER, 0.5, 0.5, [30.0])[0]
    assert v == pytest.approx(-0.5 * japanese(30.0) ** 0.5, rel=0.1)


@pytest.mark.parametrize("fam", [Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE])
def test_evenness(fam):
    ker = KernelSpec(fam, 0.75)
    x = np.array([0.7, 2.0, 9.0, 25.0])
    np.testing.assert_allclose(dual_generator_apply(ker, 0.5, 0.5, x), dual_generator_apply(ker, 0.5, 0.5, -x),
                               rtol=1e-12, atol=1e-14)


def test_near_radius_sensitivity():
    x = np.array([0.0, 3.0, 15.0])
    a = dual_generator_apply(KER, 0.5, 0.5, x, radius=10.0)
    b = dual_generator_apply(KER, 0.5, 0.5, x, radius=40.0)
    np.testing.assert_allclose(a, b, rtol=1e-2)
    assert near_radius(0.1) == 50.0 and near_radius(1.0) == 10.0


@pytest.mark.parametrize("fam", [Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE])
@pytest.mark.parametrize("s", [0.6, 0.9])
def test_near_field_scaling(fam, s):
    """Truncated near field behaves like eps^(2-2s) M2 phi''/2."""
    ker = KernelSpec(fam, s)
    eps = [0.4, 0.2, 0.1, 0.05]
    x = np.array([2.0])
    nf = [abs(near_field_jump(ker, e, 0.5, x, 1.0)[0]) for e in eps]
    assert fit_loglog(eps, nf).slope == pytest.approx(2 - 2 * s, abs=0.2)
    lead = 0.05 ** (2 - 2 * s) * truncated_second_moment(ker, 1.0) * abs(weight_second_derivative(0.5, 2.0)) / 2
    assert nf[-1] == pytest.approx(lead, rel=1e-2)


def test_fit_examples():
    fit = lyapunov_fit(KER.with_s(0.75), 1.0, 0.5, X)
    assert fit.lambda_l >= 0.2 and fit.passed and fit.holds
    edge = lyapunov_fit(KernelSpec(Family.STABLE, 0.6), 1.0, 0.99, X)
    assert edge.passed and edge.holds
    with pytest.raises(TailDivergenceError):
        dual_generator_apply(KernelSpec(Family.STABLE, 0.52), 1.0, 1.0, X)


def test_fit_uniformity_stable():
    lams = [lyapunov_fit(KernelSpec(Family.STABLE, s), e, 0.5, X).lambda_l
            for e in (0.1, 0.5, 1.0) for s in (0.6, 0.75, 0.9)]
    assert min(lams) > 0 and max(lams) / min(lams) < 2


def test_truncated_second_moment_finite():
    for fam in (Family.STABLE, Family.SCREENED_POISSON, Family.MIXTURE):
        m2 = truncated_second_moment(KernelSpec(fam, 0.75), 1.0)
        assert 0 < m2 < 1


def test_fractional_weight():
    xs = np.linspace(1, 50, 50)
    for s in (0.6, 0.75, 0.9):
        assert fractional_weight_decay(s, 0.5, xs) < 1.0
        assert fractional_laplacian_weight(s, 0.5, [0.0])[0] > 0
    # s -> 1: the fractional Laplacian approaches the classical second derivative
    x = np.array([0.0, 3.0])
    np.testing.assert_allclose(fractional_laplacian_weight(0.99, 0.5, x), weight_second_derivative(0.5, x),
                               rtol=0.05)


def test_far_field_zero_without_tail():
    one = KER.short_range()
    assert np.all(far_field_jump(one, 0.5, np.array([1.0, 5.0]), 2.0) == 0.0)
