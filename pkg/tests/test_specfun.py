import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special

from gfscma.core.specfun import (hyp1f1, hyp1f2, hyp2f1, ln_gamma, lower_incomplete_gamma,
                                 pochhammer)
from gfscma.utils.errors import BranchCutError, ConvergenceError, DomainError


def test_ln_gamma_matches_scipy():
    xs = np.linspace(0.1, 50.0, 200)
    assert_allclose([ln_gamma(x) for x in xs], special.gammaln(xs), rtol=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
def test_ln_gamma_rejects_outside_domain(x):
    with pytest.raises(DomainError):
        ln_gamma(x)


def test_lower_incomplete_gamma_shape_two():
    for x in (0.1, 1.0, 5.0, 30.0):
        assert_allclose(lower_incomplete_gamma(2.0, x), 1.0 - (1.0 + x) * math.exp(-x), rtol=1e-12)


def test_lower_incomplete_gamma_limits():
    assert lower_incomplete_gamma(2.5, 0.0) == 0.0
    assert_allclose(lower_incomplete_gamma(2.5, math.inf), math.gamma(2.5), rtol=1e-14)
    with pytest.raises(DomainError):
        lower_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        lower_incomplete_gamma(1.0, -0.5)


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert_allclose(pochhammer(0.5, 3), 0.5 * 1.5 * 2.5)
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


def test_hyp1f1_matches_scipy_on_random_points():
    rng = np.random.default_rng(7)
    a = rng.uniform(-2.0, 2.0, 300)
    b = rng.uniform(0.5, 3.0, 300)
    z = rng.uniform(-5.0, 5.0, 300)
    ours = [hyp1f1(ai, bi, zi).real for ai, bi, zi in zip(a, b, z)]
    assert_allclose(ours, special.hyp1f1(a, b, z), rtol=1e-9, atol=1e-12)


def test_hyp1f1_terminating_polynomial_is_exact():
    x = 3.7
    expected = 1.0 - 4.0 / 3.0 * x + 4.0 / 15.0 * x * x
    assert_allclose(hyp1f1(-2, 1.5, x).real, expected, rtol=1e-15)


def test_hyp1f1_kummer_identity_complex_argument():
    a, b, z = 0.3, 1.7, -2.5 + 1.0j
    lhs = hyp1f1(a, b, z)
    rhs = cmath.exp(z) * hyp1f1(b - a, b, -z)
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_hyp1f1_large_negative_argument_with_budget():
    # the range reached by the pairwise-error integrand
    # 1F1(-1/2; 1/2; -x) = e^-x + sqrt(pi x) erf(sqrt(x))
    x = 200.0
    value = hyp1f1(-0.5, 0.5, -x, max_terms=4000).real
    assert_allclose(value, math.exp(-x) + math.sqrt(math.pi * x) * math.erf(math.sqrt(x)), rtol=1e-8)


def test_hyp1f1_domain_and_convergence_errors():
    with pytest.raises(DomainError):
        hyp1f1(0.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        hyp1f1(0.5, -2.0, 1.0)
    with pytest.raises(ConvergenceError):
        hyp1f1(0.5, 1.5, 50.0, max_terms=10)


@pytest.mark.parametrize("eta", [3.0, 4.0, 5.0])
@pytest.mark.parametrize("d_s", [1, 2, 4])
def test_hyp2f1_real_axis_matches_scipy(eta, d_s):
    delta = 2.0 / eta
    zs = np.concatenate([np.linspace(-20.0, -1.6, 15), np.linspace(-1.5, 0.8, 25)])
    ours = [hyp2f1(-delta, d_s, 1.0 - delta, z).real for z in zs]
    assert_allclose(ours, special.hyp2f1(-delta, d_s, 1.0 - delta, zs), rtol=1e-9)


def test_hyp2f1_transformations_agree_on_imaginary_axis():
    a, b, c = -0.5, 2.0, 0.5
    for y in (0.5, 0.8):
        direct = hyp2f1(a, b, c, 1j * y, method="direct")
        pfaff = hyp2f1(a, b, c, 1j * y, method="pfaff")
        assert abs(direct - pfaff) <= 1e-10 * abs(direct)
    for y in (1.6, 3.0):
        pfaff = hyp2f1(a, b, c, 1j * y, method="pfaff", max_terms=5000)
        inverse = hyp2f1(a, b, c, 1j * y, method="inverse")
        assert abs(pfaff - inverse) <= 1e-9 * abs(inverse)


def test_hyp2f1_large_imaginary_argument_is_finite():
    value = hyp2f1(-0.5, 2.0, 0.5, 1e6j)
    assert math.isfinite(value.real) and math.isfinite(value.imag)


def test_hyp2f1_errors():
    with pytest.raises(BranchCutError):
        hyp2f1(0.5, 1.0, 1.5, 1.5)
    with pytest.raises(DomainError):
        hyp2f1(0.5, 1.0, 0.0, 0.3)
    with pytest.raises(DomainError):
        hyp2f1(0.5, 1.0, 1.5, 0.3, method="euler")
    with pytest.raises(DomainError):
        hyp2f1(1.0, 2.0, 3.5, -3.0, method="inverse")


def test_branch_cut_error_is_a_domain_error():
    assert issubclass(BranchCutError, DomainError)


def test_hyp1f2_reduces_to_0f1():
    for z in (-3.0, 0.5, 2.0):
        assert_allclose(hyp1f2(0.7, 0.7, 1.5, z), special.hyp0f1(1.5, z), rtol=1e-12)


def test_ln_gamma_literal_example():
    # Gamma(x) = Gamma(x + n) / prod_{k<n} (x + k)
    x, n = 4.075, 30
    expected = math.lgamma(x + n) - math.fsum(math.log(x + k) for k in range(n))
    assert_allclose(ln_gamma(x), expected, rtol=1e-13)


def test_lower_incomplete_gamma_literal_example():
    expected, _ = integrate.quad(lambda t: t * math.exp(-t), 0.0, 3.0, epsabs=1e-14, epsrel=1e-14)
    assert_allclose(lower_incomplete_gamma(2.0, 3.0), expected, rtol=1e-12)
    assert_allclose(lower_incomplete_gamma(2.0, 3.0), 1.0 - 4.0 * math.exp(-3.0), rtol=1e-13)


def test_hyp1f2_literal_example():
    a, b1, b2, z = -0.5, 0.5, 0.5, -2.0
    expected = math.fsum(special.poch(a, n) / (special.poch(b1, n) * special.poch(b2, n))
                         * z ** n / math.factorial(n) for n in range(60))
    assert_allclose(hyp1f2(a, b1, b2, z), expected, rtol=1e-12)


@pytest.mark.parametrize("x", [0.05, 0.1, 0.25])
def test_gaussian_average_of_1f2_collapses_to_1f1(x):
    # E[g^2q] = (2q-1)!! = 2^q (1/2)_q cancels the 1/2 denominator parameter
    delta = 0.5
    nodes, weights = np.polynomial.hermite.hermgauss(40)
    values = [hyp1f2(-delta, 0.5, 1.0 - delta, -x * 2.0 * t * t) for t in nodes]
    average = float(np.dot(weights, values)) / math.sqrt(math.pi)
    assert_allclose(average, hyp1f1(-delta, 1.0 - delta, -2.0 * x).real, rtol=1e-8)


def test_hyp2f1_literal_example():
    value = hyp2f1(-0.5, 2.0, 0.5, 10j)
    pfaff = hyp2f1(-0.5, 2.0, 0.5, 10j, method="pfaff", max_terms=30_000)
    assert abs(value - pfaff) <= 1e-9 * abs(value)


@pytest.mark.parametrize("z", [25j, 40j, 100j, 200j, -150 + 120j, 60 + 150j, 12 - 20j])
def test_hyp1f1_erf_identity_off_the_real_axis(z):
    # 1F1(1/2; 3/2; -u^2) = sqrt(pi) erf(u) / (2 u)
    u = cmath.sqrt(-z)
    expected = math.sqrt(math.pi) * special.erf(u) / (2 * u)
    assert abs(hyp1f1(0.5, 1.5, z) - expected) <= 1e-9 * abs(expected)


@pytest.mark.parametrize("z", [100j, 200 * cmath.exp(2j), 35 - 50j])
def test_hyp1f1_exponential_identity_off_the_real_axis(z):
    # 1F1(1; 2; z) = (e^z - 1) / z
    expected = (cmath.exp(z) - 1) / z
    assert abs(hyp1f1(1.0, 2.0, z) - expected) <= 1e-9 * abs(expected)


@pytest.mark.parametrize("z", [40j, 100j, 30 - 70j, -35 + 80j])
def test_hyp1f1_large_argument_matches_exact_series(z):
    exact = hyp1f1(0.3, 1.7, z, method="exact")
    assert abs(hyp1f1(0.3, 1.7, z) - exact) <= 1e-9 * abs(exact)
    assert abs(hyp1f1(0.3, 1.7, z, method="asymptotic") - exact) <= 1e-9 * abs(exact)


def test_hyp1f1_refuses_a_cancelled_float_series():
    with pytest.raises(ConvergenceError):
        hyp1f1(0.3, 1.7, 40j, method="series")
    with pytest.raises(ConvergenceError):
        hyp1f1(0.3, 1.7, 5j, method="asymptotic")
    with pytest.raises(DomainError):
        hyp1f1(0.3, 1.7, 1.0, method="mellin")


def test_hyp1f1_matches_exact_series_on_random_points():
    rng = np.random.default_rng(11)
    n = 1000
    a = rng.uniform(-2.0, 2.0, n)
    b = rng.uniform(0.5, 3.0, n)
    z = rng.uniform(-5.0, 5.0, n) + 1j * rng.uniform(-5.0, 5.0, n)
    for ai, bi, zi in zip(a, b, z):
        exact = hyp1f1(ai, bi, zi, method="exact")
        assert abs(hyp1f1(ai, bi, zi) - exact) <= 1e-9 * abs(exact) + 1e-12


def test_kummer_identity_on_random_points():
    rng = np.random.default_rng(12)
    n = 1000
    a = rng.uniform(-2.0, 2.0, n)
    b = rng.uniform(0.5, 3.0, n)
    z = rng.uniform(-5.0, 5.0, n) + 1j * rng.uniform(-5.0, 5.0, n)
    for ai, bi, zi in zip(a, b, z):
        lhs = hyp1f1(ai, bi, zi)
        rhs = cmath.exp(zi) * hyp1f1(bi - ai, bi, -zi, method="exact")
        assert abs(lhs - rhs) <= 1e-8 * abs(lhs) + 1e-12


def test_pfaff_identity_on_random_points():
    rng = np.random.default_rng(13)
    n = 1000
    a = rng.uniform(-2.0, 2.0, n)
    b = rng.uniform(-2.0, 2.0, n)
    c = rng.uniform(0.5, 3.0, n)
    z = 0.4 * np.sqrt(rng.uniform(0.0, 1.0, n)) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
    for ai, bi, ci, zi in zip(a, b, c, z):
        direct = hyp2f1(ai, bi, ci, zi, method="direct")
        pfaff = hyp2f1(ai, bi, ci, zi, method="pfaff")
        assert abs(direct - pfaff) <= 1e-9 * abs(direct) + 1e-12
