import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from gfscma.core import analytic, netmodel
from gfscma.core.analytic import CharacteristicFunction
from gfscma.core.scma import builtin_codebook
from gfscma.data.models import InterfererThinning, NetworkParams
from gfscma.data.validators import db_to_linear, dbm_to_watts
from gfscma.utils.errors import DomainError, PremiseError


# --- Gil-Pelaez inversion -------------------------------------------------

@pytest.mark.parametrize("shape", [1, 2, 4])
def test_gil_pelaez_reproduces_gamma_cdf(shape):
    cf = CharacteristicFunction(lambda w: (1 - 1j * w) ** -shape, f"Gamma({shape}, 1)")
    for x in (0.25, 1.0, 3.0, 8.0):
        assert abs(analytic.gil_pelaez_cdf(cf, x) - stats.gamma.cdf(x, shape)) <= 1e-6


def test_gil_pelaez_standard_normal():
    cf = CharacteristicFunction(lambda w: cmath.exp(-w * w / 2), "N(0, 1)")
    assert abs(analytic.gil_pelaez_cdf(cf, 0.0) - 0.5) <= 1e-8
    assert abs(analytic.gil_pelaez_cdf(cf, 1.0) - stats.norm.cdf(1.0)) <= 1e-6
    assert abs(analytic.gil_pelaez_cdf(cf, -2.0) - stats.norm.cdf(-2.0)) <= 1e-6


def test_gil_pelaez_sub_probability_measure():
    # 0.3 times an Exp(1) law: F(x) = 0.3 (1 - e^-x)
    cf = CharacteristicFunction(lambda w: 0.3 / (1 - 1j * w), "0.3 Exp(1)", mass=0.3)
    result = analytic.gil_pelaez_inversion(cf, 2.0)
    assert_allclose(result.value, 0.3 * (1 - math.exp(-2.0)), atol=1e-7)
    assert result.evaluations > 0 and result.panels > 0 and result.truncation_omega > 0


def test_gil_pelaez_point_mass():
    cf = CharacteristicFunction(lambda w: cmath.exp(1j * w), "point mass at 1")
    assert analytic.gil_pelaez_cdf(cf, 2.0) == pytest.approx(1.0, abs=1e-8)
    assert analytic.gil_pelaez_cdf(cf, 0.0) == pytest.approx(0.0, abs=1e-8)
    assert analytic.gil_pelaez_cdf(cf, 1.0) == pytest.approx(0.5, abs=1e-8)


def test_gil_pelaez_point_mass_with_declared_centre():
    cf = CharacteristicFunction(lambda w: 0.4 * cmath.exp(-3j * w), "0.4 delta(-3)", mass=0.4, centre=-3.0)
    assert analytic.gil_pelaez_cdf(cf, -1.0) == pytest.approx(0.4, abs=1e-8)
    assert analytic.gil_pelaez_cdf(cf, -5.0) == pytest.approx(0.0, abs=1e-8)


def test_gil_pelaez_respects_scale():
    # Gamma(2, 1e-13): the same law in watts
    theta = 1e-13
    cf = CharacteristicFunction(lambda w: (1 - 1j * w * theta) ** -2, "Gamma(2, 1e-13)", scale=theta)
    assert abs(analytic.gil_pelaez_cdf(cf, 2 * theta) - stats.gamma.cdf(2.0, 2)) <= 1e-6


# --- Interference CFs and the signal term --------------------------------

def test_cfs_are_bounded_and_start_at_one(loaded_params):
    rho = loaded_params.rho
    for cf in (analytic.cf_inter, analytic.cf_intra, analytic.interference_cf):
        assert abs(cf(1e-9 / rho, loaded_params) - 1) < 1e-6
        for w in (0.1, 1.0, 10.0, 1e3):
            assert abs(cf(w / rho, loaded_params)) <= 1 + 1e-12


def test_interference_cf_is_the_product(loaded_params):
    w = 0.7 / loaded_params.rho
    product = analytic.cf_intra(w, loaded_params) * analytic.cf_inter(w, loaded_params)
    assert_allclose(analytic.interference_cf(w, loaded_params), product, rtol=1e-14)


def test_no_contenders_means_no_interference():
    p = NetworkParams(lambda_ue=0.0)
    w = 3.0 / p.rho
    assert analytic.cf_inter(w, p) == 1
    assert_allclose(analytic.cf_intra(w, p), 1.0, atol=1e-15)


@pytest.mark.parametrize("w", [0.05, 0.5, 2.0, 8.0])
def test_cf_intra_closed_form_and_series_agree(loaded_params, w):
    omega = w / loaded_params.rho
    closed = analytic.cf_intra(omega, loaded_params, form="closed")
    series = analytic.cf_intra(omega, loaded_params, form="series")
    assert abs(closed - series) <= 1e-8


def test_cf_intra_matches_monte_carlo_of_its_definition(loaded_params):
    # intra interference: rho times the sum of max(U - J + 1, 0) Gamma(d_s, 1) gains
    p = loaded_params
    rng = np.random.default_rng(3)
    table = netmodel.occupancy_pmf_table(p)
    u = rng.choice(len(table.pmf), size=200_000, p=table.pmf / table.pmf.sum())
    shape = np.maximum(u - p.J + 1, 0) * p.d_s
    samples = np.where(shape > 0, rng.gamma(np.maximum(shape, 1)), 0.0)
    omega = 0.5 / p.rho
    empirical = np.mean(np.exp(1j * omega * p.rho * samples))
    assert abs(analytic.cf_intra(omega, p) - empirical) < 5e-3


def test_cf_rejects_non_positive_omega(default_params):
    for cf in (analytic.cf_inter, analytic.cf_intra, analytic.interference_cf, analytic.signal_term):
        with pytest.raises(DomainError):
            cf(0.0, default_params)
    with pytest.raises(DomainError):
        analytic.cf_intra(1.0, default_params, form="taylor")


@pytest.mark.parametrize("literal", [False, True])
def test_signal_term_limits(loaded_params, literal):
    rho = loaded_params.rho
    assert abs(analytic.signal_term(1e-9 / rho, loaded_params, literal) - 1) < 1e-6
    loud = loaded_params.updated(gamma_th=1e12)
    assert abs(analytic.signal_term(1.0 / rho, loud, literal) - 1) < 1e-6


# --- Success probability --------------------------------------------------

@pytest.mark.parametrize("d_s", [2, 4])
def test_noise_limited_success_has_closed_form(d_s):
    # no contenders: success iff rho G / gamma_th >= sigma^2 with G ~ Gamma(d_s, 1)
    p = NetworkParams(lambda_ue=0.0, d_s=d_s)
    expected = (1 - netmodel.truncation_outage(p)) * stats.gamma.sf(p.gamma_th * p.sigma_sq / p.rho, d_s)
    assert abs(analytic.success_probability(p).p_suc - expected) <= 1e-6


def test_sparse_degree_helps_when_noise_limited():
    p2 = NetworkParams(lambda_ue=0.0, d_s=2)
    p4 = NetworkParams(lambda_ue=0.0, d_s=4)
    assert analytic.success_probability(p4).p_suc >= analytic.success_probability(p2).p_suc


def test_noise_free_isolated_ue_always_succeeds(quiet_params):
    result = analytic.success_probability(quiet_params)
    assert_allclose(result.p_suc, 1 - netmodel.truncation_outage(quiet_params), atol=1e-6)


def test_success_probability_decreases_with_threshold(loaded_params):
    values = [analytic.success_probability(loaded_params.updated(gamma_th=db_to_linear(g))).p_suc
              for g in (-10.0, -5.0, 0.0, 5.0, 10.0)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]


def test_interference_lowers_success(loaded_params):
    isolated = loaded_params.updated(lambda_ue=0.0)
    assert analytic.success_probability(loaded_params).p_suc < analytic.success_probability(isolated).p_suc


def test_more_codebooks_help(loaded_params):
    lambda_u = netmodel.pilot_intensity(loaded_params)
    j12 = loaded_params.updated(T=8).with_lambda_u(lambda_u)
    j10 = loaded_params.updated(L=5, T=8).with_lambda_u(lambda_u)
    assert (j12.J, j10.J) == (12, 10)
    for gamma_db in (-10.0, 0.0):
        g = db_to_linear(gamma_db)
        p12 = analytic.success_probability(j12.updated(gamma_th=g)).p_suc
        p10 = analytic.success_probability(j10.updated(gamma_th=g)).p_suc
        assert p12 >= p10 - 1e-9


def test_success_flat_in_max_power_at_high_threshold(default_params):
    p = default_params.updated(gamma_th=db_to_linear(5.0))
    values = [analytic.success_probability(p.updated(rho_max=dbm_to_watts(dbm))).p_suc
              for dbm in (0.0, 10.0, 20.0, 30.0)]
    assert max(values) - min(values) <= 0.01


def _complement(lambda_u, gamma_db, d_s=2):
    p = NetworkParams(interferer_thinning=InterfererThinning.COMPLEMENT, d_s=d_s,
                      gamma_th=db_to_linear(gamma_db))
    return p.with_lambda_u(lambda_u)


def test_heavier_load_wins_only_at_low_threshold():
    # more contenders add served signal, which pays off only while the threshold is low
    def p_suc(lambda_u, gamma_db):
        return analytic.success_probability(_complement(lambda_u, gamma_db)).p_suc

    assert p_suc(1e-4, -20.0) > p_suc(3e-5, -20.0)
    for gamma_db in (-5.0, 0.0):
        assert p_suc(3e-5, gamma_db) > p_suc(1e-4, gamma_db)


def test_denser_spreading_margin_shrinks_with_load():
    lambda_b = NetworkParams().lambda_b

    def p_suc(d_s, ratio, gamma_db):
        return analytic.success_probability(_complement(ratio * lambda_b, gamma_db, d_s)).p_suc

    for gamma_db in (-10.0, -5.0):
        for ratio in (1.0, 3.0, 6.0):
            assert p_suc(4, ratio, gamma_db) >= p_suc(2, ratio, gamma_db) - 1e-9
    gaps = [p_suc(4, ratio, -5.0) - p_suc(2, ratio, -5.0) for ratio in (1.0, 3.0, 30.0)]
    assert gaps[0] > gaps[1] > abs(gaps[2])


def test_success_probability_is_deterministic(loaded_params):
    first = analytic.success_probability(loaded_params)
    second = analytic.success_probability(loaded_params)
    assert first.p_suc == second.p_suc
    assert first.integrand_evals > 0


def test_literal_signal_term_stays_a_probability(loaded_params):
    p_suc = analytic.success_probability(loaded_params, literal_signal=True).p_suc
    assert 0.0 <= p_suc <= 1.0


# --- Asymptotic form and ASE ---------------------------------------------

def test_asymptotic_form_refuses_noisy_networks(default_params):
    with pytest.raises(PremiseError):
        analytic.success_probability_asymptotic(default_params)


def test_asymptotic_form_refuses_overflowing_cells(loaded_params):
    quiet = loaded_params.updated(sigma_sq=loaded_params.rho * 1e-4)
    heavy = quiet.with_lambda_u(30 * quiet.lambda_b)
    with pytest.raises(PremiseError):
        analytic.success_probability_asymptotic(heavy)


def test_asymptotic_form_decreases_with_threshold():
    p = NetworkParams(sigma_sq=1e-17, interferer_thinning=InterfererThinning.COMPLEMENT)
    p = p.with_lambda_u(3e-7)
    values = [analytic.success_probability_asymptotic(p.updated(gamma_th=db_to_linear(g)))
              for g in (-10.0, 0.0, 10.0, 30.0)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_asymptotic_xi():
    assert_allclose(analytic.asymptotic_xi(2), 2 / 3)
    assert_allclose(analytic.asymptotic_xi(4), 0.8)


def test_ase_formula(loaded_params):
    p_suc = 0.4
    expected = (netmodel.pilot_intensity(loaded_params) * netmodel.mean_served(loaded_params)
                * p_suc * math.log2(1 + loaded_params.gamma_th))
    assert_allclose(analytic.ase(loaded_params, p_suc), expected, rtol=1e-14)
    assert analytic.ase(loaded_params.updated(lambda_ue=0.0)) == 0.0


# --- Error-rate analysis --------------------------------------------------

def test_pep_constant():
    p = NetworkParams()
    assert analytic.pep_constant(p.updated(rho_max=math.inf)) == 1.0
    assert abs(analytic.pep_constant(p.updated(rho_max=1e6)) - 1.0) <= 1e-9
    # alpha = 1
    p1 = p.updated(rho_max=p.rho / (math.pi * p.lambda_b) ** 2)
    assert_allclose(netmodel.alpha(p1), 1.0, rtol=1e-12)
    assert_allclose(analytic.pep_constant(p1), (1 - 2 / math.e) / (1 - 1 / math.e), rtol=1e-12)


def test_pep_interference_cf_decays(default_params):
    values = [analytic.pep_interference_cf(v, default_params) for v in (1e-6, 0.1, 1.0, 10.0, 100.0)]
    assert abs(values[0] - 1.0) < 1e-5
    assert all(0.0 < v <= 1.0 for v in values)
    assert all(a >= b for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        analytic.pep_interference_cf(0.0, default_params)


@pytest.mark.parametrize("d_s", [1, 2, 4])
@pytest.mark.parametrize("v", [0.5, 4.0, 40.0])
def test_expected_sin_matches_numerical_expectation(d_s, v):
    theta = 2.0
    density = stats.gamma(d_s, scale=theta)
    expected, _ = integrate.quad(lambda h: math.sin(math.sqrt(v * h) / 2) * density.pdf(h), 0, np.inf,
                                 limit=200)
    assert_allclose(analytic.expected_sin(v, theta, d_s), expected, rtol=1e-7, atol=1e-12)


def test_expected_sin_edges():
    assert analytic.expected_sin(0.0, 2.0, 2) == 0.0
    with pytest.raises(DomainError):
        analytic.expected_sin(1.0, 2.0, 1.5)
    with pytest.raises(DomainError):
        analytic.expected_sin(1.0, 0.0, 2)


def test_apep_matches_direct_integral(default_params):
    p, delta, snr = default_params, 2.0, 100.0
    constant = analytic.pep_constant(p)

    def integrand(v):
        return (math.exp(-v / (4 * snr)) * analytic.pep_interference_cf(v, p)
                * analytic.expected_sin(v, delta, p.d_s) / v)

    head, _ = integrate.quad(integrand, 0, 1, limit=200)
    tail, _ = integrate.quad(integrand, 1, np.inf, limit=200)
    expected = 0.5 - (head + tail) / (2 * math.pi)
    assert constant > 0
    assert_allclose(analytic.apep(delta, p, snr), expected, atol=1e-7)


def test_apep_limits_and_ordering(default_params):
    p = default_params
    assert analytic.apep(2.0, p, snr=0.0) == 0.5
    low, high = analytic.apep(2.0, p, snr=10.0), analytic.apep(2.0, p, snr=1000.0)
    assert 0.0 < high <= low <= 0.5
    assert analytic.apep(4.0, p, snr=100.0) <= analytic.apep(2.0, p, snr=100.0)
    with pytest.raises(DomainError):
        analytic.apep(0.0, p)


def test_apep_error_floor_at_high_snr():
    p = NetworkParams(rho_max=math.inf)
    at_60 = analytic.apep(2.0, p, snr=db_to_linear(60.0))
    at_80 = analytic.apep(2.0, p, snr=db_to_linear(80.0))
    assert abs(at_60 - at_80) <= 0.01 * at_80


def test_apep_non_increasing_in_snr(default_params):
    values = [analytic.apep(2.0, default_params, snr=db_to_linear(db)) for db in (0.0, 10.0, 20.0, 30.0, 40.0)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


def test_apep_depends_on_density_and_max_power_through_alpha(default_params):
    snr = db_to_linear(20.0)
    # C = E[T | T < alpha], T ~ Exp(1), grows with alpha and so does the interference
    by_density = [analytic.apep(2.0, default_params.updated(lambda_b=lb), snr) for lb in (1e-7, 1e-6, 1e-5)]
    assert all(b >= a - 1e-12 for a, b in zip(by_density, by_density[1:]))
    assert by_density[0] < by_density[-1]
    same_alpha = default_params.updated(lambda_b=4 * default_params.lambda_b,
                                        rho_max=default_params.rho_max / 16)
    assert_allclose(netmodel.alpha(same_alpha), netmodel.alpha(default_params), rtol=1e-12)
    assert_allclose(analytic.apep(2.0, same_alpha, snr), analytic.apep(2.0, default_params, snr), rtol=1e-9)


def test_asep_rises_then_saturates_in_max_power(default_params):
    cb = builtin_codebook("sparse4")
    snr = db_to_linear(20.0)
    values = [analytic.asep(cb, default_params.updated(rho_max=dbm_to_watts(dbm)), snr)
              for dbm in (-50.0, -30.0, -10.0, 0.0, 10.0, 20.0, 30.0)]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[3] > 1.5 * values[0]
    assert values[-1] - values[-2] <= 1e-3 * values[-1]


def test_apep_normalized_distance(default_params):
    assert analytic.apep(4.0, default_params, 100.0, normalize_distance=True) == \
        analytic.apep(2.0, default_params, 100.0)


def test_asep_nearest_neighbour_form(default_params):
    cb = builtin_codebook("sparse4")
    spectrum = cb.spectrum
    expected = np.mean(spectrum.neighbor_count) * analytic.apep(spectrum.delta_min_sq, default_params, 1e3)
    assert_allclose(analytic.asep(cb, default_params, 1e3), expected, rtol=1e-14)
    assert analytic.asep(spectrum, default_params, 1e3) == analytic.asep(cb, default_params, 1e3)


def test_full_union_bound_dominates_nearest_form(default_params):
    cb = builtin_codebook("sparse4")
    nearest = analytic.asep(cb, default_params, 1e3)
    full = analytic.asep(cb, default_params, 1e3, full_union_bound=True)
    assert full >= nearest


def test_dense_codebook_lowers_asep(default_params):
    snr = db_to_linear(30.0)
    sparse, dense = builtin_codebook("sparse4"), builtin_codebook("dense4")
    sparse_asep = analytic.asep(sparse, default_params.updated(d_s=sparse.d_s), snr)
    dense_asep = analytic.asep(dense, default_params.updated(d_s=dense.d_s), snr)
    assert dense_asep <= sparse_asep
