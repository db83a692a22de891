"""Self-verification suite behind ``gfscma verify``."""

import cmath
import logging
import math
from typing import Callable, List, NamedTuple

import numpy as np
from scipy import special, stats

from ..config.settings import THREADS
from ..core import analytic, montecarlo, netmodel, scma, specfun
from ..core.analytic import CharacteristicFunction
from ..data.models import InterfererThinning, NetworkParams
from ..data.validators import db_to_linear
from ..utils.errors import CodebookInvariantError, GfScmaError
from ..utils.logging import log_execution_time

logger = logging.getLogger(__name__)

# network where truncation is frequent enough to measure: alpha = 1
TRUNCATING_RHO_MAX = 1e-13 * (1.0 / (math.pi * 1e-5)) ** 2


class VerifyCheck(NamedTuple):
    module: str
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _relative(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def _specfun_checks(seed: int) -> List[VerifyCheck]:
    checks = []
    points_2f1 = [(-0.5, 2.0, 0.5, 0.3), (-0.5, 2.0, 0.5, -0.95), (0.25, 1.5, 2.5, -4.0)]
    worst = max(_relative(specfun.hyp2f1(a, b, c, z).real, special.hyp2f1(a, b, c, z))
                for a, b, c, z in points_2f1)
    checks.append(VerifyCheck("specfun", "hyp2f1_vs_scipy", worst <= 1e-9, worst, 1e-9))

    points_1f1 = [(-0.5, 0.5, -3.0), (1.5, 2.5, 4.0), (-1.0, 1.5, 2.0)]
    worst = max(_relative(specfun.hyp1f1(a, b, z).real, special.hyp1f1(a, b, z))
                for a, b, z in points_1f1)
    checks.append(VerifyCheck("specfun", "hyp1f1_vs_scipy", worst <= 1e-9, worst, 1e-9))

    rng = np.random.default_rng(seed)
    n = 200
    worst = 0.0
    for a, b, z in zip(rng.uniform(-2.0, 2.0, n), rng.uniform(0.5, 3.0, n),
                       rng.uniform(-5.0, 5.0, n) + 1j * rng.uniform(-5.0, 5.0, n)):
        lhs = specfun.hyp1f1(a, b, z)
        rhs = cmath.exp(z) * specfun.hyp1f1(b - a, b, -z, method="exact")
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    checks.append(VerifyCheck("specfun", "kummer_identity", worst <= 1e-8, worst, 1e-8,
                              f"{n} random points, |Re z|, |Im z| <= 5"))

    n = 1000
    worst = 0.0
    radius = 0.4 * np.sqrt(rng.uniform(0.0, 1.0, n))
    for a, b, c, z in zip(rng.uniform(-2.0, 2.0, n), rng.uniform(-2.0, 2.0, n), rng.uniform(0.5, 3.0, n),
                          radius * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))):
        direct = specfun.hyp2f1(a, b, c, z, method="direct")
        worst = max(worst, abs(direct - specfun.hyp2f1(a, b, c, z, method="pfaff")) / (1.0 + abs(direct)))
    checks.append(VerifyCheck("specfun", "pfaff_identity", worst <= 1e-8, worst, 1e-8,
                              f"{n} random points, |z| <= 0.4"))
    return checks


def _scma_checks(seed: int) -> List[VerifyCheck]:
    checks = []
    rng = np.random.default_rng(seed)
    for kind, design in sorted(scma.BUILTIN_DESIGNS.items()):
        d_s = len(design["support"])
        for c in scma.check_codewords(scma.builtin_codewords(kind), d_s):
            checks.append(VerifyCheck("scma", f"{kind}.{c.name}", c.passed, c.measured,
                                      c.tolerance, c.detail))
        try:
            cb = scma.Codebook(scma.builtin_codewords(kind), d_s, name=kind)
        except CodebookInvariantError:
            continue  # reported by the structural checks above
        phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cb.K))
        rotated = scma.Codebook(cb.codewords * phases, d_s, name=f"{kind}-rotated")
        shift = abs(rotated.spectrum.delta_min_sq - cb.spectrum.delta_min_sq)
        same_neighbours = rotated.spectrum.neighbor_count == cb.spectrum.neighbor_count
        checks.append(VerifyCheck("scma", f"{kind}.rotation_invariant", shift <= 1e-12 and same_neighbours,
                                  shift, 1e-12, "random phase on every resource block"))
    indicator = scma.build_indicator(4, 2)
    checks.append(VerifyCheck("scma", "indicator_regular", indicator.rb_degree == 3,
                              float(indicator.rb_degree), 3.0, "K=4, d_s=2 gives d_f=3"))
    return checks


def _netmodel_checks() -> List[VerifyCheck]:
    checks = []
    for ratio in (1.0, 3.0, 6.0):
        p = NetworkParams(interferer_thinning=InterfererThinning.COMPLEMENT, rho_max=math.inf)
        p = p.with_lambda_u(ratio * p.lambda_b)
        table = netmodel.occupancy_pmf_table(p)
        beta = netmodel.occupancy_beta(p)
        x = 0.5
        series = float(np.dot(table.pmf, x ** np.arange(len(table.pmf))))
        closed = (1.0 + beta * (1.0 - x)) ** (-p.c_voronoi - 1.0)
        residual = abs(series - closed)
        checks.append(VerifyCheck("netmodel", f"generating_function[lambda_u/lambda_b={ratio:g}]",
                                  residual <= 1e-8, residual, 1e-8))
    p = NetworkParams()
    served = netmodel.mean_served(p)
    checks.append(VerifyCheck("netmodel", "mean_served_range", 1.0 <= served <= p.J, served,
                              float(p.J), "1 <= U_bar <= J"))
    return checks


def _analytic_checks() -> List[VerifyCheck]:
    checks = []
    gamma2 = CharacteristicFunction(lambda w: (1 - 1j * w) ** -2, "Gamma(2, 1)")
    worst = max(abs(analytic.gil_pelaez_cdf(gamma2, x) - stats.gamma.cdf(x, 2)) for x in (0.5, 2.0, 5.0))
    checks.append(VerifyCheck("analytic", "gil_pelaez_gamma_cdf", worst <= 1e-6, worst, 1e-6))

    normal = CharacteristicFunction(lambda w: cmath.exp(-w * w / 2), "N(0, 1)")
    median = abs(analytic.gil_pelaez_cdf(normal, 0.0) - 0.5)
    checks.append(VerifyCheck("analytic", "gil_pelaez_normal_median", median <= 1e-8, median, 1e-8))

    p = NetworkParams(interferer_thinning=InterfererThinning.COMPLEMENT)
    p = p.with_lambda_u(3 * p.lambda_b)
    gap = max(abs(analytic.cf_intra(w / p.rho, p, "closed") - analytic.cf_intra(w / p.rho, p, "series"))
              for w in (0.1, 0.5, 1.0))
    checks.append(VerifyCheck("analytic", "cf_intra_forms_agree", gap <= 1e-8, gap, 1e-8))

    loud = p.updated(gamma_th=1e12)
    deviation = abs(analytic.signal_term(1.0 / p.rho, loud) - 1.0)
    checks.append(VerifyCheck("analytic", "signal_term_high_threshold", deviation <= 1e-6, deviation, 1e-6))

    c_gap = abs(analytic.pep_constant(p.updated(rho_max=1e6)) - 1.0)
    checks.append(VerifyCheck("analytic", "pep_constant_limit", c_gap <= 1e-9, c_gap, 1e-9))

    thresholds = (-10.0, -5.0, 0.0, 5.0, 10.0)
    values = [analytic.success_probability(p.updated(gamma_th=db_to_linear(g))).p_suc for g in thresholds]
    rise = max(b - a for a, b in zip(values, values[1:]))
    checks.append(VerifyCheck("analytic", "p_suc_monotone_in_threshold", rise <= 1e-9, rise, 1e-9,
                              "gamma_th -10..10 dB at lambda_u = 3 lambda_b"))

    # served contenders add signal, so P_suc only falls with load once cells overflow
    def loaded(ratio: float, gamma_db: float) -> float:
        q = p.updated(gamma_th=db_to_linear(gamma_db)).with_lambda_u(ratio * p.lambda_b)
        return analytic.success_probability(q).p_suc

    values = [loaded(ratio, -5.0) for ratio in (3.0, 10.0, 30.0)]
    rise = max(b - a for a, b in zip(values, values[1:]))
    checks.append(VerifyCheck("analytic", "p_suc_falls_with_overflowing_load", rise <= 1e-9, rise, 1e-9,
                              "lambda_u/lambda_b = 3, 10, 30 at -5 dB"))
    margin = loaded(10.0, -20.0) - loaded(3.0, -20.0)
    checks.append(VerifyCheck("analytic", "p_suc_load_crossing", margin > 0 and values[1] < values[0],
                              margin, 0.0, "heavier load wins at -20 dB and loses at -5 dB"))

    plain = NetworkParams()
    values = [analytic.apep(2.0, plain, db_to_linear(snr_db)) for snr_db in (0.0, 10.0, 20.0, 30.0, 40.0)]
    rise = max(b - a for a, b in zip(values, values[1:]))
    checks.append(VerifyCheck("analytic", "apep_monotone_in_snr", rise <= 1e-12, rise, 1e-12))

    # lambda_b and rho_m act only through C = E[T | T < alpha], T ~ Exp(1)
    values = [analytic.apep(2.0, plain.updated(lambda_b=lb), 100.0) for lb in (1e-7, 1e-6, 1e-5)]
    drop = max(a - b for a, b in zip(values, values[1:]))
    checks.append(VerifyCheck("analytic", "apep_follows_alpha_in_lambda_b", drop <= 1e-12, drop, 1e-12,
                              "non-decreasing, as in rho_m"))
    return checks


def _montecarlo_checks(seed: int, threads: int) -> List[VerifyCheck]:
    checks = []
    p = NetworkParams(rho_max=TRUNCATING_RHO_MAX, interferer_thinning=InterfererThinning.COMPLEMENT)
    n = 2000
    estimate = montecarlo.truncation_fraction(p, n, seed, threads=threads)
    expected = netmodel.truncation_outage(p)
    sigma = math.sqrt(expected * (1 - expected) / n)
    gap = abs(estimate.value - expected)
    checks.append(VerifyCheck("montecarlo", "truncation_fraction", gap <= 3 * sigma, gap, 3 * sigma,
                              f"empirical {estimate.value:.4f}, O_p {expected:.4f}"))

    distances = montecarlo.serving_distances(p, n, seed + 1, threads=threads)
    pvalue = stats.kstest(distances, lambda r: -np.expm1(-math.pi * p.lambda_b * np.square(r))).pvalue
    checks.append(VerifyCheck("montecarlo", "serving_distance_rayleigh", pvalue > 0.01, float(pvalue), 0.01,
                              "Kolmogorov-Smirnov p-value"))

    rng = np.random.default_rng(seed)
    counts = [len(montecarlo.sample_hppp(1e-5, 1000.0, rng)) for _ in range(10_000)]
    mean_gap = abs(float(np.mean(counts)) - 10.0) / 10.0
    checks.append(VerifyCheck("montecarlo", "hppp_mean_count", mean_gap <= 0.02, mean_gap, 0.02))

    unlimited = NetworkParams(rho_max=math.inf, interferer_thinning=InterfererThinning.COMPLEMENT)
    unlimited = unlimited.with_lambda_u(3 * unlimited.lambda_b)
    pvalue = montecarlo.occupancy_fit(unlimited, n, seed + 2, threads=threads)
    checks.append(VerifyCheck("montecarlo", "occupancy_chi_square", pvalue > 0.01, pvalue, 0.01,
                              "simulated |U_in| against the occupancy law, lambda_u = 3 lambda_b"))

    intensity = netmodel.pilot_intensity(unlimited)
    outer = math.sqrt(5.0 / (math.pi * intensity))
    rings = 5
    radii = outer * np.sqrt(np.arange(1, rings + 1) / rings)
    totals = montecarlo.neighbour_counts(unlimited, radii, n, seed + 3, threads=threads).sum(axis=0)
    expected = n * intensity * math.pi * outer ** 2 / rings
    statistic = float(np.sum((totals - expected) ** 2) / expected)
    pvalue = float(stats.chi2.sf(statistic, rings))
    checks.append(VerifyCheck("montecarlo", "typical_point_neighbourhood", pvalue > 0.01, pvalue, 0.01,
                              f"UE counts in {rings} equal-area rings around the typical UE"))
    return checks


def _guarded(module: str, build: Callable[[], List[VerifyCheck]]) -> List[VerifyCheck]:
    try:
        return build()
    except GfScmaError as e:
        logger.error("%s checks raised: %s", module, e)
        return [VerifyCheck(module, "raised", False, math.nan, 0.0, str(e))]


@log_execution_time
def run_verify(seed: int = 0, threads: int = THREADS) -> List[VerifyCheck]:
    """
    Run every module's invariant checks.

    Failures are report content; a check that raises becomes a failed check.
    """
    checks: List[VerifyCheck] = []
    checks += _guarded("specfun", lambda: _specfun_checks(seed))
    checks += _guarded("scma", lambda: _scma_checks(seed))
    checks += _guarded("netmodel", _netmodel_checks)
    checks += _guarded("analytic", _analytic_checks)
    checks += _guarded("montecarlo", lambda: _montecarlo_checks(seed, threads))
    failed = [c for c in checks if not c.passed]
    for c in failed:
        logger.warning("Check %s.%s failed: measured %.4g, tolerance %.4g %s",
                       c.module, c.name, c.measured, c.tolerance, c.detail)
    logger.info("%d/%d checks passed", len(checks) - len(failed), len(checks))
    return checks
