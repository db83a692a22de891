"""
Analytical success probability, area spectral efficiency and error-rate
results for grant-free SCMA in Poisson networks.

Characteristic functions take the angular frequency ``omega`` in 1/W; the
natural frequency scale of every CF here is 1/rho. Success probability is
recovered by Gil-Pelaez inversion over dyadic panels (see
:mod:`gfscma.core.quadrature`).
"""

import cmath
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from ..config.settings import (ASYMPTOTIC_NOISE_RATIO, ASYMPTOTIC_OVERFLOW_MASS, CENTRE_STEP,
                               CLAMP_SLACK, DECAY_CHECK_FREQUENCY, DECAY_CHECK_MODULUS,
                               INTRA_CLOSED_FORM_LIMIT, KUMMER_TERM_BUDGET)
from ..data.models import NetworkParams, TruncationMoment
from ..utils.errors import DomainError, PremiseError, QuadratureError
from . import netmodel
from .quadrature import integrate_dyadic, oscillatory_panel, quad_panel
from .scma import Codebook, DistanceSpectrum
from .specfun import hyp1f1, hyp2f1, ln_gamma, lower_incomplete_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharacteristicFunction:
    """CF of a real random variable, or of a sub-probability measure of total ``mass``."""
    evaluator: Callable[[float], complex]
    description: str = ""
    scale: float = 1.0  # spread of the variable; the CF varies on omega ~ 1/scale
    mass: float = 1.0  # limit of the CF as omega -> 0+
    centre: Optional[float] = None  # location a non-decaying CF rotates about; inferred when None

    def __call__(self, omega: float) -> complex:
        return complex(self.evaluator(omega))


@dataclass
class GilPelaezResult:
    value: float
    evaluations: int
    truncation_omega: float
    panels: int


@dataclass
class SuccessResult:
    """Success probability with quadrature diagnostics."""
    p_suc: float
    integrand_evals: int
    truncation_omega: float


@dataclass(frozen=True)
class _NetworkTerms:
    alpha: float
    outage: float
    beta: float
    pmf_head: Tuple[float, ...]  # P{|U_in| = u}, u = 0 .. J-1
    pmf_table: Tuple[float, ...]
    overflow: float  # P{|U_in| >= J}
    inter_coeff: float  # beta c [truncated second-moment bracket]


@lru_cache(maxsize=256)
def _terms(p: NetworkParams) -> _NetworkTerms:
    a = netmodel.alpha(p)
    outage = math.exp(-a)
    beta = netmodel.occupancy_beta(p)
    table = netmodel.occupancy_pmf_table(p)
    head = tuple(float(table.pmf[u]) if u < len(table.pmf) else 0.0 for u in range(p.J))

    if math.isinf(a):
        bracket = 1.0
    elif p.truncation_moment == TruncationMoment.AS_PAPER:
        bracket = 1.0 - (1.0 + a / (math.pi * p.lambda_b)) * outage
    else:
        bracket = 1.0 - (1.0 + a) * outage
    return _NetworkTerms(
        alpha=a,
        outage=outage,
        beta=beta,
        pmf_head=head,
        pmf_table=tuple(float(v) for v in table.pmf),
        overflow=netmodel.occupancy_at_least(p.J, p),
        inter_coeff=beta * p.c_voronoi * bracket,
    )


def _require_positive_omega(omega: float) -> None:
    if not (omega > 0 and math.isfinite(omega)):
        raise DomainError(f"omega must be finite and > 0, got {omega}")


def _cf_inter(omega: float, p: NetworkParams) -> complex:
    coeff = _terms(p).inter_coeff
    if coeff == 0:
        return complex(1.0)
    delta = 1.0 / p.b
    m_omega = 1.0 - hyp2f1(-delta, p.d_s, 1.0 - delta, 1j * omega * p.rho)
    return cmath.exp(coeff * m_omega)


def cf_inter(omega: float, p: NetworkParams) -> complex:
    """
    CF of the inter-cell interference,
    exp{beta c [1 - (1 + a) e^-alpha] M_omega} with M_omega = 1 - 2F1(-1/b, d_s; 1-1/b; j omega rho).

    The bracket term ``a`` is alpha / (pi lambda_b) or alpha per ``p.truncation_moment``.
    """
    _require_positive_omega(omega)
    return _cf_inter(omega, p)


def _cf_intra(omega: float, p: NetworkParams, form: str = "auto") -> complex:
    terms = _terms(p)
    J, d_s = p.J, p.d_s
    head_mass = math.fsum(terms.pmf_head)
    base = 1.0 - 1j * omega * p.rho
    kernel = base ** (-d_s)  # E[exp(j omega rho G)], G ~ Gamma(d_s, 1)

    if form == "auto":
        form = "closed" if abs(base) ** (d_s * (J - 1)) <= INTRA_CLOSED_FORM_LIMIT else "series"
    if form == "closed":
        partial = sum(pu * kernel ** u for u, pu in enumerate(terms.pmf_head))
        generating = (1.0 + terms.beta * (1.0 - kernel)) ** (-p.c_voronoi - 1.0)
        return head_mass + base ** (d_s * (J - 1)) * (generating - partial)
    if form == "series":
        overflow = terms.pmf_table[J:]
        if not overflow:
            return complex(head_mass)
        powers = kernel ** np.arange(1, len(overflow) + 1)
        return head_mass + complex(np.dot(np.asarray(overflow), powers))
    raise DomainError(f"Unknown cf_intra form '{form}'")


def cf_intra(omega: float, p: NetworkParams, form: str = "auto") -> complex:
    """
    CF of the intra-cell interference from the UEs beyond MPA capacity:

        sum_{u<J} P(u) + (1 - j omega rho)^{d_s (J-1)}
            * [(1 + beta (1 - K))^{-c-1} - sum_{u<J} P(u) K^u],  K = (1 - j omega rho)^{-d_s}

    Args:
        omega: Angular frequency, > 0
        p: Network parameters
        form: ``"closed"`` evaluates the expression above, ``"series"`` the
            equivalent sum_{u>=J} P(u) K^{u-J+1} over the PMF table, and
            ``"auto"`` switches to the series once the prefactor would
            amplify cancellation error past INTRA_CLOSED_FORM_LIMIT
    """
    _require_positive_omega(omega)
    return _cf_intra(omega, p, form)


def interference_cf(omega: float, p: NetworkParams) -> complex:
    """CF of the total interference, the product of the intra- and inter-cell CFs."""
    _require_positive_omega(omega)
    return _cf_intra(omega, p) * _cf_inter(omega, p)


def _signal_parts(p: NetworkParams, literal: bool) -> Tuple[float, Callable[[float], complex]]:
    """Split S_omega into its constant part and the part that decays with omega."""
    terms = _terms(p)
    J, d_s = p.J, p.d_s
    served = 1.0 - terms.outage
    head = terms.pmf_head

    def signal_kernel(omega: float) -> complex:
        return (1.0 + 1j * omega * p.rho / p.gamma_th) ** (-d_s)

    if not literal:
        def decaying(omega: float) -> complex:
            a = signal_kernel(omega)
            mixture = sum(pu * a ** (u + 1) for u, pu in enumerate(head))
            return served * (mixture + terms.overflow * a ** J)
        return terms.outage, decaying

    head_mass = math.fsum(head)

    def decaying_literal(omega: float) -> complex:
        a = signal_kernel(omega)
        partial = sum(head[u] * a ** u for u in range(1, J))
        return served * (head_mass * a ** J - partial)
    return terms.outage + served * (1.0 - head[0]), decaying_literal


def signal_term(omega: float, p: NetworkParams, literal: bool = False) -> complex:
    """
    Signal-related function S_omega.

    The default weighs (1 + j omega rho / gamma_th)^{-d_s (u+1)} by
    P{|U_in| = u} for u < J, which counts the typical UE's own signal, and
    (1 + j omega rho / gamma_th)^{-J d_s} by P{|U_in| >= J}. ``literal=True``
    evaluates the shorter bracket 1 - sum P(u) [A^u - A^J] instead.
    """
    _require_positive_omega(omega)
    constant, decaying = _signal_parts(p, literal)
    return constant + decaying(omega)


def _phase_centre(cf: CharacteristicFunction, phi: Callable[[float], complex]) -> float:
    """
    Location a CF that does not decay oscillates about, or 0 for a decaying CF.

    The centre is the phase slope at the origin, which is exact for a point
    mass and the mean for a law whose CF settles to a rotating constant.
    """
    if cf.centre is not None:
        return cf.centre
    if abs(phi(DECAY_CHECK_FREQUENCY / cf.scale)) <= DECAY_CHECK_MODULUS * cf.mass:
        return 0.0
    step = CENTRE_STEP / cf.scale
    centre = cmath.phase(phi(step)) / step
    logger.debug("CF '%s' does not decay; inverting about centre %.10g", cf.description, centre)
    return centre


def gil_pelaez_inversion(cf: CharacteristicFunction, x: float) -> GilPelaezResult:
    """
    F(x) = mass/2 - (1/pi) int_0^inf Im{e^{-j omega x} phi(omega)} d omega / omega.

    The integrand is written as Im{e^{-j omega (x - c)} psi(omega)} / omega with
    psi = e^{-j omega c} phi, so that a CF which keeps rotating (a lattice or a
    point mass) leaves a slowly varying psi for the weighted panel rules. The
    half line is truncated once |phi(omega)| / omega, with omega in units of
    the panel scale, stays below ENVELOPE_TOL.

    Raises:
        QuadratureError: If the integral cannot be truncated or a panel fails
    """
    cache: Dict[float, complex] = {}

    def phi(omega: float) -> complex:
        value = cache.get(omega)
        if value is None:
            value = cache[omega] = cf(omega)
        return value

    centre = _phase_centre(cf, phi)

    def psi(omega: float) -> complex:
        return phi(omega) * cmath.exp(-1j * omega * centre) if centre else phi(omega)

    def g_cos(omega: float) -> float:
        return psi(omega).imag / omega

    def g_sin(omega: float) -> float:
        return -psi(omega).real / omega

    offset = x - centre
    scale = 1.0 / cf.scale
    if offset == 0:
        rule = quad_panel(g_cos)
    else:
        scale = min(scale, 1.0 / abs(offset))
        rule = oscillatory_panel(g_cos, g_sin, offset)

    integral = integrate_dyadic(rule, scale, lambda omega: abs(phi(omega)) * scale / omega)
    value = 0.5 * cf.mass - integral.value / math.pi
    return GilPelaezResult(value, integral.evaluations, integral.upper, integral.panels)


def gil_pelaez_cdf(cf: CharacteristicFunction, x: float) -> float:
    """CDF at ``x`` recovered from a characteristic function, clamped to [0, mass]."""
    result = gil_pelaez_inversion(cf, x)
    return _clamp(result.value, upper=cf.mass, what="CDF")


def _clamp(value: float, upper: float = 1.0, what: str = "probability", strict: bool = True) -> float:
    if 0.0 <= value <= upper:
        return value
    residual = -value if value < 0 else value - upper
    if strict and residual > CLAMP_SLACK:
        raise QuadratureError(f"{what} {value:.10g} lies {residual:.3g} outside [0, {upper:g}]")
    logger.warning("Clamping %s %.12g into [0, %g] (residual %.3g)", what, value, upper, residual)
    return min(max(value, 0.0), upper)


def success_cf(p: NetworkParams, literal_signal: bool = False) -> CharacteristicFunction:
    """
    CF of Y = I - sum_{j in U} rho G_j / gamma_th over the non-truncated
    branch, so that P_suc = F_Y(-sigma^2).
    """
    _, decaying = _signal_parts(p, literal_signal)

    def evaluator(omega: float) -> complex:
        return decaying(omega) * _cf_intra(omega, p) * _cf_inter(omega, p)

    spread = p.rho * max(1.0, p.d_s / p.gamma_th)
    return CharacteristicFunction(evaluator, "success-event CF", scale=spread,
                                  mass=decaying(0.0).real)


def success_probability(p: NetworkParams, literal_signal: bool = False) -> SuccessResult:
    """
    Success probability of the UEs decoded by MPA in the typical cell,

        P_suc = 1/2 - (1/pi) int Im{S_omega Phi_intra Phi_inter e^{j omega sigma^2}} d omega / omega.

    The truncated-typical-UE branch of S_omega contributes P(I + sigma^2 <= 0) = 0,
    so only the decaying part of S_omega is inverted.
    """
    cf = success_cf(p, literal_signal)
    if cf.mass == 0:
        return SuccessResult(0.0, 0, 0.0)
    result = gil_pelaez_inversion(cf, -p.sigma_sq)
    p_suc = _clamp(result.value, what="P_suc", strict=not literal_signal)
    logger.debug("P_suc=%.10g (gamma_th=%.6g, %d evaluations, omega_max=%.3g)",
                 p_suc, p.gamma_th, result.evaluations, result.truncation_omega)
    return SuccessResult(p_suc, result.evaluations, result.truncation_omega)


def asymptotic_xi(d_s: float) -> float:
    """xi = 1 / (1 + 1/d_s)."""
    return 1.0 / (1.0 + 1.0 / d_s)


def success_probability_asymptotic(p: NetworkParams) -> float:
    """
    Interference-limited closed form obtained from the quadratic 2F1
    approximation and sin x ~ x.

    Raises:
        PremiseError: If noise is not negligible (sigma^2 / rho above
            ASYMPTOTIC_NOISE_RATIO) or J does not cover the cell
            (P{|U_in| >= J} above ASYMPTOTIC_OVERFLOW_MASS)
    """
    if p.sigma_sq / p.rho > ASYMPTOTIC_NOISE_RATIO:
        raise PremiseError(
            f"sigma^2/rho = {p.sigma_sq / p.rho:.3g} exceeds {ASYMPTOTIC_NOISE_RATIO:g}; "
            "the asymptotic form ignores noise"
        )
    overflow = netmodel.occupancy_at_least(p.J, p)
    if overflow > ASYMPTOTIC_OVERFLOW_MASS:
        raise PremiseError(
            f"P{{|U_in| >= J}} = {overflow:.3g} exceeds {ASYMPTOTIC_OVERFLOW_MASS:g}; "
            "the asymptotic form assumes no intra-cell interference"
        )
    b, c = p.b, p.c_voronoi
    xi = asymptotic_xi(p.d_s)
    beta = netmodel.occupancy_beta(p)
    load = netmodel.pilot_intensity(p) / p.lambda_b
    decay = math.exp(-load ** 2 * (2 * b - 1) * xi / (2 * (b - 1) ** 2))
    bracket = c / (2 * (b - 1)) - (c + 1) / p.gamma_th * decay
    value = 0.5 - beta * math.sqrt(4 * b - 2) * math.sqrt(xi) * bracket / math.sqrt(math.pi)
    return _clamp(value, what="asymptotic P_suc", strict=False)


def ase(p: NetworkParams, p_suc: Union[float, None] = None) -> float:
    """Area spectral efficiency lambda_u * U_bar * P_suc * log2(1 + gamma_th)."""
    if p_suc is None:
        p_suc = success_probability(p).p_suc
    return netmodel.pilot_intensity(p) * netmodel.mean_served(p) * p_suc * math.log2(1.0 + p.gamma_th)


def pep_constant(p: NetworkParams) -> float:
    """C = gamma(2, alpha) / (1 - e^-alpha); tends to 1 as rho_max grows."""
    a = netmodel.alpha(p)
    if math.isinf(a):
        return 1.0
    return lower_incomplete_gamma(2.0, a) / -math.expm1(-a)


def pep_interference_cf(v: float, p: NetworkParams) -> float:
    """phi_I(v) = exp{-C [1F1(-1/b; 1-1/b; -v/4) - 1]}."""
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"v must be finite and > 0, got {v}")
    return _pep_interference_cf(v, p, pep_constant(p))


def _pep_interference_cf(v: float, p: NetworkParams, constant: float) -> float:
    delta = 1.0 / p.b
    confluent = hyp1f1(-delta, 1.0 - delta, -v / 4.0, max_terms=KUMMER_TERM_BUDGET).real
    return math.exp(-constant * (confluent - 1.0))


def expected_sin(v: float, delta_norm_sq: float, d_s: int) -> float:
    """
    E[sin(sqrt(v H) / 2)] for H ~ Gamma(d_s, scale ||Delta||^2):

        ||Delta|| Gamma(d_s + 1/2) / (2 Gamma(d_s)) v^(1/2) e^{-x} 1F1(1 - d_s; 3/2; x),
        x = ||Delta||^2 v / 16

    The terminating form is exact for integer d_s.
    """
    if v < 0 or not math.isfinite(v):
        raise DomainError(f"v must be finite and >= 0, got {v}")
    if not delta_norm_sq > 0:
        raise DomainError(f"delta_norm_sq must be > 0, got {delta_norm_sq}")
    if int(d_s) != d_s or d_s < 1:
        raise DomainError(f"d_s must be an integer >= 1, got {d_s}")
    if v == 0:
        return 0.0
    x = delta_norm_sq * v / 16.0
    prefactor = math.sqrt(delta_norm_sq * v) / 2.0 * math.exp(ln_gamma(d_s + 0.5) - ln_gamma(d_s))
    return prefactor * math.exp(-x) * hyp1f1(1 - d_s, 1.5, x).real


def apep(
    delta_norm_sq: float,
    p: NetworkParams,
    snr: Union[float, None] = None,
    normalize_distance: bool = False,
) -> float:
    """
    Average pairwise error probability of two codewords at squared distance
    ``delta_norm_sq``,

        1/2 - (1/2pi) int_0^inf (1/v) exp{-v / (4 SNR)} phi_I(v) E[sin(sqrt(v H)/2)] dv,

    integrated in u = sqrt(v) so the integrand stays finite at the origin.

    Args:
        delta_norm_sq: ||Delta||^2 > 0
        p: Network parameters
        snr: rho / sigma^2; defaults to the ratio in ``p``
        normalize_distance: Divide ||Delta||^2 by d_s so that E[H] = ||Delta||^2
    """
    if not delta_norm_sq > 0:
        raise DomainError(f"delta_norm_sq must be > 0, got {delta_norm_sq}")
    if snr is None:
        snr = p.rho / p.sigma_sq if p.sigma_sq > 0 else math.inf
    if snr < 0:
        raise DomainError(f"snr must be >= 0, got {snr}")
    if snr == 0:
        return 0.5

    theta = delta_norm_sq / p.d_s if normalize_distance else delta_norm_sq
    constant = pep_constant(p)
    origin = math.sqrt(theta) * math.exp(ln_gamma(p.d_s + 0.5) - ln_gamma(p.d_s))

    def integrand(u: float) -> float:
        if u == 0:
            return origin
        v = u * u
        sine = expected_sin(v, theta, p.d_s)
        # phi_I <= 1, so a negligible sine term bounds the whole integrand
        if abs(sine) * 2.0 / u < 1e-30:
            return 0.0
        noise = 0.0 if math.isinf(snr) else v / (4.0 * snr)
        return 2.0 / u * math.exp(-noise) * _pep_interference_cf(v, p, constant) * sine

    integral = integrate_dyadic(quad_panel(integrand), 4.0 / math.sqrt(theta),
                                lambda u: abs(integrand(u)) * u, first_exponent=-8)
    value = 0.5 - integral.value / (2.0 * math.pi)
    return _clamp(value, what="APEP")


def asep(
    spectrum: Union[DistanceSpectrum, Codebook],
    p: NetworkParams,
    snr: Union[float, None] = None,
    full_union_bound: bool = False,
    normalize_distance: bool = False,
) -> float:
    """
    Average symbol error probability.

    The default nearest-neighbour form is (1/M) sum_c N_c APEP(Delta_min);
    ``full_union_bound`` sums APEP over all M (M-1) ordered pairs instead.
    """
    if isinstance(spectrum, Codebook):
        spectrum = spectrum.spectrum
    M = len(spectrum.neighbor_count)

    if not full_union_bound:
        pep = apep(spectrum.delta_min_sq, p, snr, normalize_distance)
        return sum(spectrum.neighbor_count) / M * pep

    distances = spectrum.pair_distances[~np.eye(M, dtype=bool)]
    cache: Dict[float, float] = {}
    total = []
    for d in distances:
        key = float(np.round(d, 12))
        if key not in cache:
            cache[key] = apep(float(d), p, snr, normalize_distance)
        total.append(cache[key])
    return math.fsum(total) / M
