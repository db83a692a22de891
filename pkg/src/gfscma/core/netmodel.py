"""
Closed-form network quantities shared by the analysis and the simulator:
truncated channel-inversion power control, truncation outage and the
negative-binomial occupancy law of the typical Voronoi cell.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from ..config.settings import PMF_MAX_TERMS, PMF_TAIL_MASS
from ..data.models import InterfererThinning, NetworkParams
from ..utils.errors import DomainError

logger = logging.getLogger(__name__)


class OccupancyTable(NamedTuple):
    """Occupancy PMF truncated where the surviving tail drops below PMF_TAIL_MASS."""
    pmf: np.ndarray  # P{|U_in| = u} for u = 0 .. len(pmf) - 1
    tail_mass: float  # P{|U_in| >= len(pmf)}


def pilot_intensity(p: NetworkParams) -> float:
    """Intensity of active UEs sharing one pilot, lambda_u = p_a lambda_ue / (J L)."""
    return p.p_a * p.lambda_ue / (p.J * p.L)


def truncation_radius(p: NetworkParams) -> float:
    """Largest serving distance at which a UE still transmits, (rho_m / rho)^(1/eta)."""
    if math.isinf(p.rho_max):
        return math.inf
    return (p.rho_max / p.rho) ** (1.0 / p.eta)


def alpha(p: NetworkParams) -> float:
    """alpha = pi lambda_b (rho_m / rho)^(1/b), the mean BS count inside the truncation disc."""
    radius = truncation_radius(p)
    return math.inf if math.isinf(radius) else math.pi * p.lambda_b * radius ** 2


def tx_power(R: float, p: NetworkParams) -> Optional[float]:
    """
    Transmit power under truncated full channel inversion.

    Returns:
        rho * R^eta, or None when that exceeds rho_max (the UE is truncated
        and stays silent)
    """
    if R < 0:
        raise DomainError(f"tx_power requires R >= 0, got {R}")
    power = p.rho * R ** p.eta
    return power if power <= p.rho_max else None


def tx_powers(R: np.ndarray, p: NetworkParams):
    """Vectorised tx_power: (powers, truncated mask); truncated entries hold 0."""
    powers = p.rho * np.power(np.asarray(R, dtype=float), p.eta)
    truncated = powers > p.rho_max
    return np.where(truncated, 0.0, powers), truncated


def truncation_outage(p: NetworkParams) -> float:
    """O_p = exp(-alpha)."""
    return math.exp(-alpha(p))


def occupancy_beta(p: NetworkParams) -> float:
    """Occupancy scale beta = q lambda_u / (c lambda_b), q per the interferer-thinning switch."""
    outage = truncation_outage(p)
    kept = outage if p.interferer_thinning == InterfererThinning.AS_PAPER else 1.0 - outage
    return kept * pilot_intensity(p) / (p.c_voronoi * p.lambda_b)


def _occupancy_law(beta: float, c: float):
    return stats.nbinom(c + 1.0, 1.0 / (1.0 + beta))


def occupancy_pmf(u: int, p: NetworkParams) -> float:
    """
    P{|U_in| = u} = Gamma(u+c+1) / (Gamma(c+1) u!) beta^u (1+beta)^-(u+c+1).

    The negative binomial with shape c+1, whose generating function is
    [1 + beta (1 - x)]^(-c-1).
    """
    if u < 0 or int(u) != u:
        raise DomainError(f"occupancy_pmf requires an integer u >= 0, got {u}")
    beta = occupancy_beta(p)
    if beta == 0:
        return 1.0 if u == 0 else 0.0
    return float(_occupancy_law(beta, p.c_voronoi).pmf(int(u)))


def occupancy_pmf_table(p: NetworkParams) -> OccupancyTable:
    """PMF vector up to the point where the tail mass falls below PMF_TAIL_MASS."""
    beta = occupancy_beta(p)
    if beta == 0:
        return OccupancyTable(np.ones(1), 0.0)
    law = _occupancy_law(beta, p.c_voronoi)
    u_max = int(law.isf(PMF_TAIL_MASS))
    if u_max + 1 > PMF_MAX_TERMS:
        logger.warning("Occupancy PMF truncated at %d terms (beta=%.4g); tail mass %.3g dropped",
                       PMF_MAX_TERMS, beta, float(law.sf(PMF_MAX_TERMS - 1)))
        u_max = PMF_MAX_TERMS - 1
    support = np.arange(u_max + 1)
    return OccupancyTable(law.pmf(support), float(law.sf(u_max)))


def occupancy_at_least(j: int, p: NetworkParams) -> float:
    """P{|U_in| >= j}."""
    if j <= 0:
        return 1.0
    beta = occupancy_beta(p)
    if beta == 0:
        return 0.0
    return float(_occupancy_law(beta, p.c_voronoi).sf(j - 1))


def mean_served(p: NetworkParams) -> float:
    """
    Mean number of served UEs, 1 + E[min(|U_in|, J-1)].

    Args:
        p: Network parameters

    Returns:
        U_bar in [1, J]
    """
    J = p.J
    head = np.array([occupancy_pmf(u, p) for u in range(1, J)])
    served = 1.0 + float(np.dot(head, np.arange(1, J))) if J > 1 else 1.0
    return served + (J - 1) * occupancy_at_least(J, p)


def serving_distance_cdf(r: float, lambda_b: float) -> float:
    """Rayleigh CDF of the nearest-BS distance, 1 - exp(-pi lambda_b r^2)."""
    if r <= 0:
        return 0.0
    return -math.expm1(-math.pi * lambda_b * r * r)
