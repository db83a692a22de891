"""
Dyadic-panel quadrature for semi-infinite integrals.

The half line is split into panels [0, s 2^k0], [s 2^k0, s 2^(k0+1)], ...
where ``s`` is the natural scale of the integrand. Each panel is integrated
with QUADPACK through :func:`scipy.integrate.quad`; panels that hold many
periods of a known oscillation use the weighted (QAWO) rules. Integration
stops once the caller's tail bound and the panel contributions stay below
ENVELOPE_TOL for ENVELOPE_DECADES consecutive panels. Panels are summed in
a fixed order, so results do not depend on scheduling.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple

from scipy import integrate

from ..config.settings import (ENVELOPE_DECADES, ENVELOPE_TOL, FIRST_PANEL_EXPONENT,
                               MAX_PANELS, OSCILLATION_PERIODS, PANEL_FAILURE_TOL,
                               PANEL_TOL, QUAD_LIMIT)
from ..utils.errors import DomainError, ToleranceError, TruncationError

logger = logging.getLogger(__name__)


class PanelEstimate(NamedTuple):
    value: float
    error: float
    evaluations: int


PanelRule = Callable[[float, float], PanelEstimate]


@dataclass
class PanelIntegral:
    """Result of a dyadic-panel integration."""
    value: float
    evaluations: int  # integrand evaluations over all panels
    panels: int
    upper: float  # truncation point of the half line
    max_error: float  # largest error reported by a single panel


def _quad(f: Callable[[float], float], a: float, b: float, **kwargs) -> PanelEstimate:
    result = integrate.quad(f, a, b, limit=QUAD_LIMIT, epsabs=PANEL_TOL, epsrel=PANEL_TOL,
                            full_output=1, **kwargs)
    value, error, info = result[:3]
    return PanelEstimate(float(value), float(error), int(info.get("neval", 0)))


def quad_panel(f: Callable[[float], float]) -> PanelRule:
    """Panel rule for a smooth, non-oscillatory integrand."""
    def rule(a: float, b: float) -> PanelEstimate:
        return _quad(f, a, b)
    return rule


def oscillatory_panel(
    g_cos: Callable[[float], float],
    g_sin: Callable[[float], float],
    frequency: float,
) -> PanelRule:
    """
    Panel rule for g_cos(t) cos(f t) + g_sin(t) sin(f t) with smooth g_cos, g_sin.

    Panels spanning more than OSCILLATION_PERIODS periods use QAWO weights,
    narrower panels integrate the product directly.
    """
    def product(t: float) -> float:
        return g_cos(t) * math.cos(frequency * t) + g_sin(t) * math.sin(frequency * t)

    def rule(a: float, b: float) -> PanelEstimate:
        periods = (b - a) * abs(frequency) / (2 * math.pi)
        if periods <= OSCILLATION_PERIODS:
            return _quad(product, a, b)
        cos_part = _quad(g_cos, a, b, weight="cos", wvar=frequency)
        sin_part = _quad(g_sin, a, b, weight="sin", wvar=frequency)
        return PanelEstimate(cos_part.value + sin_part.value,
                             cos_part.error + sin_part.error,
                             cos_part.evaluations + sin_part.evaluations)
    return rule


def integrate_dyadic(
    rule: PanelRule,
    scale: float,
    tail_bound: Callable[[float], float],
    first_exponent: int = FIRST_PANEL_EXPONENT,
) -> PanelIntegral:
    """
    Integrate over [0, inf) panel by panel.

    Args:
        rule: Integrates the integrand over one panel
        scale: Natural scale of the integration variable
        tail_bound: Bound on the integral beyond t, evaluated at panel ends
        first_exponent: log2 of the first panel width in units of ``scale``

    Returns:
        PanelIntegral with the compensated sum of all panels

    Raises:
        TruncationError: If the tail never decays within MAX_PANELS panels
        ToleranceError: If a panel reports an error above PANEL_FAILURE_TOL
    """
    if not (math.isfinite(scale) and scale > 0):
        raise DomainError(f"Panel scale must be finite and > 0, got {scale}")

    values: List[float] = []
    evaluations = 0
    max_error = 0.0
    streak = 0
    a, b = 0.0, scale * 2.0 ** first_exponent
    for panel in range(1, MAX_PANELS + 1):
        estimate = rule(a, b)
        evaluations += estimate.evaluations
        max_error = max(max_error, estimate.error)
        if not math.isfinite(estimate.value) or estimate.error > PANEL_FAILURE_TOL:
            raise ToleranceError(
                f"Panel [{a:.6g}, {b:.6g}] failed: value={estimate.value!r}, error={estimate.error:.3g}"
            )
        if estimate.error > PANEL_TOL * max(1.0, abs(estimate.value)):
            logger.warning("Panel [%.6g, %.6g] missed tolerance: error %.3g", a, b, estimate.error)
        values.append(estimate.value)

        if tail_bound(b) < ENVELOPE_TOL and abs(estimate.value) < ENVELOPE_TOL:
            streak += 1
            if streak >= ENVELOPE_DECADES:
                return PanelIntegral(math.fsum(values), evaluations, panel, b, max_error)
        else:
            streak = 0
        a, b = b, 2.0 * b

    raise TruncationError(
        f"Integrand tail still above {ENVELOPE_TOL:g} after {MAX_PANELS} panels (t={a:.6g})"
    )
