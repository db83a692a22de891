"""
Special-function kernels used by the analytical formulas.

The gamma family delegates to :mod:`scipy.special` behind domain checks. The
hypergeometric functions are summed from their power series with the
standard transformations that keep the series inside its disc of fast
convergence:

* ``hyp1f1`` applies Kummer's transformation for ``Re z < 0`` and evaluates
  terminating polynomials exactly. Arguments far off the positive real axis,
  where the terms cancel, go to the large-|z| expansion or to exact rational
  summation.
* ``hyp2f1`` applies Pfaff's transformation for ``0.9 <= |z| <= 1.5`` and the
  ``1/z`` connection formula beyond that.

Every public function returns finite values or raises. A floating-point series
whose largest term exceeds its sum by CANCELLATION_LIMIT raises rather than
return a value without accurate digits.
"""

import cmath
import logging
import math
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

from scipy import special

from ..config.settings import (ASYMPTOTIC_SERIES_RTOL, CANCELLATION_LIMIT, HYP1F1_ASYMPTOTIC_RADIUS,
                               SERIES_LOSS_DIGITS, SERIES_RTOL, SERIES_STREAK, TERM_BUDGET)
from ..utils.errors import BranchCutError, ConvergenceError, DomainError

logger = logging.getLogger(__name__)

ComplexValue = complex
Number = Union[int, float, complex]

PFAFF_RADIUS = 0.9
INVERSION_RADIUS = 1.5


def _is_nonpositive_integer(x: float) -> bool:
    return float(x) <= 0 and float(x).is_integer()


def _require_finite(value: complex, name: str) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ConvergenceError(f"{name} produced a non-finite value {value!r}")
    return value


def _compensated_sum(terms: List[complex]) -> complex:
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _hypergeometric_series(
    numer: Sequence[float],
    denom: Sequence[float],
    z: complex,
    max_terms: int,
    name: str,
) -> complex:
    """
    Sum the generalized hypergeometric series pFq(numer; denom; z).

    The running sum is only used by the convergence detector; the returned
    value is the compensated sum of all accepted terms.

    Raises:
        ConvergenceError: If SERIES_STREAK consecutive terms below
            SERIES_RTOL relative are not reached within ``max_terms``, or if
            the largest term exceeds the sum by more than CANCELLATION_LIMIT
    """
    term = complex(1.0)
    terms = [term]
    partial = term
    largest = 1.0
    streak = 0
    for n in range(max_terms):
        ratio = z / (n + 1)
        for a in numer:
            ratio *= a + n
        for b in denom:
            ratio /= b + n
        term *= ratio
        if term == 0:
            # terminating polynomial, or z == 0
            return _compensated_sum(terms)
        if not (math.isfinite(term.real) and math.isfinite(term.imag)):
            raise ConvergenceError(f"{name}: series term overflowed at n={n + 1}")
        terms.append(term)
        partial += term
        largest = max(largest, abs(term))
        if abs(term) < SERIES_RTOL * abs(partial):
            streak += 1
            if streak >= SERIES_STREAK:
                total = _compensated_sum(terms)
                if largest > CANCELLATION_LIMIT * abs(total):
                    raise ConvergenceError(
                        f"{name}: largest term {largest:.3g} against a sum of {abs(total):.3g} "
                        f"(|z|={abs(z):.4g})"
                    )
                return total
        else:
            streak = 0
    raise ConvergenceError(
        f"{name}: series did not converge within {max_terms} terms (|z|={abs(z):.4g})"
    )


def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for x > 0."""
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def lower_incomplete_gamma(s: float, x: float) -> float:
    """
    Lower incomplete gamma function gamma(s, x) = int_0^x t^(s-1) e^(-t) dt.

    Args:
        s: Shape, s > 0
        x: Upper limit, x >= 0 (``math.inf`` gives Gamma(s))

    Raises:
        DomainError: If s <= 0 or x < 0
    """
    if not math.isfinite(s) or s <= 0:
        raise DomainError(f"lower_incomplete_gamma requires s > 0, got {s}")
    if math.isnan(x) or x < 0:
        raise DomainError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    regularized = float(special.gammainc(s, x))
    if regularized == 0.0:
        return 0.0
    return math.exp(math.log(regularized) + ln_gamma(s))


def pochhammer(a: float, q: int) -> float:
    """Rising factorial (a)_q = a (a+1) ... (a+q-1), with (a)_0 = 1."""
    if int(q) != q or q < 0:
        raise DomainError(f"pochhammer requires an integer q >= 0, got {q}")
    return float(math.prod(a + k for k in range(int(q))))


def _rational_series(
    numer: Sequence[float],
    denom: Sequence[float],
    z: complex,
    max_terms: int,
    name: str,
) -> complex:
    """
    pFq(numer; denom; z) summed in exact rational arithmetic.

    Parameters and argument are binary floats, so every partial sum is exact
    and only the final conversion rounds. Used where cancellation would
    destroy a floating-point sum.
    """
    exact_numer = [Fraction(a) for a in numer]
    exact_denom = [Fraction(b) for b in denom]
    z_re, z_im = Fraction(z.real), Fraction(z.imag)
    term_re, term_im = Fraction(1), Fraction(0)
    sum_re, sum_im = Fraction(1), Fraction(0)
    streak = 0
    for n in range(max_terms):
        ratio = Fraction(1, n + 1)
        for a in exact_numer:
            ratio *= a + n
        for b in exact_denom:
            ratio /= b + n
        term_re, term_im = (ratio * (term_re * z_re - term_im * z_im),
                            ratio * (term_re * z_im + term_im * z_re))
        if term_re == 0 and term_im == 0:
            break
        sum_re += term_re
        sum_im += term_im
        if abs(complex(term_re, term_im)) < SERIES_RTOL * abs(complex(sum_re, sum_im)):
            streak += 1
            if streak >= SERIES_STREAK:
                break
        else:
            streak = 0
    else:
        raise ConvergenceError(
            f"{name}: exact series did not converge within {max_terms} terms (|z|={abs(z):.4g})"
        )
    return complex(float(sum_re), float(sum_im))


def _asymptotic_series(p: float, q: float, w: complex, max_terms: int) -> Tuple[complex, float]:
    """Sum of (p)_s (q)_s / s! w^-s up to its smallest term, with that term as error."""
    term = complex(1.0)
    total = term
    for s in range(max_terms):
        following = term * (p + s) * (q + s) / ((s + 1) * w)
        if following == 0:
            return total, 0.0
        if abs(following) >= abs(term):
            return total, abs(term)
        total += following
        term = following
        if abs(term) < SERIES_RTOL * abs(total):
            return total, abs(term)
    return total, abs(term)


def _hyp1f1_asymptotic(a: float, b: float, z: complex, max_terms: int) -> complex:
    # Gamma(b) [e^z z^(a-b) / Gamma(a) S1 + (-z)^(-a) / Gamma(b-a) S2], principal branches
    if z == 0:
        raise DomainError("hyp1f1 asymptotic expansion requires z != 0")
    gamma_b = special.gamma(b)
    first, first_error = _asymptotic_series(b - a, 1 - a, z, max_terms)
    second, second_error = _asymptotic_series(a, a - b + 1, -z, max_terms)
    growing = gamma_b * special.rgamma(a) * cmath.exp(z + (a - b) * cmath.log(z))
    algebraic = gamma_b * special.rgamma(b - a) * cmath.exp(-a * cmath.log(-z))
    value = growing * first + algebraic * second
    error = abs(growing) * first_error + abs(algebraic) * second_error
    if error > ASYMPTOTIC_SERIES_RTOL * abs(value):
        raise ConvergenceError(
            f"hyp1f1: asymptotic expansion error {error:.3g} too large for |z|={abs(z):.4g}"
        )
    return value


def _lost_digits(w: complex) -> float:
    # log10 of the largest term of sum w^n / n! over |e^w|
    return (abs(w) - w.real) / math.log(10.0)


def hyp1f1(
    a: float,
    b: float,
    z: Number,
    max_terms: int = TERM_BUDGET,
    method: str = "auto",
) -> ComplexValue:
    """
    Confluent hypergeometric function 1F1(a; b; z).

    Non-positive integer ``a`` is summed as the exact terminating polynomial.
    Otherwise ``Re z < 0`` is mapped through Kummer's transformation
    1F1(a; b; z) = e^z 1F1(b-a; b; -z), and the series in the mapped
    argument w is summed in floating point while at most SERIES_LOSS_DIGITS
    digits cancel. Further from the positive real axis ``"auto"`` switches to
    the large-|z| expansion for |z| >= HYP1F1_ASYMPTOTIC_RADIUS and to exact
    rational summation inside that radius.

    Args:
        a, b: Real parameters, b not a non-positive integer
        z: Complex argument
        max_terms: Series term budget
        method: ``"auto"``, ``"series"``, ``"exact"`` or ``"asymptotic"``

    Raises:
        DomainError: If b is a non-positive integer or ``method`` is unknown
        ConvergenceError: If the selected method misses tolerance
    """
    if _is_nonpositive_integer(b):
        raise DomainError(f"hyp1f1 requires b not a non-positive integer, got {b}")
    z = complex(z)
    if _is_nonpositive_integer(a):
        value = _hypergeometric_series([a], [b], z, max_terms, "hyp1f1")
        return _require_finite(value, "hyp1f1")

    if z.real < 0:
        w, numer, prefactor = -z, b - a, cmath.exp(z)
    else:
        w, numer, prefactor = z, a, complex(1.0)

    if method == "auto":
        if _lost_digits(w) <= SERIES_LOSS_DIGITS:
            method = "series"
        elif abs(z) >= HYP1F1_ASYMPTOTIC_RADIUS:
            method = "asymptotic"
        else:
            method = "exact"

    if method == "series":
        value = prefactor * _hypergeometric_series([numer], [b], w, max_terms, "hyp1f1")
    elif method == "exact":
        value = prefactor * _rational_series([numer], [b], w, max_terms, "hyp1f1")
    elif method == "asymptotic":
        value = _hyp1f1_asymptotic(a, b, z, max_terms)
    else:
        raise DomainError(f"Unknown hyp1f1 method '{method}'")
    return _require_finite(value, "hyp1f1")


def _hyp2f1_pfaff(a: float, b: float, c: float, z: complex, max_terms: int) -> complex:
    # 2F1(a,b;c;z) = (1-z)^(-b) 2F1(c-a, b; c; z/(z-1))
    w = z / (z - 1)
    return cmath.exp(-b * cmath.log(1 - z)) * _hypergeometric_series(
        [c - a, b], [c], w, max_terms, "hyp2f1[pfaff]"
    )


def _hyp2f1_inverse(a: float, b: float, c: float, z: complex, max_terms: int) -> complex:
    # connection formula in 1/z, valid for |arg(-z)| < pi and b - a not an integer
    log_minus_z = cmath.log(-z)
    coeff_a = special.gamma(c) * special.gamma(b - a) * special.rgamma(b) * special.rgamma(c - a)
    coeff_b = special.gamma(c) * special.gamma(a - b) * special.rgamma(a) * special.rgamma(c - b)
    value = complex(0.0)
    if coeff_a != 0:
        value += coeff_a * cmath.exp(-a * log_minus_z) * _hypergeometric_series(
            [a, a - c + 1], [a - b + 1], 1 / z, max_terms, "hyp2f1[1/z]"
        )
    if coeff_b != 0:
        value += coeff_b * cmath.exp(-b * log_minus_z) * _hypergeometric_series(
            [b, b - c + 1], [b - a + 1], 1 / z, max_terms, "hyp2f1[1/z]"
        )
    return value


def hyp2f1(
    a: float,
    b: float,
    c: float,
    z: Number,
    method: str = "auto",
    max_terms: int = TERM_BUDGET,
) -> ComplexValue:
    """
    Gauss hypergeometric function 2F1(a, b; c; z) on the principal branch.

    Args:
        a, b, c: Real parameters, c not a non-positive integer
        z: Complex argument off the cut [1, inf)
        method: ``"auto"``, ``"direct"``, ``"pfaff"`` or ``"inverse"``
        max_terms: Series term budget

    Returns:
        Complex value of the function

    Raises:
        DomainError: If c is a non-positive integer or ``method`` is unknown
        BranchCutError: If z is real and z >= 1
        ConvergenceError: If the selected series misses tolerance
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"hyp2f1 requires c not a non-positive integer, got {c}")
    z = complex(z)
    if z.imag == 0 and z.real >= 1:
        raise BranchCutError(f"hyp2f1 argument z={z.real} lies on the branch cut [1, inf)")

    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    if method == "auto":
        if terminating or abs(z) < PFAFF_RADIUS:
            method = "direct"
        elif abs(z) <= INVERSION_RADIUS or float(b - a).is_integer():
            method = "pfaff"
        else:
            method = "inverse"

    if method == "direct":
        value = _hypergeometric_series([a, b], [c], z, max_terms, "hyp2f1")
    elif method == "pfaff":
        value = _hyp2f1_pfaff(a, b, c, z, max_terms)
    elif method == "inverse":
        if float(b - a).is_integer():
            raise DomainError("hyp2f1 1/z connection formula requires b - a not an integer")
        value = _hyp2f1_inverse(a, b, c, z, max_terms)
    else:
        raise DomainError(f"Unknown hyp2f1 method '{method}'")
    return _require_finite(value, "hyp2f1")


def hyp1f2(a: float, b1: float, b2: float, z: float, max_terms: int = TERM_BUDGET) -> float:
    """Generalized hypergeometric 1F2(a; b1, b2; z) for real z by direct series."""
    if _is_nonpositive_integer(b1) or _is_nonpositive_integer(b2):
        raise DomainError(f"hyp1f2 requires b1, b2 not non-positive integers, got {b1}, {b2}")
    value = _hypergeometric_series([a], [b1, b2], complex(z), max_terms, "hyp1f2")
    return float(_require_finite(value, "hyp1f2").real)

