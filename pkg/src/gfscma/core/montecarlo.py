"""
Monte Carlo simulator of the grant-free SCMA network.

Every realization draws its own generator from ``SeedSequence(seed).spawn``,
so estimates depend only on (params, n, seed) and never on the number of
worker threads. Distances wrap around the square window (a torus).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Sequence, TypeVar

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from ..config.settings import CI_Z, DEFAULT_WINDOW_SIDE, THREADS
from ..data.models import InterfererThinning, NetworkParams
from ..utils.errors import DomainError, WindowTooSmallError
from . import netmodel
from .scma import Codebook

logger = logging.getLogger(__name__)

T = TypeVar("T")

# serving distances beyond this quantile are treated as impossible when sizing the window
_SERVING_TAIL = 1e-9


@dataclass(frozen=True)
class MetricEstimate:
    """Sample mean with its 95% confidence half-width."""
    value: float
    ci_halfwidth: float
    n: int
    seed: int

    @classmethod
    def from_samples(cls, samples: Sequence[float], seed: int) -> "MetricEstimate":
        data = np.asarray(samples, dtype=float)
        if data.size == 0:
            raise DomainError("Cannot estimate a metric from zero samples")
        n = int(data.size)
        spread = float(np.std(data, ddof=1)) if n > 1 else 0.0
        return cls(float(math.fsum(data) / n), CI_Z * spread / math.sqrt(n), n, seed)


@dataclass
class Realization:
    """
    One snapshot of the network. Row 0 of the UE arrays is the typical UE.

    ``serving`` indexes ``bs_points``; ``channels`` holds one CN(0, 1) gain
    per UE and resource block.
    """
    bs_points: np.ndarray
    ue_points: np.ndarray
    active: np.ndarray
    pilot: np.ndarray
    codebook: np.ndarray
    truncated: np.ndarray
    serving: np.ndarray
    serving_distance: np.ndarray
    channels: np.ndarray
    window_side: float

    @property
    def typical_bs(self) -> int:
        return int(self.serving[0])


class CellOutcome(NamedTuple):
    """What a realization shows about the typical UE and its cell."""
    success: bool
    contenders: int  # other transmitting UEs of the typical UE's class in its cell
    typical_truncated: bool
    serving_distance: float
    interference: float


def sample_hppp(intensity: float, window_side: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on [0, window_side)^2 as an (n, 2) array."""
    if intensity < 0 or not math.isfinite(intensity):
        raise DomainError(f"intensity must be finite and >= 0, got {intensity}")
    if not window_side > 0:
        raise DomainError(f"window_side must be > 0, got {window_side}")
    count = rng.poisson(intensity * window_side ** 2)
    return rng.uniform(0.0, window_side, size=(count, 2))


def _torus_distance(points: np.ndarray, origin: np.ndarray, side: float) -> np.ndarray:
    delta = np.abs(points - origin)
    delta = np.minimum(delta, side - delta)
    return np.hypot(delta[:, 0], delta[:, 1])


def _check_window(p: NetworkParams, window_side: float) -> None:
    typical_reach = math.sqrt(-math.log(_SERVING_TAIL) / (math.pi * p.lambda_b))
    reach = min(netmodel.truncation_radius(p), typical_reach)
    if reach > window_side / 4:
        raise WindowTooSmallError(
            f"Serving distances up to {reach:.4g} m do not fit a {window_side:.4g} m window "
            "(need at most a quarter of the side)"
        )


def _support_gain(channels: np.ndarray, codebook: np.ndarray, p: NetworkParams) -> np.ndarray:
    """Sum of |h|^2 over each UE's d_s cyclic resource blocks, Gamma(d_s, 1) distributed."""
    columns = (codebook[:, None] % p.K + np.arange(p.d_s)) % p.K
    return np.sum(np.abs(np.take_along_axis(channels, columns, axis=1)) ** 2, axis=1)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_realization(
    p: NetworkParams,
    window_side: float,
    rng: np.random.Generator,
    full_population: bool = False,
) -> Realization:
    """
    Draw BSs, the typical UE and the UEs that matter to it.

    By default only UEs sharing the typical UE's pilot are drawn, at the
    per-pilot intensity lambda_u. With ``full_population`` every potential UE
    is drawn at lambda_ue and marked with an activity flag and a uniform pilot
    in [0, J L); the per-pilot class is then a p_a / (J L) thinning, identical
    in law. Contending UEs are retained with probability O_p under
    ``interferer_thinning=as_paper`` before truncation is applied.
    """
    W = window_side
    bs = sample_hppp(p.lambda_b, W, rng)
    while len(bs) == 0:
        bs = sample_hppp(p.lambda_b, W, rng)

    n_pilots = p.J * p.L
    typical = rng.uniform(0.0, W, size=(1, 2))
    typical_pilot = int(rng.integers(n_pilots))
    if full_population:
        others = sample_hppp(p.lambda_ue, W, rng)
        active = rng.random(len(others)) < p.p_a
        pilots = rng.integers(n_pilots, size=len(others))
    else:
        others = sample_hppp(netmodel.pilot_intensity(p), W, rng)
        active = np.ones(len(others), dtype=bool)
        pilots = np.full(len(others), typical_pilot)

    if p.interferer_thinning == InterfererThinning.AS_PAPER:
        active &= rng.random(len(others)) < netmodel.truncation_outage(p)

    points = np.vstack([typical, others])
    active = np.concatenate([[True], active])
    pilots = np.concatenate([[typical_pilot], pilots]).astype(int)

    tree = cKDTree(bs, boxsize=W)
    distance, serving = tree.query(points)
    distance = np.atleast_1d(distance)
    _, truncated = netmodel.tx_powers(distance, p)
    return Realization(
        bs_points=bs,
        ue_points=points,
        active=active,
        pilot=pilots,
        codebook=pilots // p.L,
        truncated=truncated,
        serving=np.atleast_1d(serving),
        serving_distance=distance,
        channels=_complex_normal(rng, (len(points), p.K)),
        window_side=W,
    )


def evaluate_typical_cell(
    r: Realization,
    p: NetworkParams,
    rng: np.random.Generator,
    strict_pilot_collision: bool = False,
) -> CellOutcome:
    """
    Apply the MPA capacity and SINR rules to the typical UE of ``r``.

    The typical UE and up to J - 1 randomly chosen in-cell contenders are
    decoded; the remaining contenders interfere at receive power rho G.
    Transmitting contenders in other cells interfere at rho R^eta D^-eta G.
    """
    bs_o = r.typical_bs
    gain = _support_gain(r.channels, r.codebook, p)

    same_class = (r.pilot == r.pilot[0]) & r.active & ~r.truncated
    same_class[0] = False
    in_cell = same_class & (r.serving == bs_o)
    out_cell = same_class & (r.serving != bs_o)

    contenders = np.flatnonzero(in_cell)
    n_served = min(len(contenders), p.J - 1)
    order = rng.permutation(contenders)
    served, intra = order[:n_served], order[n_served:]

    D = _torus_distance(r.ue_points[out_cell], r.bs_points[bs_o], r.window_side)
    R = r.serving_distance[out_cell]
    inter = p.rho * math.fsum(np.power(R / D, p.eta) * gain[out_cell])
    interference = p.rho * math.fsum(gain[intra]) + inter

    typical_truncated = bool(r.truncated[0])
    collided = strict_pilot_collision and len(contenders) > 0
    signal = p.rho * (gain[0] + math.fsum(gain[served]))
    sinr = signal / (interference + p.sigma_sq) if interference + p.sigma_sq > 0 else math.inf
    success = (not typical_truncated) and (not collided) and sinr >= p.gamma_th
    return CellOutcome(success, len(contenders), typical_truncated,
                       float(r.serving_distance[0]), interference)


def _map_streams(work: Callable[[np.random.Generator], T], n: int, seed: int, threads: int) -> List[T]:
    """Run ``work`` once per child stream of ``seed``, results in stream order."""
    if n < 1:
        raise DomainError(f"Need at least one realization, got {n}")
    streams = np.random.SeedSequence(seed).spawn(n)

    def run(stream: np.random.SeedSequence) -> T:
        return work(np.random.default_rng(stream))

    if threads <= 1:
        return [run(s) for s in streams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, streams))


def simulate_cells(
    p: NetworkParams,
    n_real: int,
    seed: int,
    window_side: float = DEFAULT_WINDOW_SIDE,
    strict_pilot_collision: bool = False,
    full_population: bool = False,
    threads: int = THREADS,
) -> List[CellOutcome]:
    """Typical-cell outcome of ``n_real`` independent realizations."""
    _check_window(p, window_side)

    def work(rng: np.random.Generator) -> CellOutcome:
        r = sample_realization(p, window_side, rng, full_population)
        return evaluate_typical_cell(r, p, rng, strict_pilot_collision)

    return _map_streams(work, n_real, seed, threads)


def simulate_success(
    p: NetworkParams,
    n_real: int,
    seed: int,
    strict_pilot_collision: bool = False,
    window_side: float = DEFAULT_WINDOW_SIDE,
    full_population: bool = False,
    threads: int = THREADS,
) -> MetricEstimate:
    """
    Fraction of realizations in which the typical UE succeeds.

    Truncated typical UEs count as failures.

    Raises:
        WindowTooSmallError: If serving distances could reach a quarter of the window
    """
    outcomes = simulate_cells(p, n_real, seed, window_side, strict_pilot_collision,
                              full_population, threads)
    estimate = MetricEstimate.from_samples([float(o.success) for o in outcomes], seed)
    logger.debug("Simulated P_suc=%.5f +/- %.5f over %d realizations",
                 estimate.value, estimate.ci_halfwidth, n_real)
    return estimate


def serving_distances(p: NetworkParams, n_real: int, seed: int,
                      window_side: float = DEFAULT_WINDOW_SIDE, threads: int = THREADS) -> np.ndarray:
    """Distance from the typical UE to its nearest BS, one per realization."""
    outcomes = simulate_cells(p, n_real, seed, window_side, threads=threads)
    return np.array([o.serving_distance for o in outcomes])


def occupancy_histogram(p: NetworkParams, n_real: int, seed: int,
                        window_side: float = DEFAULT_WINDOW_SIDE, threads: int = THREADS) -> np.ndarray:
    """Counts of |U_in| = u over realizations, indexed by u."""
    outcomes = simulate_cells(p, n_real, seed, window_side, threads=threads)
    return np.bincount([o.contenders for o in outcomes])


def occupancy_fit(p: NetworkParams, n_real: int, seed: int,
                  window_side: float = DEFAULT_WINDOW_SIDE, threads: int = THREADS) -> float:
    """
    Chi-square p-value of the simulated |U_in| histogram against occupancy_pmf.

    Values u with n P(u) >= 5 keep their own bin; the law is unimodal, so the
    remaining support pools into one bin below them and one above.

    Raises:
        DomainError: If fewer than two values reach the expected count of 5
    """
    counts = occupancy_histogram(p, n_real, seed, window_side, threads)
    pmf = netmodel.occupancy_pmf_table(p).pmf
    size = max(len(counts), len(pmf))
    observed = np.zeros(size)
    observed[:len(counts)] = counts
    expected = np.zeros(size)
    expected[:len(pmf)] = n_real * np.asarray(pmf)

    kept = np.flatnonzero(expected >= 5.0)
    if kept.size < 2:
        raise DomainError(f"{n_real} realizations are too few to bin the occupancy law")
    lo, hi = int(kept[0]), int(kept[-1]) + 1
    observed_bins = list(observed[lo:hi])
    expected_bins = list(expected[lo:hi])
    if lo > 0:
        observed_bins.insert(0, observed[:lo].sum())
        expected_bins.insert(0, expected[:lo].sum())
    observed_bins.append(n_real - math.fsum(observed_bins))
    expected_bins.append(n_real - math.fsum(expected_bins))
    # a sparse pooled bin joins its neighbour
    for edge, neighbour in ((0, 1), (-1, -2)):
        if expected_bins[edge] < 5.0:
            observed_bins[neighbour] += observed_bins[edge]
            expected_bins[neighbour] += expected_bins[edge]
            del observed_bins[edge], expected_bins[edge]
    return float(stats.chisquare(observed_bins, expected_bins).pvalue)


def neighbour_counts(
    p: NetworkParams,
    radii: Sequence[float],
    n_real: int,
    seed: int,
    window_side: float = DEFAULT_WINDOW_SIDE,
    full_population: bool = False,
    threads: int = THREADS,
) -> np.ndarray:
    """
    Non-typical UEs per ring around the typical UE, one row per realization.

    Ring k spans [radii[k-1], radii[k]) with an implicit inner radius of 0.
    Drawn UEs are counted whether or not they transmit, so each ring holds a
    Poisson number with mean (lambda_u, or lambda_ue under ``full_population``)
    times its area when conditioning on the typical UE leaves the rest of the
    process untouched.

    Raises:
        DomainError: If the radii are not increasing and positive, or the
            outer ring leaves the half window
    """
    edges = np.concatenate([[0.0], np.asarray(radii, dtype=float)])
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError(f"radii must be positive and increasing, got {list(radii)}")
    if edges[-1] > window_side / 2:
        raise DomainError(f"outer radius {edges[-1]:.6g} m exceeds half the {window_side:g} m window")
    _check_window(p, window_side)

    def work(rng: np.random.Generator) -> np.ndarray:
        r = sample_realization(p, window_side, rng, full_population)
        distance = _torus_distance(r.ue_points[1:], r.ue_points[0], window_side)
        counts, _ = np.histogram(distance, bins=edges)
        return counts

    return np.vstack(_map_streams(work, n_real, seed, threads))


def truncation_fraction(p: NetworkParams, n_real: int, seed: int,
                        window_side: float = DEFAULT_WINDOW_SIDE, threads: int = THREADS) -> MetricEstimate:
    """Fraction of realizations whose typical UE is in truncation outage."""
    outcomes = simulate_cells(p, n_real, seed, window_side, threads=threads)
    return MetricEstimate.from_samples([float(o.typical_truncated) for o in outcomes], seed)


def interference_samples(p: NetworkParams, n_real: int, seed: int,
                         window_side: float = DEFAULT_WINDOW_SIDE, threads: int = THREADS) -> np.ndarray:
    """Total interference at the typical BS, one sample per realization."""
    outcomes = simulate_cells(p, n_real, seed, window_side, threads=threads)
    return np.array([o.interference for o in outcomes])


def empirical_cf(samples: Sequence[float], omega: float) -> complex:
    """(1/n) sum exp(j omega x)."""
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise DomainError("empirical_cf needs at least one sample")
    return complex(np.mean(np.exp(1j * omega * data)))


def _truncated_rayleigh(rng: np.random.Generator, size: int, lambda_b: float, radius: float) -> np.ndarray:
    """Nearest-BS distances conditioned on not exceeding ``radius``."""
    scale = math.pi * lambda_b
    cap = -math.expm1(-scale * radius ** 2) if math.isfinite(radius) else 1.0
    u = rng.random(size) * cap
    return np.sqrt(-np.log1p(-u) / scale)


def _error_trial(p: NetworkParams, cb: Codebook, sigma_sq: float, window_side: float,
                 rng: np.random.Generator) -> float:
    W = window_side
    centre = np.array([W / 2.0, W / 2.0])
    bs = sample_hppp(p.lambda_b, W, rng)
    D = _torus_distance(bs, centre, W)
    bs = bs[D > 0]
    D = D[D > 0]

    R = _truncated_rayleigh(rng, len(bs), p.lambda_b, netmodel.truncation_radius(p))
    angle = rng.uniform(0.0, 2.0 * math.pi, len(bs))
    # interferer position relative to its BS, measured back to BS_o
    offset = bs - centre + R[:, None] * np.column_stack([np.cos(angle), np.sin(angle)])
    offset -= W * np.round(offset / W)
    D_i = np.hypot(offset[:, 0], offset[:, 1])
    keep = D_i > R
    amplitude = np.sqrt(p.rho * np.power(R[keep] / D_i[keep], p.eta))

    sent = int(rng.integers(cb.M))
    h_o = _complex_normal(rng, p.K)
    y = math.sqrt(p.rho) * cb.codewords[sent] * h_o
    if amplitude.size:
        symbols = cb.codewords[rng.integers(cb.M, size=amplitude.size)]
        h_i = _complex_normal(rng, (amplitude.size, p.K))
        y = y + np.sum(amplitude[:, None] * symbols * h_i, axis=0)
    if sigma_sq > 0:
        y = y + math.sqrt(sigma_sq) * _complex_normal(rng, p.K)

    metric = np.sum(np.abs(y - math.sqrt(p.rho) * cb.codewords * h_o) ** 2, axis=1)
    return float(int(np.argmin(metric)) != sent)


def simulate_asep(
    p: NetworkParams,
    cb: Codebook,
    snr: float,
    n_trials: int,
    seed: int,
    window_side: float = DEFAULT_WINDOW_SIDE,
    threads: int = THREADS,
) -> MetricEstimate:
    """
    Symbol error rate of maximum-likelihood detection at BS_o.

    BS_o sits at the window centre. Each other BS serves exactly one UE on the
    typical UE's codebook, placed at a truncated-Rayleigh distance R_i from it
    and dropped when it lands closer to BS_o than to its own BS. The receiver
    knows the typical UE's channel only.

    Args:
        snr: rho / sigma^2, linear; ``inf`` removes noise
    """
    if cb.K != p.K:
        raise DomainError(f"Codebook spans {cb.K} resource blocks, network has K={p.K}")
    if snr < 0:
        raise DomainError(f"snr must be >= 0, got {snr}")
    _check_window(p, window_side)
    sigma_sq = 0.0 if math.isinf(snr) else (p.rho / snr if snr > 0 else math.inf)
    if math.isinf(sigma_sq):
        # noise swamps the signal: detection is a uniform guess
        def work(rng: np.random.Generator) -> float:
            return float(rng.integers(cb.M) != 0)
    else:
        def work(rng: np.random.Generator) -> float:
            return _error_trial(p, cb, sigma_sq, window_side, rng)

    estimate = MetricEstimate.from_samples(_map_streams(work, n_trials, seed, threads), seed)
    logger.debug("Simulated ASEP=%.5g +/- %.3g over %d trials", estimate.value, estimate.ci_halfwidth, n_trials)
    return estimate
