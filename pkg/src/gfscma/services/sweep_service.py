"""Sweep runners behind the psuc, ase, asep and simulate commands."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from ..config.settings import THREADS
from ..core import analytic, montecarlo, netmodel
from ..core.scma import BUILTIN_DESIGNS, Codebook, builtin_codebook, load_codebook
from ..data.models import NetworkParams, RunConfig, RunMode, SweepVariable
from ..data.validators import db_to_linear, dbm_to_watts
from ..utils.errors import ConfigError, DomainError
from ..utils.logging import log_execution_time
from ..utils.metrics import PointMetrics, RunMetrics, timed

logger = logging.getLogger(__name__)

PSUC_COLUMNS = ("p_suc_analytic", "p_suc_sim", "ci_halfwidth", "ase_analytic")
ASEP_COLUMNS = ("asep_analytic", "asep_sim", "ci_halfwidth")


def apply_sweep(p: NetworkParams, variable: SweepVariable, value: float) -> NetworkParams:
    """
    Parameters of one sweep point; dB quantities are converted here.

    Raises:
        ConfigError: If the point yields invalid parameters
    """
    variable = SweepVariable(variable)
    try:
        if variable == SweepVariable.GAMMA_TH_DB:
            return p.updated(gamma_th=db_to_linear(value))
        if variable == SweepVariable.LAMBDA_U:
            return p.with_lambda_u(value)
        if variable == SweepVariable.SNR_DB:
            return p.updated(sigma_sq=p.rho / db_to_linear(value))
        if variable == SweepVariable.RHO_MAX_DBM:
            return p.updated(rho_max=dbm_to_watts(value))
        widened = p.updated(T=int(round(value * p.K)))
        # more tones at a fixed per-pilot contender intensity
        return widened.with_lambda_u(netmodel.pilot_intensity(p)) if p.p_a > 0 else widened
    except ValidationError as e:
        raise ConfigError(f"{variable.value}={value:g}: {e.errors()[0]['msg']}",
                          field=f"sweep.{variable.value}") from None
    except DomainError as e:
        raise ConfigError(f"{variable.value}={value:g}: {e}", field=f"sweep.{variable.value}") from None


def resolve_codebook(name: str) -> Codebook:
    """A builtin codebook by name, otherwise a codebook file path."""
    if name in BUILTIN_DESIGNS:
        return builtin_codebook(name)
    return load_codebook(Path(name))


def _run_points(
    cfg: RunConfig,
    compute: Callable[[float], Tuple[Dict[str, float], PointMetrics]],
    threads: int,
    metrics: Optional[RunMetrics],
) -> List[Dict[str, float]]:
    """Evaluate every sweep point, concurrently when allowed, in sweep order."""
    values = cfg.sweep.values()
    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute, values))
    else:
        results = [compute(v) for v in values]
    if metrics is not None:
        for _, point in results:
            metrics.track_point(point)
    return [row for row, _ in results]


@log_execution_time
def run_psuc(cfg: RunConfig, threads: int = THREADS, metrics: Optional[RunMetrics] = None) -> pd.DataFrame:
    """
    Success probability and ASE over the configured sweep.

    Args:
        cfg: Validated run configuration
        threads: Worker threads for sweep points
        metrics: Collects per-point cost when given

    Returns:
        One row per sweep point; columns of a mode that did not run are empty
    """
    variable = cfg.sweep.variable.value
    nan = float("nan")

    def compute(value: float) -> Tuple[Dict[str, float], PointMetrics]:
        p = apply_sweep(cfg.params, cfg.sweep.variable, value)
        point = PointMetrics(variable, value, 0.0)
        row = {variable: value, **{c: nan for c in PSUC_COLUMNS}}
        with timed(point):
            if cfg.mode in (RunMode.ANALYTIC, RunMode.BOTH):
                result = analytic.success_probability(p)
                row["p_suc_analytic"] = result.p_suc
                row["ase_analytic"] = analytic.ase(p, result.p_suc)
                point.integrand_evals = result.integrand_evals
            if cfg.mode in (RunMode.SIMULATE, RunMode.BOTH):
                estimate = montecarlo.simulate_success(
                    p, cfg.n_real, cfg.seed, cfg.strict_pilot_collision, cfg.window_side, threads=1
                )
                row["p_suc_sim"] = estimate.value
                row["ci_halfwidth"] = estimate.ci_halfwidth
                point.realizations = estimate.n
        logger.debug("%s=%g done in %.3fs", variable, value, point.wall_time)
        return row, point

    rows = _run_points(cfg, compute, threads, metrics)
    return pd.DataFrame(rows, columns=[variable, *PSUC_COLUMNS])


@log_execution_time
def run_asep(cfg: RunConfig, threads: int = THREADS, metrics: Optional[RunMetrics] = None) -> pd.DataFrame:
    """
    Average symbol error probability over the configured sweep.

    The codebook fixes d_s and M. Unless the sweep varies ``snr_db`` the
    SNR is ``cfg.snr_db``, and sigma^2 follows from it.
    """
    cb = resolve_codebook(cfg.codebook)
    if cb.K != cfg.params.K:
        raise ConfigError(f"codebook '{cb.name}' spans K={cb.K}, params have K={cfg.params.K}",
                          field="codebook")
    base = cfg.params.updated(d_s=cb.d_s, M=cb.M)
    variable = cfg.sweep.variable.value
    nan = float("nan")

    def compute(value: float) -> Tuple[Dict[str, float], PointMetrics]:
        p = apply_sweep(base, cfg.sweep.variable, value)
        if cfg.sweep.variable != SweepVariable.SNR_DB:
            p = apply_sweep(p, SweepVariable.SNR_DB, cfg.snr_db)
        snr = p.rho / p.sigma_sq
        point = PointMetrics(variable, value, 0.0)
        row = {variable: value, **{c: nan for c in ASEP_COLUMNS}}
        with timed(point):
            if cfg.mode in (RunMode.ANALYTIC, RunMode.BOTH):
                row["asep_analytic"] = analytic.asep(cb, p, snr, cfg.full_union_bound,
                                                     cfg.normalize_distance)
            if cfg.mode in (RunMode.SIMULATE, RunMode.BOTH):
                estimate = montecarlo.simulate_asep(p, cb, snr, cfg.n_real, cfg.seed,
                                                    cfg.window_side, threads=1)
                row["asep_sim"] = estimate.value
                row["ci_halfwidth"] = estimate.ci_halfwidth
                point.realizations = estimate.n
        return row, point

    rows = _run_points(cfg, compute, threads, metrics)
    return pd.DataFrame(rows, columns=[variable, *ASEP_COLUMNS])

