"""Parameter and run-configuration models."""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, ValidationError, field_validator,
                      model_validator)

from ..config.settings import (C_VORONOI, DEFAULT_D_S, DEFAULT_ETA, DEFAULT_K, DEFAULT_L,
                               DEFAULT_LAMBDA_B, DEFAULT_LAMBDA_U, DEFAULT_M, DEFAULT_P_A,
                               DEFAULT_RHO_DBM, DEFAULT_RHO_MAX_W, DEFAULT_SIGMA_SQ_DBM,
                               DEFAULT_GAMMA_TH_DB, DEFAULT_T, DEFAULT_WINDOW_SIDE)
from ..core.scma import codebook_count
from ..utils.errors import ConfigError, DomainError
from .validators import (db_to_linear, dbm_to_watts, resolve_db_twins, validate_positive,
                         validate_probability)

DEFAULT_J = DEFAULT_L * DEFAULT_T // DEFAULT_K
DEFAULT_LAMBDA_UE = DEFAULT_LAMBDA_U * DEFAULT_J * DEFAULT_L / DEFAULT_P_A


class InterfererThinning(str, Enum):
    """Which fraction of contending UEs the occupancy and inter-cell terms keep."""
    AS_PAPER = "as_paper"  # scale by the truncation outage O_p
    COMPLEMENT = "complement"  # scale by the non-truncated fraction 1 - O_p


class TruncationMoment(str, Enum):
    """Bracket used for the truncated second moment of the serving distance."""
    AS_PAPER = "as_paper"  # 1 - (1 + alpha / (pi lambda_b)) e^-alpha
    CONSISTENT = "consistent"  # 1 - (1 + alpha) e^-alpha


class RunMode(str, Enum):
    """What a sweep computes."""
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    BOTH = "both"


class SweepVariable(str, Enum):
    """Quantities a sweep may vary."""
    GAMMA_TH_DB = "gamma_th_db"
    LAMBDA_U = "lambda_u"
    SNR_DB = "snr_db"
    RHO_MAX_DBM = "rho_max_dbm"
    T_OVER_K = "t_over_k"


class NetworkParams(BaseModel):
    """Every scalar of the network model, in linear SI units."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_b: float = Field(DEFAULT_LAMBDA_B, description="BS intensity (per m^2)")
    lambda_ue: float = Field(DEFAULT_LAMBDA_UE, description="UE intensity (per m^2)")
    p_a: float = Field(DEFAULT_P_A, description="UE activation probability")
    rho: float = Field(dbm_to_watts(DEFAULT_RHO_DBM), description="Target receive power (W)")
    rho_max: float = Field(DEFAULT_RHO_MAX_W, description="Maximum transmit power (W), inf allowed")
    eta: float = Field(DEFAULT_ETA, description="Path-loss exponent, > 2")
    sigma_sq: float = Field(dbm_to_watts(DEFAULT_SIGMA_SQ_DBM), description="Noise power (W)")
    gamma_th: float = Field(db_to_linear(DEFAULT_GAMMA_TH_DB), description="SINR threshold (linear)")
    K: int = Field(DEFAULT_K, ge=1, description="Resource blocks")
    L: int = Field(DEFAULT_L, ge=1, description="Layers")
    T: int = Field(DEFAULT_T, ge=1, description="OFDMA tones")
    M: int = Field(DEFAULT_M, ge=2, description="Codebook cardinality")
    d_s: int = Field(DEFAULT_D_S, gt=1, description="Sparse degree, 1 < d_s <= K")
    c_voronoi: float = Field(C_VORONOI, description="Voronoi occupancy shape constant")
    interferer_thinning: InterfererThinning = Field(InterfererThinning.AS_PAPER)
    truncation_moment: TruncationMoment = Field(TruncationMoment.AS_PAPER)

    @field_validator("lambda_b", "rho", "gamma_th", "c_voronoi")
    @classmethod
    def validate_strictly_positive(cls, v, info):
        return validate_positive(info.field_name, v)

    @field_validator("rho_max")
    @classmethod
    def validate_rho_max(cls, v):
        return validate_positive("rho_max", v, allow_inf=True)

    @field_validator("lambda_ue", "sigma_sq")
    @classmethod
    def validate_non_negative(cls, v, info):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{info.field_name} must be finite and >= 0, got {v}")
        return v

    @field_validator("p_a")
    @classmethod
    def validate_activation(cls, v):
        return validate_probability("p_a", v)

    @field_validator("eta")
    @classmethod
    def validate_eta(cls, v):
        if not math.isfinite(v) or v <= 2:
            raise ValueError(f"eta must be finite and > 2, got {v}")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self) -> "NetworkParams":
        if self.d_s > self.K:
            raise ValueError(f"d_s={self.d_s} cannot exceed K={self.K}")
        try:
            codebook_count(self.L, self.T, self.K)
        except DomainError as e:
            raise ValueError(str(e)) from None
        return self

    @property
    def J(self) -> int:
        return codebook_count(self.L, self.T, self.K)

    @property
    def b(self) -> float:
        return self.eta / 2.0

    def updated(self, **changes: Any) -> "NetworkParams":
        """Validated copy with ``changes`` applied."""
        return NetworkParams.model_validate({**self.model_dump(), **changes})

    def with_lambda_u(self, lambda_u: float) -> "NetworkParams":
        """Copy whose per-pilot contender intensity p_a * lambda_ue / (J L) equals ``lambda_u``."""
        if self.p_a == 0:
            raise DomainError("Cannot set lambda_u when p_a = 0")
        return self.updated(lambda_ue=lambda_u * self.J * self.L / self.p_a)


def params_from_dict(data: Dict[str, Any]) -> NetworkParams:
    """
    Build NetworkParams from a config mapping.

    Accepts dB twins (``rho_dbm``, ``rho_max_dbm``, ``sigma_sq_dbm``,
    ``gamma_th_db``) and ``lambda_u`` in place of ``lambda_ue``.

    Raises:
        ConfigError: Naming the offending field
    """
    try:
        resolved = resolve_db_twins(data)
    except ValueError as e:
        raise ConfigError(str(e), field="params") from None

    if "lambda_u" in resolved:
        if "lambda_ue" in resolved:
            raise ConfigError("Supply either 'lambda_u' or 'lambda_ue', not both", field="lambda_u")
        lambda_u = resolved.pop("lambda_u")
        try:
            base = NetworkParams.model_validate(resolved)
            return base.with_lambda_u(float(lambda_u))
        except ValidationError as e:
            raise _config_error(e) from None
        except DomainError as e:
            raise ConfigError(str(e), field="lambda_u") from None
    try:
        return NetworkParams.model_validate(resolved)
    except ValidationError as e:
        raise _config_error(e) from None


class SweepAxis(BaseModel):
    """Inclusive arithmetic grid over one sweep variable."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: SweepVariable = Field(SweepVariable.GAMMA_TH_DB, description="Swept quantity")
    start: float = Field(-10.0, description="First grid value")
    stop: float = Field(10.0, description="Last grid value (inclusive)")
    step: float = Field(0.5, description="Grid spacing, > 0")

    @field_validator("step")
    @classmethod
    def validate_step(cls, v):
        return validate_positive("step", v)

    @model_validator(mode="after")
    def validate_range(self) -> "SweepAxis":
        if self.stop < self.start:
            raise ValueError(f"stop={self.stop} precedes start={self.start}")
        return self

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        grid = self.start + self.step * np.arange(count)
        return [float(v) for v in np.round(grid, 12)]


class RunConfig(BaseModel):
    """A complete batch run: parameters, sweep, mode and output."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: NetworkParams = Field(default_factory=NetworkParams, description="Network parameters")
    sweep: SweepAxis = Field(default_factory=SweepAxis, description="Sweep axis")
    mode: RunMode = Field(RunMode.ANALYTIC, description="analytic, simulate or both")
    codebook: str = Field("sparse4", description="Builtin codebook name or codebook file path")
    n_real: int = Field(1000, ge=1, description="Realizations (or trials) per simulated point")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="Master seed")
    output: Optional[str] = Field(None, description="CSV output path; stdout when unset")
    snr_db: float = Field(30.0, description="SNR for error-rate runs not sweeping snr_db")
    window_side: float = Field(DEFAULT_WINDOW_SIDE, description="Simulation window side (m)")
    full_union_bound: bool = Field(False, description="Sum APEP over every codeword pair")
    normalize_distance: bool = Field(False, description="Scale distances by 1/d_s in APEP")
    strict_pilot_collision: bool = Field(False, description="Fail the typical UE on any in-cell pilot collision")

    @field_validator("window_side")
    @classmethod
    def validate_window(cls, v):
        return validate_positive("window_side", v)


def _config_error(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or None
    return ConfigError(first["msg"], field=field)


def run_config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a raw config mapping.

    Raises:
        ConfigError: Naming the offending field
    """
    data = dict(data)
    params = params_from_dict(data.pop("params", {}) or {})
    try:
        return RunConfig.model_validate({**data, "params": params})
    except ValidationError as e:
        raise _config_error(e) from None


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Load a JSON run configuration file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}", field="config") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}", field="config") from None
    if not isinstance(data, dict):
        raise ConfigError("top-level JSON value must be an object", field="config")
    return run_config_from_dict(data)


def dump_run_config(cfg: RunConfig) -> str:
    """Serialise to JSON in linear SI form; ``inf`` is written as ``Infinity``."""
    # python-mode dump keeps inf as a float; str enums encode as their values
    return json.dumps(cfg.model_dump(), indent=2, sort_keys=True)
