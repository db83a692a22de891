"""Unit conversion and value validation utilities."""

import math
from typing import Any, Dict

# linear key -> dB twin accepted in config files
DB_TWINS = {
    "rho": "rho_dbm",
    "rho_max": "rho_max_dbm",
    "sigma_sq": "sigma_sq_dbm",
    "gamma_th": "gamma_th_db",
}


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio in dB to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB."""
    if value <= 0:
        raise ValueError(f"Cannot express non-positive ratio {value} in dB")
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm to watts; +inf stays +inf."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Convert watts to dBm."""
    if value_w <= 0:
        raise ValueError(f"Cannot express non-positive power {value_w} W in dBm")
    return 10.0 * math.log10(value_w) + 30.0


def _from_twin(key: str, value: float) -> float:
    return db_to_linear(value) if key == "gamma_th" else dbm_to_watts(value)


def resolve_db_twins(data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Replace dB-valued keys with their linear SI counterparts.

    Args:
        data: Raw parameter mapping as read from a config file

    Returns:
        A new mapping holding only linear keys

    Raises:
        ValueError: If both a linear key and its dB twin are supplied
    """
    resolved = dict(data)
    for key, twin in DB_TWINS.items():
        if twin not in resolved:
            continue
        if key in resolved:
            raise ValueError(f"Supply either '{key}' or '{twin}', not both")
        resolved[key] = _from_twin(key, float(resolved.pop(twin)))
    return resolved


def validate_positive(name: str, value: float, allow_inf: bool = False) -> float:
    """
    Validate a strictly positive scalar.

    Raises:
        ValueError: If the value is non-positive, NaN, or infinite when not allowed
    """
    if math.isnan(value) or value <= 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if math.isinf(value) and not allow_inf:
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def validate_probability(name: str, value: float) -> float:
    """Validate a value in [0, 1]."""
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value
