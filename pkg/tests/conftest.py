"""Shared fixtures."""

import json
import math

import pytest

from gfscma.core.scma import builtin_codebook
from gfscma.data.models import InterfererThinning, NetworkParams


@pytest.fixture
def default_params():
    """Network defaults: J=6, d_s=2, lambda_u=6e-6, gamma_th=-5 dB."""
    return NetworkParams()


@pytest.fixture
def loaded_params():
    """Complement thinning at lambda_u = 3 lambda_b, so cells hold several contenders."""
    p = NetworkParams(interferer_thinning=InterfererThinning.COMPLEMENT)
    return p.with_lambda_u(3 * p.lambda_b)


@pytest.fixture
def quiet_params():
    """No other UEs and no noise: only the typical UE's own signal matters."""
    return NetworkParams(lambda_ue=0.0, sigma_sq=0.0)


@pytest.fixture
def unlimited_params():
    """rho_max = inf, complement thinning, interference-limited."""
    return NetworkParams(rho_max=math.inf, interferer_thinning=InterfererThinning.COMPLEMENT)


@pytest.fixture(params=["sparse4", "dense4"])
def codebook(request):
    return builtin_codebook(request.param)


@pytest.fixture
def config_file(tmp_path):
    """Write a JSON run configuration and return its path."""
    def write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path
    return write
