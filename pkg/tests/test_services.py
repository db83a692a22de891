import json
import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose
from pandas.testing import assert_frame_equal

from gfscma.core import analytic, netmodel, scma
from gfscma.core.scma import builtin_codebook, save_codebook
from gfscma.data.models import SweepVariable, run_config_from_dict
from gfscma.services import verify_service
from gfscma.services.sweep_service import (ASEP_COLUMNS, PSUC_COLUMNS, apply_sweep, resolve_codebook,
                                           run_asep, run_psuc)
from gfscma.utils.errors import ConfigError
from gfscma.utils.formatters import (format_table_csv, format_verify_report, format_verify_text,
                                     metadata_header, read_table_csv)
from gfscma.utils.metrics import PointMetrics, RunMetrics, timed

LOADED = {"interferer_thinning": "complement", "lambda_u": 3e-5}


def test_apply_sweep_conversions(default_params):
    p = default_params
    assert_allclose(apply_sweep(p, SweepVariable.GAMMA_TH_DB, 0.0).gamma_th, 1.0)
    assert_allclose(netmodel.pilot_intensity(apply_sweep(p, SweepVariable.LAMBDA_U, 2e-5)), 2e-5)
    assert_allclose(apply_sweep(p, SweepVariable.SNR_DB, 30.0).sigma_sq, p.rho / 1000)
    assert_allclose(apply_sweep(p, SweepVariable.RHO_MAX_DBM, 0.0).rho_max, 1e-3)
    widened = apply_sweep(p, SweepVariable.T_OVER_K, 2.0)
    assert widened.J == 12
    assert_allclose(netmodel.pilot_intensity(widened), netmodel.pilot_intensity(p), rtol=1e-12)


def test_apply_sweep_reports_the_sweep_field(default_params):
    with pytest.raises(ConfigError) as excinfo:
        apply_sweep(default_params, SweepVariable.T_OVER_K, 0.75)
    assert excinfo.value.field == "sweep.t_over_k"


def test_resolve_codebook(tmp_path):
    assert resolve_codebook("dense4").name == "dense4"
    path = tmp_path / "mine.cb"
    save_codebook(builtin_codebook("sparse8"), path)
    assert resolve_codebook(str(path)).M == 8


def _psuc_config(**changes):
    data = {"params": LOADED, "sweep": {"start": -10.0, "stop": 0.0, "step": 5.0}}
    data.update(changes)
    return run_config_from_dict(data)


def test_run_psuc_analytic():
    metrics = RunMetrics("psuc")
    frame = run_psuc(_psuc_config(), threads=1, metrics=metrics)
    assert list(frame.columns) == ["gamma_th_db", *PSUC_COLUMNS]
    assert frame["gamma_th_db"].tolist() == [-10.0, -5.0, 0.0]
    assert frame["p_suc_sim"].isna().all() and frame["ci_halfwidth"].isna().all()
    values = frame["p_suc_analytic"].to_numpy()
    assert ((values >= 0) & (values <= 1)).all()
    assert (np.diff(values) <= 1e-9).all()
    assert (frame["ase_analytic"] > 0).all()
    assert metrics.counters["points"] == 3
    assert metrics.counters["integrand_evals"] > 0


def test_run_psuc_is_independent_of_threads():
    cfg = _psuc_config(mode="both", n_real=20, seed=4)
    single = run_psuc(cfg, threads=1)
    pooled = run_psuc(cfg, threads=3)
    assert_frame_equal(single, pooled)
    assert single["p_suc_sim"].between(0, 1).all()
    assert single["ci_halfwidth"].notna().all()


def test_more_tones_help_most_at_low_threshold():
    base = run_config_from_dict({"params": {"interferer_thinning": "complement", "lambda_u": 6e-4}}).params

    def curve(gamma_db):
        p = apply_sweep(base, SweepVariable.GAMMA_TH_DB, gamma_db)
        return [analytic.success_probability(apply_sweep(p, SweepVariable.T_OVER_K, t)).p_suc
                for t in (1.0, 2.0, 4.0, 8.0)]

    low, high = curve(-10.0), curve(0.0)
    for values in (low, high):
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert low[1] - low[0] > high[1] - high[0]
    assert low[3] - low[2] < low[2] - low[0]


@pytest.mark.slow
def test_run_psuc_default_sweep():
    frame = run_psuc(run_config_from_dict({}), threads=2)
    assert len(frame) == 41
    assert (np.diff(frame["p_suc_analytic"].to_numpy()) <= 1e-9).all()


def test_run_asep_over_snr():
    cfg = run_config_from_dict({
        "sweep": {"variable": "snr_db", "start": 0.0, "stop": 30.0, "step": 10.0},
        "codebook": "dense4",
    })
    frame = run_asep(cfg, threads=1)
    assert list(frame.columns) == ["snr_db", *ASEP_COLUMNS]
    values = frame["asep_analytic"].to_numpy()
    assert (values > 0).all()
    assert (np.diff(values) <= 1e-12).all()
    assert frame["asep_sim"].isna().all()


def test_run_asep_rejects_mismatched_codebook():
    cfg = run_config_from_dict({"params": {"K": 8}, "codebook": "sparse4"})
    with pytest.raises(ConfigError) as excinfo:
        run_asep(cfg)
    assert excinfo.value.field == "codebook"


def test_metadata_header_and_csv():
    header = metadata_header("0.1.0", 7, "{\n  \"seed\": 7\n}", revision="abc123")
    assert header[:3] == ["# gfscma 0.1.0", "# git_revision: abc123", "# seed: 7"]
    assert all(line.startswith("#") for line in header)

    table = pd.DataFrame({"x": [1.0, 2.0], "y": [1 / 3, math.nan]})
    text = format_table_csv(table, header)
    assert "0.3333333333" in text
    assert text.splitlines()[-1] == "2,"
    parsed = read_table_csv(text)
    assert parsed["x"].tolist() == [1.0, 2.0]
    assert math.isnan(parsed["y"][1])


def test_verify_reports():
    checks = [
        verify_service.VerifyCheck("scma", "a", True, 0.0, 1.0),
        verify_service.VerifyCheck("scma", "b", False, 2.0, 1.0, "too far"),
    ]
    report = format_verify_report(checks, seed=3)
    assert report["passed"] is False
    assert (report["total"], report["failed"]) == (2, 1)
    assert report["checks"][1]["detail"] == "too far"
    text = format_verify_text(checks)
    assert "FAIL" in text and text.endswith("1/2 checks passed")


def test_run_metrics_report(tmp_path):
    metrics = RunMetrics("asep")
    point = PointMetrics("snr_db", 10.0, 0.0, realizations=5)
    with timed(point):
        pass
    metrics.track_point(point)
    metrics.count("retries")
    path = tmp_path / "out" / "metrics.json"
    metrics.save_report(path)
    report = json.loads(path.read_text())
    assert report["command"] == "asep"
    assert report["counters"] == {"points": 1, "integrand_evals": 0, "realizations": 5, "retries": 1}
    assert report["points"][0]["value"] == 10.0


def test_verify_flags_a_corrupted_codebook(monkeypatch):
    original = scma.builtin_codewords
    monkeypatch.setattr(scma, "builtin_codewords", lambda kind: original(kind) * 1.1)
    monkeypatch.setattr(verify_service, "_montecarlo_checks", lambda seed, threads: [])
    checks = verify_service.run_verify(seed=0, threads=1)
    failed = {f"{c.module}.{c.name}" for c in checks if not c.passed}
    assert "scma.sparse4.unit_power" in failed
    assert all(name.startswith("scma.") for name in failed)


def test_verify_covers_identities_rotation_and_trends():
    checks = (verify_service._specfun_checks(0) + verify_service._scma_checks(0)
              + verify_service._analytic_checks())
    names = {f"{c.module}.{c.name}" for c in checks}
    assert {"specfun.kummer_identity", "specfun.pfaff_identity", "scma.sparse4.rotation_invariant",
            "scma.dense8.rotation_invariant", "analytic.p_suc_monotone_in_threshold",
            "analytic.p_suc_falls_with_overflowing_load", "analytic.p_suc_load_crossing",
            "analytic.apep_monotone_in_snr", "analytic.apep_follows_alpha_in_lambda_b"} <= names
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_verify_flags_an_apep_rising_with_snr(monkeypatch):
    monkeypatch.setattr(analytic, "apep", lambda delta, p, snr=None, normalize_distance=False: float(snr))
    failed = {c.name for c in verify_service._analytic_checks() if not c.passed}
    assert failed == {"apep_monotone_in_snr"}


def test_verify_turns_exceptions_into_failures():
    def broken():
        raise ConfigError("boom")
    checks = verify_service._guarded("netmodel", broken)
    assert len(checks) == 1 and not checks[0].passed
    assert checks[0].detail == "boom"


@pytest.mark.slow
def test_verify_passes():
    checks = verify_service.run_verify(seed=0, threads=2)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
