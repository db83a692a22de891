"""Command-line front-end: ``gfscma {psuc,ase,asep,simulate,verify}``."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config.settings import THREADS
from .data.models import RunConfig, RunMode, dump_run_config, load_run_config, run_config_from_dict
from .data.validators import linear_to_db, watts_to_dbm
from .services.sweep_service import run_asep, run_psuc
from .services.verify_service import run_verify
from .utils.errors import GfScmaError
from .utils.formatters import format_table_csv, format_verify_report, format_verify_text, metadata_header
from .utils.logging import setup_logging
from .utils.metrics import RunMetrics

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

PILOT_COLLISION_RULES = {
    False: "capacity (the typical UE is served alongside up to J-1 same-pilot contenders)",
    True: "strict (any same-pilot contender in the cell fails the typical UE)",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Master seed (overrides the config)")
    parser.add_argument("--threads", type=int, help="Worker threads (overrides GFSCMA_THREADS)")
    parser.add_argument("--log-level", default=None, help="Logging level (default GFSCMA_LOG_LEVEL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfscma",
        description="Grant-free SCMA success probability, ASE and ASEP in Poisson networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    helps = {
        "psuc": "Sweep the success probability",
        "ase": "Sweep the area spectral efficiency (same table as psuc)",
        "asep": "Sweep the average symbol error probability",
        "simulate": "Sweep the simulated success probability only",
    }
    for name, text in helps.items():
        sub = commands.add_parser(name, help=text)
        _add_common(sub)
        sub.add_argument("--config", type=Path, help="JSON run configuration")
        sub.add_argument("--out", help="CSV output path (default stdout)")
        sub.add_argument("--mode", choices=[m.value for m in RunMode], help="What to compute")
        sub.add_argument("--n-real", type=int, help="Realizations or trials per point")
        sub.add_argument("--codebook", help="Builtin codebook name or codebook file")
        sub.add_argument("--metrics-out", type=Path, help="Write run metrics as JSON")
        if name == "asep":
            continue
        sub.add_argument(
            "--strict-pilot-collision", action="store_true",
            help="Simulation fails the typical UE on any same-pilot contender in its cell. "
                 "Without it the MPA serves up to J-1 contenders on the typical pilot. "
                 "The CSV header records which rule a run used",
        )

    verify = commands.add_parser("verify", help="Run the self-verification suite")
    _add_common(verify)
    verify.add_argument("--json", type=Path, help="Write the report as JSON")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.n_real is not None:
        overrides["n_real"] = args.n_real
    if args.codebook is not None:
        overrides["codebook"] = args.codebook
    if getattr(args, "strict_pilot_collision", False):
        overrides["strict_pilot_collision"] = True
    if args.command == "simulate":
        overrides["mode"] = RunMode.SIMULATE.value
    if not overrides:
        return cfg
    return run_config_from_dict({**cfg.model_dump(), **overrides})


def _header_fields(cfg: RunConfig, command: str) -> Dict[str, str]:
    """Base powers and threshold in dB units, plus the pilot-collision rule of the simulation."""
    p = cfg.params
    fields = {
        "rho_dbm": f"{watts_to_dbm(p.rho):.6g}",
        "rho_max_dbm": f"{watts_to_dbm(p.rho_max):.6g}",
        "sigma_sq_dbm": f"{watts_to_dbm(p.sigma_sq):.6g}" if p.sigma_sq > 0 else "-inf",
        "gamma_th_db": f"{linear_to_db(p.gamma_th):.6g}",
    }
    if command != "asep" and cfg.mode != RunMode.ANALYTIC:
        fields["pilot_collision"] = PILOT_COLLISION_RULES[cfg.strict_pilot_collision]
    return fields


def _run_sweep(args: argparse.Namespace, threads: int) -> int:
    cfg = _resolve_config(args)
    metrics = RunMetrics(args.command)
    if args.command == "asep":
        frame = run_asep(cfg, threads, metrics)
    else:
        frame = run_psuc(cfg, threads, metrics)

    header = metadata_header(__version__, cfg.seed, dump_run_config(cfg),
                             fields=_header_fields(cfg, args.command))
    text = format_table_csv(frame, header)
    if cfg.output:
        path = Path(cfg.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Wrote %d rows to %s", len(frame), path)
    else:
        sys.stdout.write(text)
    if args.metrics_out:
        metrics.save_report(args.metrics_out)
    return EXIT_OK


def _run_verify(args: argparse.Namespace, threads: int) -> int:
    seed = args.seed if args.seed is not None else 0
    checks = run_verify(seed, threads)
    sys.stdout.write(format_verify_text(checks) + "\n")
    if args.json:
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(json.dumps(format_verify_report(checks, seed), indent=2) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    threads = args.threads if args.threads is not None else THREADS
    try:
        if threads < 1:
            raise GfScmaError(f"--threads must be >= 1, got {threads}")
        if args.command == "verify":
            return _run_verify(args, threads)
        return _run_sweep(args, threads)
    except GfScmaError as e:
        print(f"gfscma: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
