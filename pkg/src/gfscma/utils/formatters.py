"""Result formatting utilities."""

import subprocess
from io import StringIO
from typing import Any, Dict, Iterable, List, Mapping, Optional

import pandas as pd

from ..config.settings import BASE_DIR, CSV_FLOAT_FORMAT


def git_revision() -> str:
    """Short git revision of the source tree, or ``unknown`` outside a checkout."""
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=BASE_DIR,
                             capture_output=True, text=True, timeout=5, check=True)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def metadata_header(
    version: str,
    seed: int,
    config_json: str,
    revision: Optional[str] = None,
    fields: Optional[Mapping[str, str]] = None,
) -> List[str]:
    """
    ``#``-prefixed header lines echoing what produced a table.

    Args:
        version: Package version
        seed: Master seed of the run
        config_json: Serialised run configuration
        revision: Git revision; looked up when omitted
        fields: Extra ``name: value`` lines written ahead of the configuration

    Returns:
        Header lines without trailing newlines
    """
    lines = [
        f"# gfscma {version}",
        f"# git_revision: {revision if revision is not None else git_revision()}",
        f"# seed: {seed}",
    ]
    lines.extend(f"# {name}: {value}" for name, value in (fields or {}).items())
    lines.append("# config:")
    lines.extend(f"#   {line}" for line in config_json.splitlines())
    return lines


def format_table_csv(frame: pd.DataFrame, header: Iterable[str] = ()) -> str:
    """
    Format a result table as CSV, preceded by ``header`` lines.

    Missing values are written as empty fields.
    """
    body = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n")
    lines = list(header)
    return "\n".join(lines) + ("\n" if lines else "") + body


def read_table_csv(text: str) -> pd.DataFrame:
    """Parse a table written by :func:`format_table_csv`."""
    return pd.read_csv(StringIO(text), comment="#")


def format_verify_report(checks: List[Any], seed: int) -> Dict[str, Any]:
    """Machine-readable verification report."""
    failed = [c for c in checks if not c.passed]
    return {
        "seed": seed,
        "passed": not failed,
        "total": len(checks),
        "failed": len(failed),
        "checks": [
            {
                "module": c.module,
                "name": c.name,
                "passed": bool(c.passed),
                "measured": c.measured,
                "tolerance": c.tolerance,
                "detail": c.detail,
            }
            for c in checks
        ],
    }


def format_verify_text(checks: List[Any]) -> str:
    """Human-readable verification report, one line per check."""
    frame = pd.DataFrame([
        {
            "status": "PASS" if c.passed else "FAIL",
            "check": f"{c.module}.{c.name}",
            "measured": f"{c.measured:.4g}",
            "tolerance": f"{c.tolerance:.4g}",
            "detail": c.detail,
        }
        for c in checks
    ])
    failed = sum(not c.passed for c in checks)
    summary = f"{len(checks) - failed}/{len(checks)} checks passed"
    if frame.empty:
        return summary
    return frame.to_string(index=False) + "\n" + summary
