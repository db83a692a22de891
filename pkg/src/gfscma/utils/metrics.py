"""Run metrics tracking."""

import json
import logging
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Union

import pandas as pd

logger = logging.getLogger(__name__)


@dataclass
class PointMetrics:
    """Cost of one sweep point."""
    variable: str
    value: float
    wall_time: float
    integrand_evals: int = 0
    realizations: int = 0


@dataclass
class RunMetrics:
    """Counters collected over a sweep or a verification run."""
    command: str
    points: List[PointMetrics] = field(default_factory=list)
    counters: Counter = field(default_factory=Counter)

    def track_point(self, point: PointMetrics) -> None:
        self.points.append(point)
        self.counters["points"] += 1
        self.counters["integrand_evals"] += point.integrand_evals
        self.counters["realizations"] += point.realizations

    def count(self, name: str, amount: int = 1) -> None:
        self.counters[name] += amount

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(p) for p in self.points])

    def get_report(self) -> Dict[str, Any]:
        frame = self.to_frame()
        return {
            "command": self.command,
            "counters": dict(self.counters),
            "total_wall_time": float(frame["wall_time"].sum()) if len(frame) else 0.0,
            "points": frame.to_dict(orient="records"),
        }

    def save_report(self, path: Union[str, Path]) -> None:
        """Write the report as JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.get_report(), f, indent=2)
        logger.info("Saved run metrics to %s", path)


@contextmanager
def timed(point: PointMetrics) -> Iterator[PointMetrics]:
    """Fill ``point.wall_time`` with the duration of the block."""
    start = time.perf_counter()
    try:
        yield point
    finally:
        point.wall_time = time.perf_counter() - start
