"""Per-iteration run records and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["RunLog", "format_value"]


def format_value(v) -> str:
    """Fixed formatting used in every CSV the package writes."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


@dataclass
class RunLog:
    """Header metadata plus one record per executed iteration."""

    dim: int
    header: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    stop_reason: str = "completed"
    best_point: np.ndarray = None
    best_lower: float = float("nan")

    @property
    def columns(self):
        return (["t"] + [f"a_{i}" for i in range(self.dim)]
                + ["y", "f_true", "violation", "B", "beta", "omega", "n_safe",
                   "n_max", "n_exp", "max_lower", "cube_id", "cube_width",
                   "cube_B", "r_used", "branch", "warnings"])

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    @property
    def points(self) -> np.ndarray:
        return np.array([[r[f"a_{i}"] for i in range(self.dim)] for r in self.rows]
                        ).reshape(-1, self.dim)

    @property
    def violations(self) -> int:
        return int(sum(bool(r["violation"]) for r in self.rows))

    def write_csv(self, target) -> None:
        """Write to a path or a text stream."""
        if isinstance(target, (str, Path)):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                self.write_csv(fh)
            return
        target.write(f"# artifact_version = {__version__}\n")
        for key, value in self.header.items():
            for line in str(value).splitlines() or [""]:
                target.write(f"# {key} = {line}\n" if "=" not in line
                             else f"# {key}: {line}\n")
        target.write(f"# stop_reason = {' '.join(self.stop_reason.split())}\n")
        if self.best_point is not None:
            target.write("# best_point = "
                         + " ".join(format_value(float(v)) for v in self.best_point) + "\n")
            target.write(f"# best_lower = {format_value(float(self.best_lower))}\n")
        target.write(",".join(self.columns) + "\n")
        for row in self.rows:
            target.write(",".join(format_value(row[c]) for c in self.columns) + "\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()
