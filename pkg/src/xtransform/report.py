"""Verification results shared by all suites."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass
class InequalitySlack:
    """Both sides of an inequality ``lhs <= rhs`` and the signed slack."""

    lhs: float
    rhs: float
    w: float
    tol: float = 1e-6

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1.0)

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tol * self.relative_scale

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "w": self.w,
                "relative_scale": self.relative_scale}


@dataclass
class VerificationReport:
    """Outcome of a named check.

    ``kind="slack"`` passes when ``worst >= -tolerance``; ``kind="defect"``
    passes when ``abs(worst) <= tolerance``.
    """

    name: str
    params: dict
    samples: int
    worst: float
    tolerance: float
    kind: str = "slack"
    details: list = field(default_factory=list, repr=False)
    details_path: str | None = None

    @property
    def passed(self) -> bool:
        if math.isnan(self.worst):
            return False
        if self.kind == "slack":
            return self.worst >= -self.tolerance
        return abs(self.worst) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "params": self.params,
            "samples": self.samples,
            "kind": self.kind,
            "worst_slack_or_defect": _finite_or_str(self.worst),
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details_path": self.details_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write_details(self, directory, columns=None) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.name}.csv"
        rows = self.details
        columns = columns or (list(rows[0]) if rows else [])
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({c: row.get(c) for c in columns})
        self.details_path = str(path)
        return path


def _finite_or_str(x: float):
    return x if math.isfinite(x) else repr(x)


def merge_slacks(name: str, params: dict, slacks, tolerance: float) -> VerificationReport:
    """Fold per-sample inequality slacks into one report.

    Each slack is normalized by its own relative scale so the report's
    ``worst`` compares directly against ``-tolerance``.
    """
    worst = math.inf
    details = []
    for i, s in enumerate(slacks):
        scaled = s.slack / s.relative_scale
        worst = min(worst, scaled)
        details.append({"sample": i, **s.as_dict(), "scaled_slack": scaled})
    return VerificationReport(name=name, params=params, samples=len(details), worst=worst,
                              tolerance=tolerance, kind="slack", details=details)
