"""Check and run reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class CheckReport:
    """Outcome of one named check over a set of sample points.

    ``residuals[p]`` is the worst residual at point ``p`` across all
    components; ``components`` maps each sub-identity to its max residual.
    """

    name: str
    points: np.ndarray
    residuals: np.ndarray
    tolerance: float
    verdict: str
    reason: str | None = None
    components: dict[str, float] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        if self.residuals.size == 0:
            return 0.0
        return float(np.max(self.residuals))

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def component(self, key: str) -> float:
        return self.components[key]


def _per_point(values: np.ndarray, npoints: int) -> np.ndarray:
    v = np.abs(np.asarray(values, dtype=float))
    if v.ndim == 0:
        return np.full(npoints, float(v))
    v = v.reshape(v.shape[0], -1)
    if v.shape[1] == 0:
        return np.zeros(v.shape[0])
    return np.max(v, axis=1)


def build_report(
    name: str,
    points,
    components: Mapping[str, np.ndarray],
    tolerance: float,
    details: Mapping[str, object] | None = None,
    reason: str | None = None,
) -> CheckReport:
    """Combine per-point residual arrays into a report.

    Each component is an array whose leading axis indexes points (or a scalar,
    broadcast to every point).  The verdict is pass iff the overall max is
    strictly below ``tolerance``.
    """
    pts = np.asarray(points, dtype=float)
    npoints = pts.shape[0]
    per_point = {k: _per_point(v, npoints) for k, v in components.items()}
    if per_point:
        residuals = np.max(np.stack(list(per_point.values()), axis=0), axis=0)
    else:
        residuals = np.zeros(npoints)
    # NaN must never pass
    residuals = np.where(np.isnan(residuals), np.inf, residuals)
    comp_max = {k: float(np.nanmax(v)) if v.size else 0.0 for k, v in per_point.items()}
    verdict = PASS if (residuals.size == 0 or np.max(residuals) < tolerance) else FAIL
    if verdict == FAIL and reason is None:
        worst = max(comp_max, key=comp_max.get)
        reason = f"component {worst!r} residual {comp_max[worst]:.3g} >= tolerance {tolerance:.3g}"
    return CheckReport(name, pts, residuals, float(tolerance), verdict, reason, comp_max, dict(details or {}))


def skipped_report(name: str, tolerance: float, reason: str, details=None) -> CheckReport:
    return CheckReport(name, np.zeros((0, 0)), np.zeros(0), float(tolerance), SKIPPED, reason, {}, dict(details or {}))


@dataclass
class RunReport:
    scenario: str
    version: str
    seed: int
    checks: list[CheckReport]

    @property
    def overall(self) -> str:
        return FAIL if any(c.verdict == FAIL for c in self.checks) else PASS
