"""Drift, dissipation and structural-residual measurements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import CatalogEntry
from .core import ScalarField, sample_pairs
from .dde import DenseTrajectory, HistoryFunction, IntegrationConfig, integrate

__all__ = [
    "DriftReport",
    "DissipationReport",
    "ResidualReport",
    "first_integral_drift",
    "dissipation_monitor",
    "structural_residual",
    "drift_refinement_ratio",
]


@dataclass
class DriftReport:
    max_drift: float
    drift_series: np.ndarray
    times: np.ndarray


@dataclass
class DissipationReport:
    times: np.ndarray
    rate: np.ndarray
    trend: str  # "increasing", "decreasing", "constant" or "mixed"


@dataclass
class ResidualReport:
    name: str
    residuals: dict[str, float]
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def failing(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.tol]


def _values_along(traj: DenseTrajectory, f, tau: float) -> np.ndarray:
    """f(x(t - tau), x(t)) at every knot; ``f`` is a ScalarField or (xd, x) callable."""
    if isinstance(f, ScalarField):
        if f.n != traj.n:
            raise ValueError(f"function dimension {f.n} does not match trajectory dimension {traj.n}")
        fn = f.fn
    else:
        fn = f
    if tau != traj.tau:
        delayed = np.array([traj(t - tau) for t in traj.knots])
    else:
        delayed = traj.delayed_states()
    return np.array([float(fn(xd, x)) for xd, x in zip(delayed, traj.states)])


def first_integral_drift(traj: DenseTrajectory, f, tau: float | None = None) -> DriftReport:
    """``max |f(t) - f(t0)|`` over the knots of ``traj``."""
    tau = traj.tau if tau is None else tau
    vals = _values_along(traj, f, tau)
    series = np.abs(vals - vals[0])
    return DriftReport(float(series.max()), series, np.asarray(traj.knots))


def dissipation_monitor(traj: DenseTrajectory, h, tau: float | None = None, tol: float = 1e-12) -> DissipationReport:
    """Finite-difference dh/dt along the knots (centered inside, one-sided at the ends)."""
    tau = traj.tau if tau is None else tau
    vals = _values_along(traj, h, tau)
    t = np.asarray(traj.knots)
    if len(t) < 2:
        return DissipationReport(t, np.zeros_like(vals), "constant")
    # differences of values, so a constant h gives exactly zero
    rate = np.empty_like(vals)
    rate[1:-1] = (vals[2:] - vals[:-2]) / (t[2:] - t[:-2])
    rate[0] = (vals[1] - vals[0]) / (t[1] - t[0])
    rate[-1] = (vals[-1] - vals[-2]) / (t[-1] - t[-2])
    if np.all(np.abs(rate) <= tol):
        trend = "constant"
    elif np.all(rate <= tol):
        trend = "decreasing"
    elif np.all(rate >= -tol):
        trend = "increasing"
    else:
        trend = "mixed"
    return DissipationReport(t, rate, trend)


def structural_residual(entry: CatalogEntry, samples: int = 100, seed=0, tol: float = 1e-12) -> ResidualReport:
    """Worst residual of every declared structural check over seeded random points."""
    pts = sample_pairs(entry.n, samples, seed)
    res = {label: max(float(fn(entry, p)) for p in pts) for label, fn in entry.structural_checks}
    return ResidualReport(entry.name, res, tol)


def drift_refinement_ratio(
    field,
    f,
    phi: HistoryFunction,
    tau: float,
    t_end: float,
    m: int,
) -> tuple[float, float, float]:
    """Drifts at ``m`` and ``2m`` steps per delay and their ratio."""
    coarse = integrate(field, phi, IntegrationConfig(tau, t_end, m))
    fine = integrate(field, phi, IntegrationConfig(tau, t_end, 2 * m))
    d1 = first_integral_drift(coarse, f).max_drift
    d2 = first_integral_drift(fine, f).max_drift
    ratio = d1 / d2 if d2 > 0 else float("inf")
    return d1, d2, ratio
