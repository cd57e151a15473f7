"""Constant-delay integration by the method of steps.

Solves ``x'(t) = X(x(t - tau), x(t))`` with ``x = phi`` on ``[-tau, 0]`` using
fixed-step classical RK4.  For ``tau > 0`` the step is ``tau / m``, so every
multiple of tau (where derivative jumps propagate) is a knot and every
delayed lookup lands on an already completed interval.  The solution is kept
as a cubic Hermite dense output.  ``tau == 0`` reduces to a plain ODE solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .brackets import VectorFieldSpec

__all__ = [
    "HistoryFunction",
    "IntegrationConfig",
    "DenseTrajectory",
    "IntegrationError",
    "ConvergenceResult",
    "integrate",
    "eval_trajectory",
    "convergence_order",
    "hermite",
]


class IntegrationError(ArithmeticError):
    """The numerical solution left the finite reals."""

    def __init__(self, t: float, msg: str | None = None):
        self.t = t
        super().__init__(msg or f"non-finite state at t = {t:.6g}")


@dataclass(frozen=True)
class HistoryFunction:
    """Initial data ``phi`` on ``[-tau, 0]``."""

    tau: float
    fn: Callable[[float], np.ndarray]
    description: str = ""

    def __call__(self, t: float) -> np.ndarray:
        if t > 0.0 or t < -self.tau - 1e-12 * max(1.0, self.tau):
            raise ValueError(f"history evaluated at t = {t} outside [{-self.tau}, 0]")
        return np.asarray(self.fn(t), dtype=float)

    @classmethod
    def constant(cls, x0, tau: float = 0.0) -> "HistoryFunction":
        x0 = np.array(x0, dtype=float)
        if not np.all(np.isfinite(x0)):
            raise ValueError("history values must be finite")
        x0.flags.writeable = False
        desc = "constant " + ",".join(repr(float(v)) for v in x0)
        return cls(tau, lambda t: x0, desc)

    @classmethod
    def polynomial(cls, coeffs: Sequence[Sequence[float]], tau: float) -> "HistoryFunction":
        """Per-coordinate polynomials in theta, coefficients in ascending order."""
        cs = [np.array(c, dtype=float) for c in coeffs]
        if not cs or any(c.size == 0 or not np.all(np.isfinite(c)) for c in cs):
            raise ValueError("each coordinate needs at least one finite coefficient")
        desc = "polynomial " + ";".join(" ".join(repr(float(v)) for v in c) for c in cs)
        return cls(
            tau,
            lambda t: np.array([np.polynomial.polynomial.polyval(t, c) for c in cs]),
            desc,
        )


@dataclass(frozen=True)
class IntegrationConfig:
    tau: float
    t_end: float
    steps_per_delay: int = 50
    step: float = 1e-2
    record_every: int = 1

    def __post_init__(self):
        if not (self.tau >= 0.0 and math.isfinite(self.tau)):
            raise ValueError("tau must be a finite number >= 0")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive")
        if int(self.steps_per_delay) != self.steps_per_delay or self.steps_per_delay < 1:
            raise ValueError("steps_per_delay must be an integer >= 1")
        if self.tau == 0.0 and not self.step > 0.0:
            raise ValueError("step must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be an integer >= 1")

    @property
    def h(self) -> float:
        return self.tau / self.steps_per_delay if self.tau > 0 else self.step

    @property
    def n_steps(self) -> int:
        # last knot is the first one at or beyond t_end
        return max(1, math.ceil(self.t_end / self.h - 1e-9))

    def knot_times(self) -> np.ndarray:
        k = np.arange(self.n_steps + 1)
        if self.tau > 0:
            m = self.steps_per_delay
            return (k // m) * self.tau + (k % m) * self.h
        return k * self.h


def hermite(y0, y1, d0, d1, h, s):
    """Cubic Hermite interpolant on an interval of length ``h`` at fraction ``s``."""
    s2, s3 = s * s, s * s * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * h * d0
        + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * h * d1
    )


@dataclass(frozen=True)
class DenseTrajectory:
    """Knots, states and derivatives of a solution with Hermite dense output."""

    tau: float
    knots: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    history: HistoryFunction
    record_every: int = 1
    t0: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def t_last(self) -> float:
        return float(self.knots[-1])

    def __call__(self, t):
        return eval_trajectory(self, t)

    def recorded(self) -> tuple[np.ndarray, np.ndarray]:
        """Every ``record_every``-th knot, always including the last."""
        idx = np.arange(0, len(self.knots), self.record_every)
        if idx[-1] != len(self.knots) - 1:
            idx = np.append(idx, len(self.knots) - 1)
        return self.knots[idx], self.states[idx]

    def delayed_states(self) -> np.ndarray:
        """x(t_k - tau) at every knot (x(t_k) itself when tau == 0)."""
        if self.tau == 0:
            return self.states.copy()
        m = self.meta.get("steps_per_delay")
        if m:
            # knots sit on a grid with m steps per delay, so x(t_k - tau) = x_{k-m}
            out = np.empty_like(self.states)
            out[m:] = self.states[:-m]
            out[:m] = [self.history(t - self.tau) for t in self.knots[:m]]
            return out
        return np.array([eval_trajectory(self, t - self.tau) for t in self.knots])


def _as_rhs(field) -> Callable:
    if isinstance(field, VectorFieldSpec):
        return field.rhs
    if callable(field):
        return field
    raise TypeError("field must be a VectorFieldSpec or a callable (xd, x) -> array")


def integrate(field, phi: HistoryFunction, cfg: IntegrationConfig) -> DenseTrajectory:
    """Fixed-step RK4 method of steps; see the module docstring."""
    rhs = _as_rhs(field)
    tau, h, m = cfg.tau, cfg.h, cfg.steps_per_delay
    N = cfg.n_steps
    t = cfg.knot_times()
    x0 = np.asarray(phi(0.0), dtype=float).reshape(-1)
    n = x0.size
    if isinstance(field, VectorFieldSpec) and field.n != n:
        raise ValueError(f"field dimension {field.n} does not match history dimension {n}")

    X = np.empty((N + 1, n))
    D = np.empty((N + 1, n))
    X[0] = x0

    def delayed(k: int, c: float, stage_state: np.ndarray) -> np.ndarray:
        if tau == 0:
            return stage_state
        j = k - m
        if j + c <= 0:
            return phi(min(0.0, t[k] + c * h - tau))
        if c == 0.0:
            return X[j]
        if c == 1.0:
            return X[j + 1]
        return hermite(X[j], X[j + 1], D[j], D[j + 1], h, c)

    def f(k, c, y):
        if not np.all(np.isfinite(y)):
            raise IntegrationError(float(t[k] + c * h))
        out = np.asarray(rhs(delayed(k, c, y), y), dtype=float)
        if out.shape != (n,):
            raise ValueError(f"field returned shape {out.shape}, expected {(n,)}")
        return out

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(N):
            y = X[k]
            k1 = f(k, 0.0, y)
            D[k] = k1
            k2 = f(k, 0.5, y + 0.5 * h * k1)
            k3 = f(k, 0.5, y + 0.5 * h * k2)
            k4 = f(k, 1.0, y + h * k3)
            X[k + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(X[k + 1])):
                raise IntegrationError(float(t[k + 1]))
        D[N] = f(N, 0.0, X[N])
        if not np.all(np.isfinite(D[N])):
            raise IntegrationError(float(t[N]))

    for a in (X, D, t):
        a.flags.writeable = False
    return DenseTrajectory(tau, t, X, D, phi, cfg.record_every, meta={"steps_per_delay": m if tau > 0 else None})


def eval_trajectory(traj: DenseTrajectory, t):
    """State at time ``t`` (scalar or array) in ``[t0 - tau, last knot]``."""
    if np.ndim(t) > 0:
        return np.array([eval_trajectory(traj, float(s)) for s in np.ravel(t)])
    t = float(t)
    knots = traj.knots
    lo = traj.t0 - traj.tau
    if t < lo - 1e-12 * max(1.0, abs(lo)) or t > knots[-1]:
        raise ValueError(f"t = {t} outside [{lo}, {knots[-1]}]")
    if t <= traj.t0 and traj.tau > 0:
        return traj.history(min(t, 0.0))
    i = int(np.searchsorted(knots, t, side="right")) - 1
    i = min(max(i, 0), len(knots) - 1)
    if knots[i] == t:
        return traj.states[i].copy()
    dt = knots[i + 1] - knots[i]
    s = (t - knots[i]) / dt
    return hermite(traj.states[i], traj.states[i + 1], traj.derivs[i], traj.derivs[i + 1], dt, s)


@dataclass
class ConvergenceResult:
    order: float
    steps: np.ndarray
    errors: np.ndarray

    @property
    def defined(self) -> bool:
        return math.isfinite(self.order)


def convergence_order(
    field,
    phi: HistoryFunction,
    cfgs: Sequence[IntegrationConfig],
    reference: Callable[[float], np.ndarray] | None = None,
) -> ConvergenceResult:
    """Least-squares slope of log(max knot error) against log(step).

    With no ``reference`` the finest configuration serves as the reference
    and is left out of the fit.  If any error is exactly zero the order is
    undefined and reported as NaN.
    """
    if len(cfgs) < 3:
        raise ValueError("need at least three step sizes")
    cfgs = sorted(cfgs, key=lambda c: -c.h)
    trajs = [integrate(field, phi, c) for c in cfgs]
    if reference is None:
        fine = trajs[-1]
        reference = fine.__call__
        trajs, cfgs = trajs[:-1], cfgs[:-1]
        if len(cfgs) < 2:
            raise ValueError("need at least two configurations besides the reference")
    errors = []
    for tr in trajs:
        ref = np.array([reference(tk) for tk in tr.knots])
        errors.append(float(np.max(np.abs(tr.states - ref))))
    steps = np.array([c.h for c in cfgs])
    errors = np.array(errors)
    if np.any(errors == 0.0):
        return ConvergenceResult(float("nan"), steps, errors)
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    return ConvergenceResult(float(slope), steps, errors)
