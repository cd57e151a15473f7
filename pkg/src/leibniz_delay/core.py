"""State, scalar-field and tensor-field types shared by every other module.

Everything lives on the doubled space R^n x R^n.  A point of it is a
:class:`DelayPair` ``(delayed, current)``; fields on plain R^n are embedded as
fields that only read the current slot.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

__all__ = [
    "DelayPair",
    "ScalarField",
    "TensorField",
    "GradientReport",
    "SymmetryReport",
    "EvaluationError",
    "as_state",
    "finite_diff_gradient",
    "check_gradient",
    "check_symmetry",
    "sample_pairs",
    "SAMPLE_BOX",
]

Slot = Literal["current", "delayed"]
ScalarKind = Literal["current", "delayed", "full"]
SymmetryClass = Literal["skew", "symmetric", "mixed-T11", "general"]
SlotSignature = Literal["current-current", "delayed-current"]

# sampling box for all randomized checks
SAMPLE_BOX = 2.0


class EvaluationError(ArithmeticError):
    """A field produced a non-finite value."""


def as_state(coords, n: int | None = None) -> np.ndarray:
    """Validate and copy a phase-space point into a float array."""
    x = np.array(coords, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"state must be a flat vector, got shape {x.shape}")
    if x.size < 1:
        raise ValueError("state must have at least one coordinate")
    if n is not None and x.size != n:
        raise ValueError(f"expected a state of length {n}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"state has non-finite entries: {x}")
    return x


@dataclass(frozen=True)
class DelayPair:
    """A point (x~, x) of the doubled space; ``delayed`` is x(t - tau)."""

    delayed: np.ndarray
    current: np.ndarray

    def __post_init__(self):
        xd = as_state(self.delayed)
        x = as_state(self.current)
        if xd.size != x.size:
            raise ValueError(
                f"delayed and current states differ in length ({xd.size} vs {x.size})"
            )
        xd.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "delayed", xd)
        object.__setattr__(self, "current", x)

    @property
    def n(self) -> int:
        return self.current.size

    @classmethod
    def unchecked(cls, delayed: np.ndarray, current: np.ndarray) -> "DelayPair":
        """Skip validation; for hot loops that already guarantee finite float vectors."""
        p = object.__new__(cls)
        object.__setattr__(p, "delayed", delayed)
        object.__setattr__(p, "current", current)
        return p

    @classmethod
    def diagonal(cls, x) -> "DelayPair":
        return cls(x, x)

    @classmethod
    def static(cls, x) -> "DelayPair":
        """Pair used when only the current slot matters."""
        return cls(x, x)

    def with_slot(self, slot: Slot, values) -> "DelayPair":
        if slot == "current":
            return DelayPair(self.delayed, values)
        return DelayPair(values, self.current)

    def slot(self, slot: Slot) -> np.ndarray:
        return self.current if slot == "current" else self.delayed


def _zeros_like_grad(xd, x):
    return np.zeros_like(x)


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on R^n x R^n together with both partial gradients.

    The callables take the raw arrays ``(xd, x)``; the public methods take a
    :class:`DelayPair`.  ``kind`` records which slots the function reads:
    a ``"current"`` field has an identically zero delayed gradient.
    """

    n: int
    fn: Callable[[np.ndarray, np.ndarray], float]
    grad_current_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_delayed_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kind: ScalarKind = "full"
    label: str = ""

    @classmethod
    def of_current(cls, n, f, grad, label="") -> "ScalarField":
        """Embed a function of x alone."""
        return cls(
            n,
            lambda xd, x: f(x),
            lambda xd, x: np.asarray(grad(x), dtype=float),
            _zeros_like_grad,
            "current",
            label,
        )

    @classmethod
    def of_delayed(cls, n, f, grad, label="") -> "ScalarField":
        """Pull back a function of x~ alone."""
        return cls(
            n,
            lambda xd, x: f(xd),
            _zeros_like_grad,
            lambda xd, x: np.asarray(grad(xd), dtype=float),
            "delayed",
            label,
        )

    @classmethod
    def zero(cls, n) -> "ScalarField":
        return cls(n, lambda xd, x: 0.0, _zeros_like_grad, _zeros_like_grad, "full", "0")

    def value(self, p: DelayPair) -> float:
        return float(self.fn(p.delayed, p.current))

    __call__ = value

    def grad_current(self, p: DelayPair) -> np.ndarray:
        return np.asarray(self.grad_current_fn(p.delayed, p.current), dtype=float)

    def grad_delayed(self, p: DelayPair) -> np.ndarray:
        return np.asarray(self.grad_delayed_fn(p.delayed, p.current), dtype=float)

    def grad(self, p: DelayPair, slot: Slot) -> np.ndarray:
        return self.grad_current(p) if slot == "current" else self.grad_delayed(p)

    def scaled_gradient(self, factor: float) -> "ScalarField":
        """Same value, gradients multiplied by ``factor`` (for planted-error tests)."""
        gc, gd = self.grad_current_fn, self.grad_delayed_fn
        return ScalarField(
            self.n,
            self.fn,
            lambda xd, x: factor * np.asarray(gc(xd, x)),
            lambda xd, x: factor * np.asarray(gd(xd, x)),
            self.kind,
            self.label,
        )

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        kind = self.kind if self.kind == other.kind else "full"
        return ScalarField(
            self.n,
            lambda xd, x: self.fn(xd, x) + other.fn(xd, x),
            lambda xd, x: np.asarray(self.grad_current_fn(xd, x))
            + np.asarray(other.grad_current_fn(xd, x)),
            lambda xd, x: np.asarray(self.grad_delayed_fn(xd, x))
            + np.asarray(other.grad_delayed_fn(xd, x)),
            kind,
            f"({self.label}+{other.label})",
        )


@dataclass(frozen=True)
class TensorField:
    """An n x n matrix of contravariant components depending on (x~, x).

    ``slots`` says which covectors the two indices pair with:
    ``"current-current"`` tensors act on dx only (first and second index),
    ``"delayed-current"`` tensors have their second index on dx~.
    """

    n: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    symmetry: SymmetryClass = "general"
    slots: SlotSignature = "current-current"
    label: str = ""

    @classmethod
    def zero(cls, n, symmetry: SymmetryClass = "symmetric", slots="current-current"):
        return cls(n, lambda xd, x: np.zeros((n, n)), symmetry, slots, "0")

    @classmethod
    def constant(cls, matrix, symmetry: SymmetryClass = "general", slots="current-current", label=""):
        m = np.array(matrix, dtype=float)
        m.flags.writeable = False
        return cls(m.shape[0], lambda xd, x: m, symmetry, slots, label)

    def __call__(self, p: DelayPair) -> np.ndarray:
        m = np.asarray(self.fn(p.delayed, p.current), dtype=float)
        if m.shape != (self.n, self.n):
            raise ValueError(f"tensor {self.label!r} returned shape {m.shape}, expected {(self.n, self.n)}")
        return m

    evaluate = __call__

    @property
    def is_zero(self) -> bool:
        return self.label == "0"


def _default_step(x: float) -> float:
    return 1e-5 * max(1.0, abs(x))


def finite_diff_gradient(f, p: DelayPair, slot: Slot = "current", step: float | None = None) -> np.ndarray:
    """Central-difference gradient of ``f`` with respect to one slot of ``p``.

    ``f`` is either a :class:`ScalarField` or a callable of a DelayPair.
    ``step=None`` uses ``1e-5 * max(1, |coordinate|)`` per coordinate.
    """
    if step is not None and not step > 0:
        raise ValueError("step must be positive")
    base = p.slot(slot)
    out = np.empty(base.size)
    for i in range(base.size):
        hi = _default_step(base[i]) if step is None else step
        up, dn = base.copy(), base.copy()
        up[i] += hi
        dn[i] -= hi
        fu = f(p.with_slot(slot, up))
        fd = f(p.with_slot(slot, dn))
        if not (np.isfinite(fu) and np.isfinite(fd)):
            raise EvaluationError(f"non-finite value probing {slot} coordinate {i + 1}")
        out[i] = (fu - fd) / (2.0 * hi)
    return out


def sample_pairs(n: int, count: int, rng: np.random.Generator | int | None = 0, box=SAMPLE_BOX):
    """Uniform random points of [-box, box]^n x [-box, box]^n."""
    rng = np.random.default_rng(rng)
    pts = rng.uniform(-box, box, size=(count, 2, n))
    return [DelayPair(a, b) for a, b in pts]


@dataclass
class GradientReport:
    max_rel_error: float
    passed: bool
    worst_point: DelayPair | None = None
    worst_slot: str = ""

    def __bool__(self):
        return self.passed


def check_gradient(f: ScalarField, samples: int = 100, tol: float = 1e-6, seed=0) -> GradientReport:
    """Compare analytic and central-difference gradients at random points.

    The error per point and slot is ``|analytic - fd|_inf / max(|fd|_inf, 1)``,
    i.e. relative for large gradients and absolute near zero.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    worst, worst_p, worst_slot = 0.0, None, ""
    for p in sample_pairs(f.n, samples, seed):
        for slot in ("current", "delayed"):
            analytic = f.grad(p, slot)
            if analytic.shape != (f.n,):
                return GradientReport(np.inf, False, p, slot)
            fd = finite_diff_gradient(f, p, slot)
            err = np.max(np.abs(analytic - fd)) / max(np.max(np.abs(fd)), 1.0)
            if err > worst or worst_p is None:
                worst, worst_p, worst_slot = err, p, slot
    return GradientReport(float(worst), bool(worst <= tol), worst_p, worst_slot)


@dataclass
class SymmetryReport:
    symmetry: str
    max_residual: float
    passed: bool
    notes: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def check_symmetry(T: TensorField, samples: int = 100, tol: float = 1e-12, seed=0) -> SymmetryReport:
    """Verify the declared symmetry class of ``T`` at random points.

    ``mixed-T11`` tensors pair dx with dx~, so the matrix itself need not be
    symmetric; what is checked is ``T(x~, x) == T(x, x~)^T``.  ``general``
    only checks shape and finiteness.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    worst = 0.0
    notes = []
    for p in sample_pairs(T.n, samples, seed):
        m = T(p)
        if not np.all(np.isfinite(m)):
            notes.append("non-finite component")
            worst = np.inf
            continue
        if T.symmetry == "skew":
            r = np.max(np.abs(m + m.T))
        elif T.symmetry == "symmetric":
            r = np.max(np.abs(m - m.T))
        elif T.symmetry == "mixed-T11":
            r = np.max(np.abs(m - T(DelayPair(p.current, p.delayed)).T))
        else:
            r = 0.0
        worst = max(worst, float(r))
    return SymmetryReport(T.symmetry, worst, bool(worst <= tol), notes)
