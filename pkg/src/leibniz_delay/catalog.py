"""Named, parameterized constructors for the concrete systems.

Every entry bundles a wired :class:`VectorFieldSpec`, its parameters, the
functions expected to stay constant along solutions, and a list of named
structural residuals that should vanish identically.
"""
from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import printed
from .brackets import VectorFieldSpec
from .core import DelayPair, ScalarField, TensorField
from .revisit import (
    annihilated_vector,
    annihilation_residual,
    build_revisited_system,
)

__all__ = [
    "CatalogEntry",
    "ConstraintError",
    "UnknownSystemError",
    "CATALOG",
    "get_entry",
    "list_entries",
    "perturbed",
    "cross_matrix",
    "three_wave",
    "rigid_body",
    "landau_lifschitz",
    "revisited_rigid_body",
    "rigid_body_delay_one_direction",
    "rigid_body_delay_all_directions",
    "three_wave_delay",
    "revisited_rigid_body_delay",
    "mixed_delay_rigid_body",
    "revisited_mixed_delay_rigid_body",
]

DEFAULT_A = (0.6, 0.4, 0.2)
DEFAULT_S = (1.0, 1.0, 1.0)
DEFAULT_GAMMA = (1.0, 1.0, -2.0)

Check = Callable[["CatalogEntry", DelayPair], float]


class ConstraintError(ValueError):
    """Parameters violate a declared constraint."""


class UnknownSystemError(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    n: int
    spec: VectorFieldSpec
    parameters: dict[str, float]
    invariant_functions: list[tuple[str, ScalarField]] = field(default_factory=list)
    structural_checks: list[tuple[str, Check]] = field(default_factory=list)
    diagnostics: list[tuple[str, Callable]] = field(default_factory=list)
    printed_field: Callable | None = None
    description: str = ""
    # (P, h1, h2, mode) fed to the revisited-system builder, when meaningful
    revisit_inputs: tuple | None = None
    # printed (field, metric) of the revisited system built from revisit_inputs
    revisited_display: tuple | None = None

    @property
    def is_delay(self) -> bool:
        return self.spec.is_delay

    def field(self, p: DelayPair) -> np.ndarray:
        return self.spec(p)

    def rhs(self, xd, x) -> np.ndarray:
        return self.spec.rhs(xd, x)

    def tensors(self) -> list[tuple[str, TensorField]]:
        return [("P", self.spec.P), ("g", self.spec.g)]


def cross_matrix(v) -> np.ndarray:
    """Matrix M(v) with M(v) w = w x v; the rigid-body Poisson tensor at v."""
    return np.array([
        [0.0, v[2], -v[1]],
        [-v[2], 0.0, v[0]],
        [v[1], -v[0], 0.0],
    ])


def _field_matches(display) -> Check:
    def check(entry, p):
        return float(np.max(np.abs(entry.field(p) - display(p.delayed, p.current))))

    return check


def _derivative_vanishes(f: ScalarField) -> Check:
    """X(f) computed with the current-slot gradient (X has no dx~ part)."""
    def check(entry, p):
        return abs(float(f.grad_current(p) @ entry.field(p)))

    return check


def _on_diagonal(static_field: Callable[[np.ndarray], np.ndarray]) -> Check:
    def check(entry, p):
        q = DelayPair(p.current, p.current)
        return float(np.max(np.abs(entry.field(q) - static_field(p.current))))

    return check


def _annihilates(vector: Callable[[DelayPair], np.ndarray]) -> Check:
    def check(entry, p):
        return annihilation_residual(entry.spec.g, vector(p), p)

    return check


def _tensor_matches(which: str, display) -> Check:
    def check(entry, p):
        T = getattr(entry.spec, which)
        return float(np.max(np.abs(T(p) - display(p.delayed, p.current))))

    return check


def _quadratic(weights, label) -> ScalarField:
    w = np.asarray(weights, float)
    return ScalarField.of_current(3, lambda x: 0.5 * float(w @ (x * x)), lambda x: w * x, label)


def _a(a1, a2, a3, warn=True):
    a = (float(a1), float(a2), float(a3))
    if warn and len(set(a)) < 3:
        warnings.warn(f"rigid-body parameters should be pairwise distinct, got {a}", stacklevel=3)
    return a


def _zero_T11(n=3):
    return TensorField.zero(n, "general", "delayed-current")


def _skew_P(fn, label):
    return TensorField(3, fn, "skew", "current-current", label)


# -- static systems ----------------------------------------------------------


def three_wave(s1=1.0, s2=1.0, s3=1.0, g1=1.0, g2=1.0, g3=-2.0) -> CatalogEntry:
    """Gradient flow of h = x1 x2 x3 for the constant metric diag(s_i gamma_i).

    The stored components are contravariant, so X^i = s_i gamma_i dh/dx^i.
    """
    s = np.array([s1, s2, s3], float)
    gam = np.array([g1, g2, g3], float)
    if not np.all(np.isin(s, (-1.0, 1.0))):
        raise ConstraintError(f"s must have entries in {{-1, 1}}, got {s.tolist()}")
    if np.any(gam == 0.0):
        raise ConstraintError("every gamma must be nonzero")
    if abs(gam.sum()) > 1e-12:
        raise ConstraintError(f"gamma must sum to zero, got {gam.sum():.3e}")
    c = s * gam
    g = TensorField.constant(np.diag(c), "symmetric", label="three-wave metric")
    h = ScalarField.of_current(
        3,
        lambda x: float(x[0] * x[1] * x[2]),
        lambda x: np.array([x[1] * x[2], x[0] * x[2], x[0] * x[1]]),
        "x1*x2*x3",
    )
    spec = VectorFieldSpec(3, TensorField.zero(3, "skew"), g, h, h, "static-leibniz")

    def manley_rowe(i, j):
        w = np.zeros(3)
        w[i], w[j] = 1.0 / c[i], -1.0 / c[j]
        return (f"I{i + 1}{j + 1}", _quadratic(2 * w, f"x{i + 1}^2/c{i + 1} - x{j + 1}^2/c{j + 1}"))

    return CatalogEntry(
        "three-wave",
        3,
        spec,
        dict(s1=s1, s2=s2, s3=s3, g1=g1, g2=g2, g3=g3),
        invariant_functions=[manley_rowe(0, 1), manley_rowe(0, 2)],
        structural_checks=[("field = printed system", _field_matches(printed.three_wave_field(s, gam)))],
        description="three-wave interaction as a gradient system",
    )


def rigid_body(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    a = _a(a1, a2, a3)
    P = _skew_P(lambda xd, x: cross_matrix(x), "rigid-body P")
    h1 = _quadratic(a, "energy")
    h2 = _quadratic((1.0, 1.0, 1.0), "casimir")
    spec = VectorFieldSpec(3, P, TensorField.zero(3), h1, h1, "static-leibniz")

    def casimir(entry, p):
        return float(np.max(np.abs(entry.spec.P(p) @ p.current)))

    return CatalogEntry(
        "rigid-body",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        invariant_functions=[("h1", h1), ("h2", h2)],
        structural_checks=[
            ("field = printed system", _field_matches(printed.rigid_body_field(a))),
            ("P x = 0", casimir),
        ],
        description="free rigid body, Poisson form",
        revisit_inputs=(P, h1, h2, "static"),
        revisited_display=(printed.revisited_rigid_body_field(a), printed.rigid_body_metric_table(a)),
    )


def landau_lifschitz(gamma=1.0, lam=0.5, B1=0.0, B2=0.0, B3=1.0) -> CatalogEntry:
    """Magnetization dynamics x' = gamma x*B + lam/|x|^2 x*(x*B).

    Built from the bracket P(df, dh) + lam/(gamma |x|^2) (x*df).(x*dh) with
    P the rigid-body tensor.  With Hamiltonian -gamma B.x the generated field
    is exactly the closed form above; +gamma B.x would reverse it.
    """
    if gamma == 0.0:
        raise ConstraintError("gamma must be nonzero")
    B = np.array([B1, B2, B3], float)
    ratio = lam / gamma

    def gram(xd, x):
        r2 = float(x @ x)
        if r2 == 0.0:
            raise ZeroDivisionError("Landau-Lifschitz field is undefined at x = 0")
        return ratio / r2 * (r2 * np.eye(3) - np.outer(x, x))

    P = _skew_P(lambda xd, x: cross_matrix(x), "rigid-body P")
    g = TensorField(3, gram, "symmetric", "current-current", "Landau-Lifschitz metric")
    h = ScalarField.of_current(3, lambda x: -gamma * float(B @ x), lambda x: -gamma * B, "-gamma B.x")
    spec = VectorFieldSpec(3, P, g, h, h, "static-almost")
    return CatalogEntry(
        "landau-lifschitz",
        3,
        spec,
        dict(gamma=gamma, lam=lam, B1=B1, B2=B2, B3=B3),
        invariant_functions=[("|x|^2/2", _quadratic((1.0, 1.0, 1.0), "|x|^2/2"))],
        structural_checks=[
            ("field = closed form", _field_matches(printed.landau_lifschitz_field(gamma, lam, B))),
        ],
        description="Landau-Lifschitz magnetization model",
    )


def revisited_rigid_body(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    a = _a(a1, a2, a3)
    P = _skew_P(lambda xd, x: cross_matrix(x), "rigid-body P")
    h1 = _quadratic(a, "energy")
    h2 = _quadratic((1.0, 1.0, 1.0), "casimir")
    spec = build_revisited_system(P, h1, h2, "outer-product", "static")
    return CatalogEntry(
        "revisited-rigid-body",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        invariant_functions=[("h1", h1)],
        structural_checks=[
            ("g = printed table", _tensor_matches("g", printed.rigid_body_metric_table(a))),
            ("g grad h1 = 0", _annihilates(lambda p: h1.grad_current(p))),
        ],
        diagnostics=[("h2", h2.fn)],
        printed_field=printed.revisited_rigid_body_field(a),
        description="rigid body with constructed dissipation; energy kept, Casimir dissipated",
        revisit_inputs=(P, h1, h2, "static"),
        revisited_display=(printed.revisited_rigid_body_field(a), printed.rigid_body_metric_table(a)),
    )


# -- delay systems -----------------------------------------------------------


def _mixed_P():
    """Rigid-body tensor with x2 replaced by its delayed value in the (1,3) block."""
    def fn(xd, x):
        return np.array([
            [0.0, x[2], -xd[1]],
            [-x[2], 0.0, x[0]],
            [xd[1], -x[0], 0.0],
        ])

    return _skew_P(fn, "mixed P")


def _one_direction_pair(a):
    """The two functions preserved pointwise by the one-direction delay field."""
    w = np.array([1.0, 1.0, 1.0]) if a is None else np.asarray(a, float)

    def fn(xd, x):
        return 0.5 * w[0] * x[0] ** 2 + w[1] * x[1] * xd[1] + 0.5 * w[2] * x[2] ** 2

    def gc(xd, x):
        return np.array([w[0] * x[0], w[1] * xd[1], w[2] * x[2]])

    def gd(xd, x):
        return np.array([0.0, w[1] * x[1], 0.0])

    return ScalarField(3, fn, gc, gd, "full", "h1" if a is None else "h2")


def rigid_body_delay_one_direction(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    """x2 enters the first and third equations with a delay.

    Equals P d_x h2 with the mixed tensor P, and P d_x h1 = 0.
    """
    a = _a(a1, a2, a3)
    h1 = _one_direction_pair(None)
    h2 = _one_direction_pair(a)
    spec = VectorFieldSpec(3, _mixed_P(), _zero_T11(), h1, h2, "delay-almost")
    static = printed.rigid_body_field(a)
    return CatalogEntry(
        "rigid-body-delay-1d",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        invariant_functions=[("h1", h1), ("h2", h2)],
        structural_checks=[
            ("field = printed system", _field_matches(printed.one_direction_delay_field(a))),
            ("X(h1) = 0", _derivative_vanishes(h1)),
            ("X(h2) = 0", _derivative_vanishes(h2)),
            ("diagonal = rigid body", _on_diagonal(lambda x: static(x, x))),
        ],
        description="rigid body with the second coordinate delayed",
        revisit_inputs=(spec.P, h1, h2, "delay"),
    )


def rigid_body_delay_all_directions(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    """Every cross term pairs a current and a delayed coordinate.

    Equals P(x~) d_x h2 with the rigid-body tensor evaluated at x~, so the
    energy h2 is conserved exactly; |x|^2/2 is not (its rate is ``alpha``).
    """
    a = _a(a1, a2, a3)
    P = _skew_P(lambda xd, x: cross_matrix(xd), "rigid-body P at x~")
    h2 = _quadratic(a, "energy")
    h1 = _quadratic((1.0, 1.0, 1.0), "|x|^2/2")
    spec = VectorFieldSpec(3, P, _zero_T11(), ScalarField.zero(3), h2, "delay-almost")
    alpha = printed.all_directions_alpha(a)
    static = printed.rigid_body_field(a)
    return CatalogEntry(
        "rigid-body-delay-3d",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        invariant_functions=[("h2", h2)],
        structural_checks=[
            ("field = printed system", _field_matches(printed.all_directions_delay_field(a))),
            ("X(h2) = 0", _derivative_vanishes(h2)),
            ("X(h1) = alpha", lambda e, p: abs(float(h1.grad_current(p) @ e.field(p)) - alpha(p.delayed, p.current))),
            ("diagonal = rigid body", _on_diagonal(lambda x: static(x, x))),
        ],
        diagnostics=[("h1", h1.fn), ("alpha", alpha)],
        description="rigid body with delay in every cross term",
    )


def three_wave_delay(s1=1.0, s2=1.0, s3=1.0, g1=1.0, g2=1.0, g3=-2.0) -> CatalogEntry:
    """Three-wave field evaluated entirely at the delayed state: X = g(d_x~ h)."""
    base = three_wave(s1, s2, s3, g1, g2, g3)
    s = np.array([s1, s2, s3], float)
    gam = np.array([g1, g2, g3], float)
    g = TensorField.constant(np.diag(s * gam), "general", "delayed-current", "three-wave T11 metric")
    h = ScalarField.of_delayed(
        3,
        lambda x: float(x[0] * x[1] * x[2]),
        lambda x: np.array([x[1] * x[2], x[0] * x[2], x[0] * x[1]]),
        "x~1*x~2*x~3",
    )
    spec = VectorFieldSpec(3, TensorField.zero(3, "skew"), g, h, ScalarField.zero(3), "delay-almost")

    def x_eq_g_dh(entry, p):
        return float(np.max(np.abs(entry.field(p) - g(p) @ h.grad_delayed(p))))

    return CatalogEntry(
        "three-wave-delay",
        3,
        spec,
        dict(base.parameters),
        structural_checks=[
            ("field = printed system", _field_matches(printed.three_wave_delay_field(s, gam))),
            ("X = g(pi1* h)", x_eq_g_dh),
            ("diagonal = three-wave", _on_diagonal(lambda x: base.field(DelayPair(x, x)))),
        ],
        description="three-wave interaction with all right-hand sides delayed",
    )


def revisited_rigid_body_delay(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    """x' = P(x) d_x h2 + g(x~, x) d_x~ h1, h1 = |x~|^2/2, h2 the energy."""
    a = _a(a1, a2, a3)
    P = _skew_P(lambda xd, x: cross_matrix(x), "rigid-body P")
    h1 = ScalarField.of_delayed(3, lambda x: 0.5 * float(x @ x), lambda x: np.array(x, float), "|x~|^2/2")
    h2 = _quadratic(a, "energy")
    spec = build_revisited_system(P, h1, h2, "outer-product", "delay")
    static = revisited_rigid_body(*a)
    return CatalogEntry(
        "revisited-rigid-body-delay",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        invariant_functions=[("h2", h2)],
        structural_checks=[
            ("g G = 0", _annihilates(lambda p: annihilated_vector(p, h2, variant="outer-product", mode="delay"))),
            ("diagonal = revisited rigid body", _on_diagonal(lambda x: static.field(DelayPair(x, x)))),
        ],
        printed_field=printed.revisited_rigid_body_delay_field(a),
        description="revisited rigid body with delayed dissipation",
        revisit_inputs=(P, h1, h2, "delay"),
        revisited_display=(printed.revisited_rigid_body_delay_field(a), printed.revisited_rigid_body_delay_metric(a)),
    )


def _mixed_pair(a):
    """Coupling function a1 x~1 x1 + a2 x~2 x2 + a3 x~3 x3."""
    w = np.asarray(a, float)
    return ScalarField(
        3,
        lambda xd, x: float(w @ (xd * x)),
        lambda xd, x: w * xd,
        lambda xd, x: w * x,
        "full",
        "sum a_i x~i xi",
    )


def mixed_delay_rigid_body(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    """x' = P(x~, x) d_x k with k = sum a_i x~i xi and the mixed tensor P.

    The one-direction function c = x1^2/2 + x2 x~2 + x3^2/2 satisfies
    P d_x c = 0.
    """
    a = _a(a1, a2, a3)
    P = _mixed_P()
    k = _mixed_pair(a)
    c = _one_direction_pair(None)
    spec = VectorFieldSpec(3, P, _zero_T11(), c, k, "delay-almost")
    static = printed.rigid_body_field(a)

    def p_kills_c(entry, p):
        return float(np.max(np.abs(entry.spec.P(p) @ c.grad_current(p))))

    return CatalogEntry(
        "example-4-5",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        structural_checks=[
            ("field = printed system", _field_matches(printed.mixed_delay_field(a))),
            ("P(h2, f) = 0", p_kills_c),
            ("diagonal = rigid body", _on_diagonal(lambda x: static(x, x))),
        ],
        description="rigid body with a mixed delayed Poisson-type tensor",
        revisit_inputs=(P, c, k, "delay"),
        revisited_display=(printed.revisited_mixed_delay_field(a), printed.mixed_delay_metric(a)),
    )


def revisited_mixed_delay_rigid_body(a1=0.6, a2=0.4, a3=0.2) -> CatalogEntry:
    """Mixed delay rigid body plus the outer-product metric of its coupling function."""
    a = _a(a1, a2, a3)
    P = _mixed_P()
    k = _mixed_pair(a)
    c = _one_direction_pair(None)
    spec = build_revisited_system(P, c, k, "outer-product", "delay")

    def p_kills_c(entry, p):
        return float(np.max(np.abs(entry.spec.P(p) @ c.grad_current(p))))

    return CatalogEntry(
        "revisited-example-4-5",
        3,
        spec,
        dict(a1=a1, a2=a2, a3=a3),
        structural_checks=[
            ("g G = 0", _annihilates(lambda p: annihilated_vector(p, k, variant="outer-product", mode="delay"))),
            ("P(h2, f) = 0", p_kills_c),
        ],
        printed_field=printed.revisited_mixed_delay_field(a),
        description="revisited mixed delay rigid body",
        revisit_inputs=(P, c, k, "delay"),
        revisited_display=(printed.revisited_mixed_delay_field(a), printed.mixed_delay_metric(a)),
    )


CATALOG: dict[str, Callable[..., CatalogEntry]] = {
    "three-wave": three_wave,
    "rigid-body": rigid_body,
    "landau-lifschitz": landau_lifschitz,
    "revisited-rigid-body": revisited_rigid_body,
    "rigid-body-delay-1d": rigid_body_delay_one_direction,
    "rigid-body-delay-3d": rigid_body_delay_all_directions,
    "three-wave-delay": three_wave_delay,
    "revisited-rigid-body-delay": revisited_rigid_body_delay,
    "example-4-5": mixed_delay_rigid_body,
    "revisited-example-4-5": revisited_mixed_delay_rigid_body,
}


def get_entry(name: str, **params) -> CatalogEntry:
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise UnknownSystemError(name) from None
    return ctor(**params)


def list_entries(pattern: str = "") -> list[CatalogEntry]:
    """Default-parameter entries whose name contains ``pattern``."""
    return [ctor() for name, ctor in CATALOG.items() if pattern in name]


def perturbed(entry: CatalogEntry, eps: float) -> CatalogEntry:
    """Copy of ``entry`` with every off-diagonal coefficient of P and g moved by ``eps``.

    P receives a skew bump and g a symmetric one, so both keep their
    symmetry class while structural relations break by an amount of order eps.
    """
    n = entry.n
    skew = eps * (np.triu(np.ones((n, n)), 1) - np.tril(np.ones((n, n)), -1))
    sym = eps * (np.ones((n, n)) - np.eye(n))

    def bump(T, delta):
        return dataclasses.replace(T, fn=lambda xd, x, f=T.fn: f(xd, x) + delta, label=T.label + " (perturbed)")

    spec = dataclasses.replace(entry.spec, P=bump(entry.spec.P, skew), g=bump(entry.spec.g, sym))
    return dataclasses.replace(entry, spec=spec, name=entry.name + "+perturbed")
