"""Leibniz and almost-Leibniz brackets and the vector fields they generate.

Three wirings are supported:

``static-leibniz``
    X^i = (P^ij + g^ij) dh/dx^j with a single Hamiltonian ``h1 == h2``.
``static-almost``
    X^i = P^ij dh1/dx^j + g^ij dh2/dx^j.
``delay-almost``
    X^i = P^ij(x~, x) dh2/dx^j + g^ij(x~, x) dh1/dx~^j.

Note the delay wiring pairs P with ``h2`` and g with the *delayed* gradient
of ``h1``; the static one pairs P with ``h1``.  Each convention is kept
as-is rather than reconciled.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import DelayPair, ScalarField, TensorField, sample_pairs

__all__ = [
    "VectorFieldSpec",
    "Polynomial",
    "LawReport",
    "EquivalenceReport",
    "pseudometric_bracket",
    "leibniz_vector_field",
    "almost_leibniz_vector_field",
    "delay_vector_field",
    "vector_field",
    "verify_bracket_laws",
    "verify_split_equivalence",
]

Wiring = Literal["static-leibniz", "static-almost", "delay-almost"]


@dataclass(frozen=True)
class VectorFieldSpec:
    n: int
    P: TensorField
    g: TensorField
    h1: ScalarField
    h2: ScalarField
    wiring: Wiring

    def __post_init__(self):
        dims = {self.n, self.P.n, self.g.n, self.h1.n, self.h2.n}
        if len(dims) != 1:
            raise ValueError(f"dimension mismatch in vector field spec: {sorted(dims)}")
        if self.wiring not in ("static-leibniz", "static-almost", "delay-almost"):
            raise ValueError(f"unknown wiring {self.wiring!r}")
        if self.wiring == "delay-almost":
            if self.P.slots != "current-current" or self.g.slots != "delayed-current":
                raise ValueError(
                    "delay-almost wiring needs P on (current, current) and g on (delayed, current) slots"
                )

    def __call__(self, p: DelayPair) -> np.ndarray:
        return vector_field(self, p)

    def rhs(self, xd, x) -> np.ndarray:
        """Raw-array form used by the integrator, which validates the states itself."""
        xd, x = np.asarray(xd, dtype=float), np.asarray(x, dtype=float)
        if xd.shape != (self.n,) or x.shape != (self.n,):
            raise ValueError(f"expected states of length {self.n}")
        return _DISPATCH[self.wiring](self, DelayPair.unchecked(xd, x))

    @property
    def is_delay(self) -> bool:
        return self.wiring == "delay-almost"


def _check_dims(*objs):
    dims = {o.n for o in objs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def pseudometric_bracket(g: TensorField, f: ScalarField, h: ScalarField, p: DelayPair) -> float:
    """``df . g . dh`` with current-slot gradients."""
    _check_dims(g, f, h)
    if p.n != g.n:
        raise ValueError("dimension mismatch between point and tensor")
    return float(f.grad_current(p) @ g(p) @ h.grad_current(p))


def leibniz_vector_field(spec: VectorFieldSpec, p: DelayPair) -> np.ndarray:
    if spec.wiring != "static-leibniz":
        raise ValueError(f"expected static-leibniz wiring, got {spec.wiring}")
    dh = spec.h1.grad_current(p)
    return (spec.P(p) + spec.g(p)) @ dh


def almost_leibniz_vector_field(spec: VectorFieldSpec, p: DelayPair) -> np.ndarray:
    if spec.wiring != "static-almost":
        raise ValueError(f"expected static-almost wiring, got {spec.wiring}")
    return spec.P(p) @ spec.h1.grad_current(p) + spec.g(p) @ spec.h2.grad_current(p)


def delay_vector_field(spec: VectorFieldSpec, p: DelayPair) -> np.ndarray:
    """Only dx components are produced; x~ is read, never written."""
    if spec.wiring != "delay-almost":
        raise ValueError(f"expected delay-almost wiring, got {spec.wiring}")
    return spec.P(p) @ spec.h2.grad_current(p) + spec.g(p) @ spec.h1.grad_delayed(p)


_DISPATCH = {
    "static-leibniz": leibniz_vector_field,
    "static-almost": almost_leibniz_vector_field,
    "delay-almost": delay_vector_field,
}


def vector_field(spec: VectorFieldSpec, p: DelayPair) -> np.ndarray:
    if p.n != spec.n:
        raise ValueError(f"point has dimension {p.n}, field has {spec.n}")
    return _DISPATCH[spec.wiring](spec, p)


_DENSE_KEY_LIMIT = 1 << 20


@functools.lru_cache(maxsize=None)
def _product_table(n: int, degree: int, slots: str):
    """Map base-(degree+1) monomial keys to rows of the monomial list.

    None when the key space is too large to tabulate.
    """
    base = degree + 1
    if base ** (2 * n) > _DENSE_KEY_LIMIT:
        return None
    exps = _monomials(n, degree, slots)
    weights = base ** np.arange(2 * n, dtype=np.int64)
    slots = np.full(base ** (2 * n), -1, dtype=np.int64)
    slots[exps @ weights] = np.arange(len(exps))
    slots.flags.writeable = False
    return slots, exps


@functools.lru_cache(maxsize=None)
def _monomials(n: int, degree: int, slots: str) -> np.ndarray:
    rows = [
        e
        for e in itertools.product(range(degree + 1), repeat=2 * n)
        if sum(e) <= degree and not (slots == "current" and any(e[:n]))
    ]
    out = np.array(rows, dtype=int)
    out.flags.writeable = False
    return out


class Polynomial:
    """Polynomial in the 2n coordinates (x~^1..x~^n, x^1..x^n).

    Stored as an exponent table plus coefficients; repeated exponent rows are
    allowed, so products are formed exactly by pairing rows.  Gradients of
    products therefore never rely on the product rule being checked.
    """

    def __init__(self, n: int, exps: np.ndarray, coefs: np.ndarray):
        self.n = n
        self.exps = np.asarray(exps, dtype=int).reshape(-1, 2 * n)
        self.coefs = np.asarray(coefs, dtype=float).reshape(-1)

    @classmethod
    def random(cls, n, rng, degree=3, slots: Literal["current", "full"] = "full"):
        """Dense random polynomial of total degree <= ``degree``, coefficients in [-1, 1]."""
        exps = _monomials(n, degree, slots)
        return cls(n, exps, rng.uniform(-1.0, 1.0, size=len(exps)))

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max(initial=0))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        # exponents add, so base-b keys of the factors add without carries
        deg = self.degree + other.degree
        base = deg + 1
        weights = base ** np.arange(2 * self.n, dtype=np.int64)
        keys = ((self.exps @ weights)[:, None] + (other.exps @ weights)[None, :]).reshape(-1)
        coefs = np.outer(self.coefs, other.coefs).reshape(-1)
        current_only = not (self.exps[:, : self.n].any() or other.exps[:, : other.n].any())
        table = _product_table(self.n, deg, "current" if current_only else "full")
        if table is not None:
            slots, exps = table
            merged = np.bincount(slots[keys], weights=coefs, minlength=len(exps))
            return Polynomial(self.n, exps, merged)
        uniq_keys, inv = np.unique(keys, return_inverse=True)
        merged = np.bincount(inv.reshape(-1), weights=coefs, minlength=len(uniq_keys))
        exps = (uniq_keys[:, None] // weights[None, :]) % base
        return Polynomial(self.n, exps, merged)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(
            self.n,
            np.vstack([self.exps, other.exps]),
            np.concatenate([self.coefs, other.coefs]),
        )

    @staticmethod
    def _z(p: DelayPair):
        return np.concatenate([p.delayed, p.current])

    def value(self, p: DelayPair) -> float:
        powers = self._z(p) ** self.exps
        return float(self.coefs @ np.prod(powers, axis=1))

    __call__ = value

    def _power_table(self, z):
        top = int(self.exps.max(initial=0))
        return z[:, None] ** np.arange(top + 1)[None, :]

    def jet(self, p: DelayPair) -> tuple[float, np.ndarray]:
        """Value and full gradient (delayed block first) at ``p``."""
        z = self._z(p)
        e = self.exps
        table = self._power_table(z)
        cols = np.arange(2 * self.n)
        powers = table[cols, e]
        val = float(self.coefs @ np.prod(powers, axis=1))
        # product of all other factors via exclusive prefix/suffix products
        ones = np.ones((len(e), 1))
        prefix = np.hstack([ones, np.cumprod(powers[:, :-1], axis=1)])
        suffix = np.hstack([np.cumprod(powers[:, :0:-1], axis=1)[:, ::-1], ones])
        dpowers = e * table[cols, np.maximum(e - 1, 0)]
        grad = (dpowers * prefix * suffix).T @ self.coefs
        return val, grad

    def gradient(self, p: DelayPair) -> np.ndarray:
        return self.jet(p)[1]

    def grad_delayed(self, p):
        return self.gradient(p)[: self.n]

    def grad_current(self, p):
        return self.gradient(p)[self.n :]

    def as_scalar_field(self, label="poly") -> ScalarField:
        return ScalarField(
            self.n,
            lambda xd, x: self.value(DelayPair(xd, x)),
            lambda xd, x: self.grad_current(DelayPair(xd, x)),
            lambda xd, x: self.grad_delayed(DelayPair(xd, x)),
            "full",
            label,
        )


@dataclass
class LawReport:
    max_residual: float
    passed: bool
    residuals: dict[str, float]
    mode: str

    def __bool__(self):
        return self.passed


def _resid(lhs, *rhs_terms):
    rhs = sum(rhs_terms)
    scale = max(1.0, abs(lhs), *(abs(t) for t in rhs_terms))
    return abs(lhs - rhs) / scale


def verify_bracket_laws(
    P: TensorField,
    g: TensorField,
    trials: int = 200,
    tol: float = 1e-8,
    seed=0,
    mode: Literal["static", "delay"] | None = None,
    drop_metric_term: bool = False,
) -> LawReport:
    """Numerically check the derivation laws of the almost-Leibniz bracket.

    With random cubic polynomials f, f1, f2, h, l, h1, h2 at random points:

    (a) [f1 f2, (h1, h2)] = [f1, (h1, h2)] f2 + f1 [f2, (h1, h2)]
    (b) [f, (h h1, h h2)] = h [f, (h1, h2)] + h1 P(f, h) + h2 g(f, h)     static
        [f, (h h1, h h2)] = h [f, (h1, h2)] + h2 P(f, h) + h1 g(f, h)     delay
    (c) [f, (l h, l h)]   = l [f, (h, h)] + h [f, (l, l)]

    In delay mode the first argument depends on x only and P/g pair with
    h2/h1 as in the delay vector field, which swaps h1 and h2 in (b).
    ``drop_metric_term`` removes the g-term from the right side of (b); it
    exists so the checker itself can be shown to catch a violation.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_dims(P, g)
    n = P.n
    if mode is None:
        mode = "delay" if g.slots == "delayed-current" else "static"
    rng = np.random.default_rng(seed)

    # pairing blocks: f always uses its current gradient
    p_slot = slice(n, 2 * n)
    g_slot = slice(n, 2 * n) if mode == "static" else slice(0, n)
    fslots = "current"
    hslots = "current" if mode == "static" else "full"

    worst = {"a": 0.0, "b": 0.0, "c": 0.0}
    for p in sample_pairs(n, trials, rng):
        Pm, gm = P(p), g(p)
        f, f1, f2 = (Polynomial.random(n, rng, slots=fslots) for _ in range(3))
        h, l, h1, h2 = (Polynomial.random(n, rng, slots=hslots) for _ in range(4))
        polys = {
            "f": f, "f1": f1, "f2": f2, "h": h, "l": l, "h1": h1, "h2": h2,
            "f1f2": f1 * f2, "hh1": h * h1, "hh2": h * h2, "lh": l * h,
        }
        val, jac = {}, {}
        for k, q in polys.items():
            val[k], jac[k] = q.jet(p)

        def Pf(a, b):
            return jac[a][n:] @ Pm @ jac[b][p_slot]

        def gf(a, b):
            return jac[a][n:] @ gm @ jac[b][g_slot]

        def br(a, b1, b2):
            # static: P with the first function; delay: P with the second
            if mode == "static":
                return Pf(a, b1) + gf(a, b2)
            return Pf(a, b2) + gf(a, b1)

        ra = _resid(
            br("f1f2", "h1", "h2"),
            br("f1", "h1", "h2") * val["f2"],
            val["f1"] * br("f2", "h1", "h2"),
        )

        a1, a2 = ("h1", "h2") if mode == "static" else ("h2", "h1")
        terms = [val["h"] * br("f", "h1", "h2"), val[a1] * Pf("f", "h")]
        if not drop_metric_term:
            terms.append(val[a2] * gf("f", "h"))
        rb = _resid(br("f", "hh1", "hh2"), *terms)

        rc = _resid(br("f", "lh", "lh"), val["l"] * br("f", "h", "h"), val["h"] * br("f", "l", "l"))

        worst["a"] = max(worst["a"], ra)
        worst["b"] = max(worst["b"], rb)
        worst["c"] = max(worst["c"], rc)
    m = max(worst.values())
    return LawReport(m, bool(m <= tol), worst, mode)


@dataclass
class EquivalenceReport:
    hypothesis_residual: float
    equivalence_residual: float
    hypothesis_ok: bool
    equivalence_ok: bool

    @property
    def passed(self) -> bool:
        return self.hypothesis_ok and self.equivalence_ok

    def __bool__(self):
        return self.passed


def verify_split_equivalence(
    P: TensorField,
    g: TensorField,
    h1: ScalarField,
    h2: ScalarField,
    trials: int = 100,
    tol: float = 1e-10,
    seed=0,
    mode: Literal["static", "delay"] | None = None,
) -> EquivalenceReport:
    """Check that the two-function field equals the field of ``h = h1 + h2``.

    Hypotheses checked first: static ``P dh2 = 0`` and ``g dh1 = 0``; delay
    ``P d_x h1 = 0`` and ``g d_x~ h2 = 0``.  The report keeps hypothesis and
    equivalence failures apart.
    """
    _check_dims(P, g, h1, h2)
    if mode is None:
        mode = "delay" if g.slots == "delayed-current" else "static"
    h = h1 + h2
    hyp = eq = 0.0
    for p in sample_pairs(P.n, trials, seed):
        Pm, gm = P(p), g(p)
        if mode == "static":
            r1 = Pm @ h2.grad_current(p)
            r2 = gm @ h1.grad_current(p)
            split = Pm @ h1.grad_current(p) + gm @ h2.grad_current(p)
            joint = (Pm + gm) @ h.grad_current(p)
        else:
            r1 = Pm @ h1.grad_current(p)
            r2 = gm @ h2.grad_delayed(p)
            split = Pm @ h2.grad_current(p) + gm @ h1.grad_delayed(p)
            joint = Pm @ h.grad_current(p) + gm @ h.grad_delayed(p)
        hyp = max(hyp, float(np.max(np.abs(r1), initial=0.0)), float(np.max(np.abs(r2), initial=0.0)))
        eq = max(eq, float(np.max(np.abs(split - joint), initial=0.0)))
    return EquivalenceReport(hyp, eq, hyp <= tol, eq <= tol)
