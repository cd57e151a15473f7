"""Construction of dissipative metric tensors for revisited systems.

Both constructions share one algebraic pattern.  Given vectors ``v`` and
``u`` set

    g^ij = v_i u_j          (i != j)
    g^ii = -sum_{k != i} v_k u_k

Row i of ``g @ v`` is ``v_i * sum_{j != i} u_j v_j - v_i * sum_{k != i} v_k u_k``,
which telescopes to zero, so ``g`` annihilates ``v`` from the right exactly.

* annihilator variant: ``v = grad h1, u = grad h2`` (static) or
  ``v = d_x h2, u = d_x h1`` (delay).  Generally not symmetric.
* outer-product variant: ``v = u = grad h`` (static), giving the symmetric
  negative semidefinite ``grad h grad h^T - |grad h|^2 I``; in delay mode
  ``v = G``, ``u = H`` where G and H are ``d_x h`` evaluated on the diagonal
  at the delayed and at the current point.
"""
from __future__ import annotations

import warnings
from typing import Literal

import numpy as np

from .brackets import VectorFieldSpec
from .core import DelayPair, ScalarField, TensorField, sample_pairs

__all__ = [
    "RevisitWarning",
    "telescoping_metric",
    "build_annihilator_metric",
    "build_outer_product_metric",
    "build_revisited_system",
    "annihilated_vector",
    "annihilation_residual",
]

Mode = Literal["static", "delay"]
Variant = Literal["annihilator", "outer-product"]


class RevisitWarning(UserWarning):
    pass


def telescoping_metric(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    m = np.outer(v, u)
    np.fill_diagonal(m, np.diag(m) - v @ u)
    return m


def _check_mode(mode):
    if mode not in ("static", "delay"):
        raise ValueError(f"mode must be 'static' or 'delay', got {mode!r}")


def _diag_grad(h: ScalarField, point: np.ndarray) -> np.ndarray:
    return h.grad_current(DelayPair.unchecked(point, point))


def build_annihilator_metric(h1: ScalarField, h2: ScalarField, mode: Mode = "static") -> TensorField:
    _check_mode(mode)
    if h1.n != h2.n:
        raise ValueError("dimension mismatch")
    n = h1.n
    if mode == "static":
        def fn(xd, x):
            p = DelayPair.unchecked(xd, x)
            return telescoping_metric(h1.grad_current(p), h2.grad_current(p))

        return TensorField(n, fn, "general", "current-current", "annihilator/static")

    def fn(xd, x):
        p = DelayPair.unchecked(xd, x)
        return telescoping_metric(h2.grad_current(p), h1.grad_current(p))

    return TensorField(n, fn, "general", "delayed-current", "annihilator/delay")


def build_outer_product_metric(h: ScalarField, mode: Mode = "static") -> TensorField:
    _check_mode(mode)
    n = h.n
    if mode == "static":
        def fn(xd, x):
            v = h.grad_current(DelayPair.unchecked(xd, x))
            return telescoping_metric(v, v)

        return TensorField(n, fn, "symmetric", "current-current", "outer-product/static")

    def fn(xd, x):
        return telescoping_metric(_diag_grad(h, xd), _diag_grad(h, x))

    return TensorField(n, fn, "mixed-T11", "delayed-current", "outer-product/delay")


def annihilated_vector(
    p: DelayPair,
    h1: ScalarField,
    h2: ScalarField | None = None,
    variant: Variant = "outer-product",
    mode: Mode = "static",
) -> np.ndarray:
    """The vector the constructed metric kills from the right at ``p``.

    For the outer-product variant ``h1`` is the generating function ``h``.
    """
    if variant == "outer-product":
        if mode == "static":
            return h1.grad_current(p)
        return _diag_grad(h1, p.delayed)
    if mode == "static":
        return h1.grad_current(p)
    return h2.grad_current(p)


def annihilation_residual(g: TensorField, v: np.ndarray, p: DelayPair, left: bool = False) -> float:
    """``max |g v|`` (or ``|v g|``) divided by ``max|g| * max|v|``."""
    m = g(p)
    r = v @ m if left else m @ v
    scale = np.max(np.abs(m), initial=0.0) * np.max(np.abs(v), initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(r)) / scale)


def build_revisited_system(
    P: TensorField,
    h1: ScalarField,
    h2: ScalarField,
    variant: Variant = "outer-product",
    mode: Mode = "static",
    strict: bool = False,
    tol: float = 1e-10,
    samples: int = 20,
    seed=0,
) -> VectorFieldSpec:
    """Add a constructed dissipative metric to the Poisson-type system of ``P``.

    static: ``x' = P grad h1 + g grad h2`` with ``g grad h1 = 0``; h1 is the
    Hamiltonian and h2 is expected to be a Casimir of P.

    delay: ``x' = P d_x h2 + g d_x~ h1``.  The outer-product metric is built
    from h2, the function P acts on; the annihilator metric from (h1, h2).

    A failing Casimir condition only warns unless ``strict`` is set.
    """
    _check_mode(mode)
    if variant not in ("annihilator", "outer-product"):
        raise ValueError(f"unknown variant {variant!r}")
    n = P.n
    if mode == "static":
        g = build_outer_product_metric(h1, "static") if variant == "outer-product" else build_annihilator_metric(h1, h2, "static")
        casimir, casimir_name = h2, "h2"
        spec = VectorFieldSpec(n, P, g, h1, h2, "static-almost")
    else:
        if P.slots != "current-current":
            raise ValueError("P must act on the current slot in delay mode")
        g = build_outer_product_metric(h2, "delay") if variant == "outer-product" else build_annihilator_metric(h1, h2, "delay")
        casimir, casimir_name = h1, "h1"
        spec = VectorFieldSpec(n, P, g, h1, h2, "delay-almost")

    worst = 0.0
    g_max = 0.0
    for p in sample_pairs(n, samples, seed):
        worst = max(worst, float(np.max(np.abs(P(p) @ casimir.grad_current(p)))))
        g_max = max(g_max, float(np.max(np.abs(g(p)))))
    if worst > tol:
        msg = f"{casimir_name} is not annihilated by P (residual {worst:.3e})"
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, RevisitWarning, stacklevel=2)
    if g_max == 0.0:
        warnings.warn("constructed metric vanishes at every sampled point (zero gradient?)", RevisitWarning, stacklevel=2)
    return spec
