"""Component formulas exactly as originally printed.

These are transcriptions, misprints included, used for structural checks
and side-by-side diff reports against the constructed systems.  Field
functions take ``(xd, x)`` arrays; static ones ignore ``xd``.
"""
from __future__ import annotations

import numpy as np

from .core import sample_pairs

__all__ = [
    "three_wave_field",
    "rigid_body_field",
    "landau_lifschitz_field",
    "rigid_body_metric_table",
    "revisited_rigid_body_field",
    "one_direction_delay_field",
    "all_directions_delay_field",
    "all_directions_alpha",
    "three_wave_delay_field",
    "revisited_rigid_body_delay_field",
    "revisited_rigid_body_delay_metric",
    "mixed_delay_field",
    "mixed_delay_metric",
    "revisited_mixed_delay_field",
    "diff_report",
]


def three_wave_field(s, gam):
    c = np.asarray(s, float) * np.asarray(gam, float)

    def fn(xd, x):
        return np.array([c[0] * x[1] * x[2], c[1] * x[0] * x[2], c[2] * x[0] * x[1]])

    return fn


def rigid_body_field(a):
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([(a2 - a3) * x[1] * x[2], (a3 - a1) * x[0] * x[2], (a1 - a2) * x[0] * x[1]])

    return fn


def landau_lifschitz_field(gamma, lam, B):
    B = np.asarray(B, float)

    def fn(xd, x):
        xb = np.cross(x, B)
        return gamma * xb + lam / (x @ x) * np.cross(x, xb)

    return fn


def rigid_body_metric_table(a):
    a1, a2, a3 = a

    def fn(xd, x):
        x1, x2, x3 = x
        return np.array([
            [-a2**2 * x2**2 - a3**2 * x3**2, a1 * a2 * x1 * x2, a1 * a3 * x1 * x3],
            [a1 * a2 * x1 * x2, -a1**2 * x1**2 - a3**2 * x3**2, a2 * a3 * x2 * x3],
            [a1 * a3 * x1 * x3, a2 * a3 * x2 * x3, -a1**2 * x1**2 - a2**2 * x2**2],
        ])

    return fn


def revisited_rigid_body_field(a):
    """As printed; the last term of the third row reads a2(a3 - a1)."""
    a1, a2, a3 = a

    def fn(xd, x):
        x1, x2, x3 = x
        return np.array([
            (a2 - a3) * x2 * x3 + a2 * (a1 - a2) * x1 * x2**2 + a3 * (a1 - a3) * x1 * x3**2,
            (a3 - a1) * x1 * x3 + a3 * (a2 - a3) * x2 * x3**2 + a1 * (a2 - a1) * x2 * x1**2,
            (a1 - a2) * x1 * x2 + a1 * (a3 - a1) * x3 * x1**2 + a2 * (a3 - a1) * x3 * x2**2,
        ])

    return fn


def one_direction_delay_field(a):
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            (a2 - a3) * xd[1] * x[2],
            (a3 - a1) * x[0] * x[2],
            (a1 - a2) * x[0] * xd[1],
        ])

    return fn


def all_directions_delay_field(a):
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            a2 * x[1] * xd[2] - a3 * x[2] * xd[1],
            a3 * x[2] * xd[0] - a1 * x[0] * xd[2],
            a1 * x[0] * xd[1] - a2 * x[1] * xd[0],
        ])

    return fn


def all_directions_alpha(a):
    """Rate of change of |x|^2 / 2 along the all-directions delay field."""
    a1, a2, a3 = a

    def fn(xd, x):
        return (
            a1 * x[0] * (xd[1] * x[2] - xd[2] * x[1])
            + a2 * x[1] * (xd[2] * x[0] - xd[0] * x[2])
            + a3 * x[2] * (xd[0] * x[1] - xd[1] * x[0])
        )

    return fn


def three_wave_delay_field(s, gam):
    c = np.asarray(s, float) * np.asarray(gam, float)

    def fn(xd, x):
        return np.array([c[0] * xd[1] * xd[2], c[1] * xd[0] * xd[2], c[2] * xd[0] * xd[1]])

    return fn


def revisited_rigid_body_delay_field(a):
    """As printed; the second row carries a3(a2 - a1) where a3(a2 - a3) fits the pattern."""
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            (a2 - a3) * x[1] * x[2] + a2 * (a1 - a2) * xd[0] * xd[1] * x[1] + a3 * (a1 - a3) * xd[0] * xd[2] * x[2],
            (a3 - a1) * x[0] * x[2] + a3 * (a2 - a1) * xd[1] * xd[2] * x[2] + a1 * (a2 - a1) * xd[1] * xd[0] * x[0],
            (a1 - a2) * x[0] * x[1] + a1 * (a3 - a1) * xd[2] * xd[0] * x[0] + a2 * (a3 - a2) * xd[2] * xd[1] * x[1],
        ])

    return fn


def revisited_rigid_body_delay_metric(a):
    """The printed (componentwise symmetric) metric of the revisited delay rigid body."""
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            [-a2**2 * x[1] * xd[1] - a3**2 * x[2] * xd[2], a1 * a2 * xd[0] * x[1], a1 * a3 * xd[0] * x[2]],
            [a1 * a2 * xd[0] * x[1], -a1**2 * x[0] * xd[0] - a3**2 * x[2] * xd[2], a2 * a3 * xd[1] * x[2]],
            [a1 * a3 * xd[0] * x[2], a2 * a3 * xd[1] * x[2], -a1**2 * xd[0] * x[0] - a2**2 * xd[1] * x[1]],
        ])

    return fn


def mixed_delay_field(a):
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            a2 * xd[1] * x[2] - a3 * xd[1] * xd[2],
            a3 * x[0] * xd[2] - a1 * xd[0] * x[2],
            a1 * xd[0] * xd[1] - a2 * x[0] * xd[1],
        ])

    return fn


def mixed_delay_metric(a):
    """As printed: a3 unsquared on two diagonal entries, x2 in the (3, 1) entry."""
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            [-a2**2 * x[1] * xd[1] - a3 * x[2] * xd[2], a1 * a2 * xd[0] * x[1], a1 * a3 * xd[0] * x[2]],
            [a1 * a2 * xd[0] * x[1], -a1**2 * x[0] * xd[0] - a3 * x[2] * xd[2], a2 * a3 * xd[1] * x[2]],
            [a1 * a3 * xd[0] * x[1], a2 * a3 * xd[1] * x[2], -a1**2 * x[0] * xd[0] - a2**2 * x[1] * xd[1]],
        ])

    return fn


def revisited_mixed_delay_field(a):
    a1, a2, a3 = a

    def fn(xd, x):
        return np.array([
            a2 * xd[1] * x[2] - a3 * xd[1] * xd[2],
            a3 * x[0] * xd[2] - a1 * xd[0] * x[2]
            - a1**2 * x[0] * xd[0] * x[1] - a3**2 * x[1] * x[2] * xd[2],
            a1 * xd[0] * xd[1] - a2 * x[0] * xd[1],
        ])

    return fn


def diff_report(constructed, printed, n=3, samples=100, seed=0) -> dict:
    """Componentwise max |constructed - printed| over seeded random points.

    Both arguments are ``(xd, x) -> array`` callables; works for vectors and
    matrices alike.
    """
    worst = None
    for p in sample_pairs(n, samples, seed):
        d = np.abs(np.asarray(constructed(p.delayed, p.current)) - np.asarray(printed(p.delayed, p.current)))
        worst = d if worst is None else np.maximum(worst, d)
    return {
        "max_abs_diff": float(worst.max()),
        "componentwise": worst.tolist(),
        "matches": bool(worst.max() <= 1e-12),
    }
