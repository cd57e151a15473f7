"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the collected
PASS/FAIL lines are repeated in the terminal summary.
"""
import time
import warnings

import numpy as np
import pytest

from leibniz_delay import catalog
from leibniz_delay.brackets import verify_bracket_laws
from leibniz_delay.cli import main
from leibniz_delay.core import DelayPair, ScalarField, TensorField, sample_pairs
from leibniz_delay.dde import HistoryFunction, IntegrationConfig, convergence_order, integrate
from leibniz_delay.diagnostics import drift_refinement_ratio, structural_residual
from leibniz_delay.printed import revisited_rigid_body_field, rigid_body_metric_table
from leibniz_delay.revisit import (
    annihilated_vector,
    annihilation_residual,
    build_annihilator_metric,
    build_outer_product_metric,
    build_revisited_system,
)

from oracles import linear_delay_pieces, linear_delay_solution

A = (0.6, 0.4, 0.2)
RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str):
    ok = ok and elapsed < limit
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s / {limit:g} s) {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def energy():
    w = np.array(A)
    return ScalarField.of_current(3, lambda x: 0.5 * float(w @ (x * x)), lambda x: w * x, "energy")


def half_norm():
    return ScalarField.of_current(3, lambda x: 0.5 * float(x @ x), lambda x: x.copy(), "|x|^2/2")


RIGID_P = TensorField(3, lambda xd, x: catalog.cross_matrix(x), "skew")


def test_criterion_1_static_structural_reproduction():
    t0 = time.perf_counter()
    spec = build_revisited_system(RIGID_P, energy(), half_norm(), "outer-product", "static")
    table, shown = rigid_body_metric_table(A), revisited_rigid_body_field(A)
    g_dev = np.zeros((3, 3))
    x_dev = np.zeros(3)
    for p in sample_pairs(3, 100, 0):
        g_dev = np.maximum(g_dev, np.abs(spec.g(p) - table(p.delayed, p.current)))
        x_dev = np.maximum(x_dev, np.abs(spec(p) - shown(p.delayed, p.current)))
    elapsed = time.perf_counter() - t0
    ok = g_dev.max() <= 1e-12 and x_dev.max() <= 1e-12
    detail = f"g table max dev {g_dev.max():.2e}; system dev per component {', '.join(f'{v:.2e}' for v in x_dev)}"
    assert report(1, "static structural reproduction", ok, elapsed, 1.0, detail), detail


def test_criterion_2_annihilation_identities():
    t0 = time.perf_counter()
    pts = sample_pairs(3, 1000, 1)
    h1d = ScalarField.of_delayed(3, lambda x: 0.5 * float(x @ x), lambda x: x.copy(), "|x~|^2/2")
    w = np.array(A)
    coupling = ScalarField(3, lambda xd, x: float(w @ (xd * x)), lambda xd, x: w * xd, lambda xd, x: w * x)
    one_dir = catalog.rigid_body_delay_one_direction().spec.h1
    cases = {
        "outer-product/static": (build_outer_product_metric(energy(), "static"), energy(), None, "outer-product", "static"),
        "annihilator/static": (build_annihilator_metric(energy(), half_norm(), "static"), energy(), half_norm(), "annihilator", "static"),
        "outer-product/delay": (build_outer_product_metric(energy(), "delay"), energy(), None, "outer-product", "delay"),
        "annihilator/delay": (build_annihilator_metric(one_dir, coupling, "delay"), one_dir, coupling, "annihilator", "delay"),
        "annihilator/delay (x~ only h1)": (build_annihilator_metric(h1d, energy(), "delay"), h1d, energy(), "annihilator", "delay"),
    }
    worst = {}
    for label, (g, h1, h2, variant, mode) in cases.items():
        worst[label] = max(annihilation_residual(g, annihilated_vector(p, h1, h2, variant, mode), p) for p in pts)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-12
    detail = "; ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(2, "annihilation identities", ok, elapsed, 1.0, detail), detail


def test_criterion_3_bracket_laws():
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        entries = [ctor() for ctor in catalog.CATALOG.values()]
    worst = {}
    for e in entries:
        worst[e.name] = verify_bracket_laws(e.spec.P, e.spec.g, trials=200, tol=1e-8).max_residual
    planted = verify_bracket_laws(RIGID_P, TensorField.constant(np.eye(3), "symmetric"), trials=200, drop_metric_term=True)
    planted_delay = verify_bracket_laws(
        RIGID_P, TensorField.constant(np.eye(3), "general", "delayed-current"), trials=200, drop_metric_term=True
    )
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and not planted.passed and not planted_delay.passed
    detail = (
        f"max law residual {max(worst.values()):.1e} over {len(worst)} pairs; "
        f"planted fixtures residual {planted.max_residual:.1e} (static), {planted_delay.max_residual:.1e} (delay)"
    )
    assert report(3, "bracket laws", ok, elapsed, 5.0, detail), detail


def test_criterion_4_dde_integrator():
    t0 = time.perf_counter()
    phi = HistoryFunction.constant([1.0], 1.0)
    traj = integrate(lambda xd, x: -xd, phi, IntegrationConfig(1.0, 2.0, 100))
    err = abs(traj(2.0)[0] + 0.5)
    pieces = linear_delay_pieces(10)
    conv = convergence_order(
        lambda xd, x: -xd,
        phi,
        [IntegrationConfig(1.0, 10.0, m) for m in (10, 20, 40, 80)],
        reference=lambda t: np.array([linear_delay_solution(t, pieces)]),
    )
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-10 and conv.order >= 3.5
    detail = f"|x(2) + 0.5| = {err:.1e}; order {conv.order:.3f}"
    assert report(4, "DDE integrator", ok, elapsed, 1.0, detail), detail


def test_criterion_5_conservation():
    t0 = time.perf_counter()
    tau, phi = 0.5, HistoryFunction.constant([0.5, 0.5, 1.0], 0.5)
    one, three = catalog.rigid_body_delay_one_direction(), catalog.rigid_body_delay_all_directions()
    cases = [(f"(1d) {label}", one.spec, f) for label, f in one.invariant_functions]
    cases += [(f"(3d) {label}", three.spec, f) for label, f in three.invariant_functions]
    parts, ok = [], True
    for label, spec, f in cases:
        d50, d100, ratio = drift_refinement_ratio(spec, f, phi, tau, 20.0, 50)
        good = d50 <= 1e-6 and 12.0 <= ratio <= 20.0
        ok &= good
        parts.append(f"{label}: drift {d50:.2e} -> {d100:.2e}, ratio {ratio:.2f}{'' if good else ' (fails)'}")
    elapsed = time.perf_counter() - t0
    detail = "; ".join(parts)
    assert report(5, "conservation", ok, elapsed, 10.0, detail), detail


def test_criterion_6_structural_relations():
    t0 = time.perf_counter()
    wave = structural_residual(catalog.three_wave_delay(), samples=100, seed=0).residuals["X = g(pi1* h)"]
    mixed = structural_residual(catalog.mixed_delay_rigid_body(), samples=100, seed=0).residuals["P(h2, f) = 0"]
    elapsed = time.perf_counter() - t0
    ok = wave <= 1e-12 and mixed <= 1e-12
    detail = f"X = g(pi1* h) residual {wave:.1e}; P(h2, f) = 0 residual {mixed:.1e}"
    assert report(6, "structural relations", ok, elapsed, 1.0, detail), detail


def test_criterion_7_diagonal_and_small_delay_limit():
    t0 = time.perf_counter()
    pairs = {
        "rigid-body-delay-1d": "rigid-body",
        "rigid-body-delay-3d": "rigid-body",
        "example-4-5": "rigid-body",
        "three-wave-delay": "three-wave",
        "revisited-rigid-body-delay": "revisited-rigid-body",
    }
    diag = {}
    for delayed, static in pairs.items():
        d, s = catalog.get_entry(delayed), catalog.get_entry(static)
        diag[delayed] = max(
            float(np.max(np.abs(d.field(q) - s.field(q))))
            for q in (DelayPair.diagonal(p.current) for p in sample_pairs(3, 100, 0))
        )

    x0 = [0.5, 0.5, 1.0]
    ode = integrate(catalog.revisited_rigid_body().spec, HistoryFunction.constant(x0), IntegrationConfig(0.0, 10.0, step=1e-3))
    delay_spec = catalog.revisited_rigid_body_delay().spec
    grid = np.linspace(0.0, 10.0, 2001)
    ref = ode(grid)
    errors = []
    for tau in (1e-3, 5e-4):
        traj = integrate(delay_spec, HistoryFunction.constant(x0, tau), IntegrationConfig(tau, 10.0, 1))
        errors.append(float(np.max(np.abs(traj(grid) - ref))))
    ratio = errors[0] / errors[1]
    elapsed = time.perf_counter() - t0
    ok = max(diag.values()) <= 1e-12 and 1.7 <= ratio <= 2.3
    detail = (
        f"diagonal max dev {max(diag.values()):.1e}; "
        f"sup error {errors[0]:.3e} (tau=1e-3), {errors[1]:.3e} (tau=5e-4), ratio {ratio:.3f}"
    )
    assert report(7, "diagonal and small-delay limit", ok, elapsed, 30.0, detail), detail


def test_criterion_8_end_to_end(tmp_path, capsys):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("example-4-5", "revisited-example-4-5"):
        outputs = []
        codes = []
        for run in ("a", "b"):
            csv, svg = tmp_path / f"{name}-{run}.csv", tmp_path / f"{name}-{run}.svg"
            argv = ["run", name, "--param", "a1=0.6", "--param", "a2=0.4", "--param", "a3=0.2",
                    "--out", str(csv), "--svg", str(svg)]
            codes.append(main(argv))
            outputs.append((csv.read_bytes() if csv.exists() else None, svg.read_bytes() if svg.exists() else None))
        err = capsys.readouterr().err.strip().splitlines()
        if codes != [0, 0]:
            ok = False
            parts.append(f"{name}: exit {codes[0]} ({err[-1] if err else 'no message'})")
            continue
        csv_bytes, svg_bytes = outputs[0]
        lines = [ln for ln in csv_bytes.decode().splitlines() if not ln.startswith("#")]
        schema = lines[0] == "t,x1,x2,x3" and all(len(ln.split(",")) == 4 for ln in lines[1:])
        rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
        schema &= rows[0, 0] == 0.0 and rows[-1, 0] >= 100.0 and bool(np.all(np.diff(rows[:, 0]) > 0))
        svg_ok = svg_bytes.startswith(b"<svg") and svg_bytes.rstrip().endswith(b"</svg>")
        same = outputs[0] == outputs[1]
        good = schema and svg_ok and same
        ok &= good
        parts.append(f"{name}: {len(rows)} rows, schema {schema}, svg {svg_ok}, byte-identical {same}")
    elapsed = time.perf_counter() - t0
    detail = "; ".join(parts)
    assert report(8, "end-to-end run", ok, elapsed, 10.0, detail), detail


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
