"""Command-line front end: list, run, check, revisit, plot.

Exit codes: 0 ok, 1 check failure, 2 unknown system, 3 invalid argument,
4 numerical blow-up, 5 malformed input file.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .brackets import verify_bracket_laws
from .catalog import CATALOG, CatalogEntry, ConstraintError, UnknownSystemError, get_entry, perturbed
from .core import EvaluationError, ScalarField, check_gradient, check_symmetry, sample_pairs
from .dde import HistoryFunction, IntegrationConfig, IntegrationError, integrate
from .diagnostics import first_integral_drift, structural_residual
from .printed import diff_report
from .revisit import RevisitWarning, annihilated_vector, annihilation_residual, build_revisited_system

EXIT_OK, EXIT_CHECK, EXIT_UNKNOWN, EXIT_ARG, EXIT_BLOWUP, EXIT_INPUT = range(6)

DEFAULT_TAU = 0.5
DEFAULT_HISTORY = (0.5, 0.5, 1.0)
DEFAULT_T_END = 100.0
DEFAULT_STEPS_PER_DELAY = 50
DEFAULT_STEP = 1e-2

CONFIG_KEYS = {
    "system", "tau", "history.kind", "history.values", "t_end", "steps_per_delay",
    "step", "seed", "out", "svg", "record_every", "literal",
}


class CLIError(Exception):
    def __init__(self, code: int, msg: str):
        self.code = code
        super().__init__(msg)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CLIError(EXIT_ARG, message)


def _entry(name: str, params: dict | None = None) -> CatalogEntry:
    try:
        return get_entry(name, **(params or {}))
    except UnknownSystemError:
        raise CLIError(EXIT_UNKNOWN, f"unknown system {name!r}; try 'list'") from None
    except (ConstraintError, TypeError, ValueError) as exc:
        raise CLIError(EXIT_ARG, f"{name}: {exc}") from None


# -- list ---------------------------------------------------------------------


def cmd_list(pattern: str = "", out=sys.stdout) -> int:
    rows = [("name", "n", "kind", "parameters", "invariants")]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        entries = [ctor() for name, ctor in CATALOG.items() if pattern in name]
    for e in entries:
        params = " ".join(f"{k}={v:g}" for k, v in e.parameters.items())
        inv = ", ".join(label for label, _ in e.invariant_functions) or "-"
        rows.append((e.name, str(e.n), "delay" if e.is_delay else "static", params, inv))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(), file=out)
    return EXIT_OK


# -- config -------------------------------------------------------------------


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CLIError(EXIT_INPUT, f"cannot read config {path}: {exc}") from None
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise CLIError(EXIT_INPUT, f"{path}:{lineno}: expected key = value")
        if key not in CONFIG_KEYS and not key.startswith("param."):
            raise CLIError(EXIT_INPUT, f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = value.strip()
    return cfg


def _float(key, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise CLIError(EXIT_ARG, f"{key} must be a number, got {value!r}") from None
    if not math.isfinite(v):
        raise CLIError(EXIT_ARG, f"{key} must be finite")
    return v


def _int(key, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise CLIError(EXIT_ARG, f"{key} must be an integer, got {value!r}") from None


def parse_history(kind: str, values: str, n: int, tau: float) -> HistoryFunction:
    """``constant``: comma-separated vector.  ``polynomial``: one group of
    ascending coefficients per coordinate, groups split by ';' and
    coefficients by ',' or whitespace."""
    try:
        if kind == "constant":
            vec = [float(v) for v in values.split(",")]
            if len(vec) != n:
                raise CLIError(EXIT_ARG, f"history needs {n} values, got {len(vec)}")
            return HistoryFunction.constant(vec, tau)
        if kind == "polynomial":
            groups = [[float(c) for c in g.replace(",", " ").split()] for g in values.split(";")]
            if len(groups) != n:
                raise CLIError(EXIT_ARG, f"history needs {n} coefficient groups, got {len(groups)}")
            return HistoryFunction.polynomial(groups, tau)
    except ValueError as exc:
        raise CLIError(EXIT_ARG, f"bad history values {values!r}: {exc}") from None
    raise CLIError(EXIT_ARG, f"history.kind must be 'constant' or 'polynomial', got {kind!r}")


# -- run ----------------------------------------------------------------------


@dataclass
class RunSettings:
    system: str
    params: dict[str, float]
    tau: float
    history_kind: str
    history_values: str
    t_end: float
    steps_per_delay: int
    step: float
    seed: int
    out: str
    svg: str | None
    record_every: int
    literal: bool


def _settings(args) -> RunSettings:
    cfg = read_config(args.config) if args.config else {}
    params = {k[len("param."):]: _float(k, v) for k, v in cfg.items() if k.startswith("param.")}
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise CLIError(EXIT_ARG, f"--param expects name=value, got {item!r}")
        params[key.strip()] = _float(key, value)

    def pick(flag, key, default):
        v = getattr(args, flag)
        return v if v is not None else cfg.get(key, default)

    system = pick("system", "system", None)
    if system is None:
        raise CLIError(EXIT_ARG, "no system given")
    values = pick("history_values", "history.values", None)
    literal = args.literal or str(cfg.get("literal", "false")).lower() in ("1", "true", "yes")
    s = RunSettings(
        system=system,
        params=params,
        tau=_float("tau", pick("tau", "tau", DEFAULT_TAU)),
        history_kind=pick("history_kind", "history.kind", "constant"),
        history_values=values,
        t_end=_float("t_end", pick("t_end", "t_end", DEFAULT_T_END)),
        steps_per_delay=_int("steps_per_delay", pick("steps_per_delay", "steps_per_delay", DEFAULT_STEPS_PER_DELAY)),
        step=_float("step", pick("step", "step", DEFAULT_STEP)),
        seed=_int("seed", pick("seed", "seed", 0)),
        out=pick("out", "out", None) or f"{system}.csv",
        svg=pick("svg", "svg", None),
        record_every=_int("record_every", pick("record_every", "record_every", 1)),
        literal=literal,
    )
    if s.t_end <= 0:
        raise CLIError(EXIT_ARG, "t_end must be positive")
    if s.tau < 0:
        raise CLIError(EXIT_ARG, "tau must be >= 0")
    return s


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(path, times, states, meta: dict[str, str]) -> None:
    n = states.shape[1]
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(["t"] + [f"x{i + 1}" for i in range(n)]))
    for t, x in zip(times, states):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in x]))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_run(args, out=sys.stdout) -> int:
    s = _settings(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RevisitWarning)
        entry = _entry(s.system, s.params)
    tau = s.tau if entry.is_delay else 0.0
    if s.history_values is None:
        s.history_values = ",".join(repr(v) for v in (DEFAULT_HISTORY + (0.5,) * entry.n)[: entry.n])
    phi = parse_history(s.history_kind, s.history_values, entry.n, tau)
    try:
        cfg = IntegrationConfig(tau, s.t_end, s.steps_per_delay, s.step, s.record_every)
    except ValueError as exc:
        raise CLIError(EXIT_ARG, str(exc)) from None
    field = entry.spec
    if s.literal:
        if entry.printed_field is None:
            raise CLIError(EXIT_ARG, f"{entry.name} has no separate printed form; it is shipped as printed")
        field = entry.printed_field
    try:
        traj = integrate(field, phi, cfg)
    except IntegrationError as exc:
        raise CLIError(EXIT_BLOWUP, f"blow-up at t = {exc.t:.6g}") from None
    except (ZeroDivisionError, EvaluationError) as exc:
        raise CLIError(EXIT_BLOWUP, f"field evaluation failed: {exc}") from None

    meta = {"system": entry.name}
    meta.update({f"param.{k}": repr(float(v)) for k, v in entry.parameters.items()})
    meta.update({
        "tau": _fmt(tau),
        "history": phi.description,
        "t_end": _fmt(s.t_end),
        "steps_per_delay": str(s.steps_per_delay) if tau > 0 else "-",
        "step": _fmt(cfg.h),
        "record_every": str(s.record_every),
        "literal": str(s.literal).lower(),
        "seed": str(s.seed),
    })
    times, states = traj.recorded()
    write_csv(s.out, times, states, meta)

    print(f"system: {entry.name}", file=out)
    for k, v in meta.items():
        if k != "system":
            print(f"{k}: {v}", file=out)
    print(f"knots: {len(traj.knots)}", file=out)
    print(f"final_state: {' '.join(_fmt(v) for v in traj.states[-1])}", file=out)
    for label, f in entry.invariant_functions:
        print(f"drift.{label}: {first_integral_drift(traj, f).max_drift:.3e}", file=out)
    print(f"csv: {s.out}", file=out)
    if s.svg:
        axes = "x1,x2,x3" if entry.n >= 3 else "x1,x2"
        header = ["t"] + [f"x{i + 1}" for i in range(entry.n)]
        Path(s.svg).write_text(render_svg(header, np.column_stack([times, states]), axes.split(","), title=entry.name))
        print(f"svg: {s.svg}", file=out)
    return EXIT_OK


# -- check --------------------------------------------------------------------


def check_entry(entry: CatalogEntry, trials: int = 200, samples: int = 100, seed: int = 0) -> dict:
    results = {}
    rep = structural_residual(entry, samples, seed)
    for label, r in rep.residuals.items():
        results[f"structure: {label}"] = {"residual": r, "passed": r <= rep.tol}
    for label, T in entry.tensors():
        sym = check_symmetry(T, samples, seed=seed)
        results[f"symmetry: {label} ({sym.symmetry})"] = {"residual": sym.max_residual, "passed": sym.passed}
    laws = verify_bracket_laws(entry.spec.P, entry.spec.g, trials=trials, seed=seed)
    results["bracket laws"] = {"residual": laws.max_residual, "passed": laws.passed}
    fields = list(entry.invariant_functions) + [("spec.h1", entry.spec.h1), ("spec.h2", entry.spec.h2)]
    for label, f in fields:
        g = check_gradient(f, samples=20, seed=seed)
        results[f"gradient: {label}"] = {"residual": g.max_rel_error, "passed": g.passed}
    return results


def cmd_check(args, out=sys.stdout) -> int:
    names = list(CATALOG) if args.scope == "all" else [args.scope]
    report = {}
    ok = True
    for name in names:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            entry = _entry(name)
            if args.plant_typo:
                entry = perturbed(entry, args.plant_typo)
        res = check_entry(entry, trials=args.trials, seed=args.seed)
        failing = [k for k, v in res.items() if not v["passed"]]
        ok &= not failing
        report[entry.name] = {"passed": not failing, "failing": failing, "checks": res}
    json.dump({"passed": ok, "systems": report}, out, indent=2, sort_keys=True)
    out.write("\n")
    return EXIT_OK if ok else EXIT_CHECK


# -- revisit ------------------------------------------------------------------


def cmd_revisit(args, out=sys.stdout) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        entry = _entry(args.system)
    if entry.revisit_inputs is None:
        raise CLIError(EXIT_ARG, f"{entry.name} has no revisit data")
    P, h1, h2, mode = entry.revisit_inputs
    mode = args.mode or mode
    if args.constant_h:
        # the function the metric is generated from becomes a constant
        if mode == "static" or args.variant == "annihilator":
            h1 = ScalarField.zero(entry.n)
        else:
            h2 = ScalarField.zero(entry.n)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RevisitWarning)
        try:
            spec = build_revisited_system(P, h1, h2, args.variant, mode)
        except ValueError as exc:
            raise CLIError(EXIT_ARG, str(exc)) from None
    for w in caught:
        print(f"warning: {w.message}", file=out)

    pts = sample_pairs(entry.n, args.samples, args.seed)
    worst = max(
        annihilation_residual(spec.g, annihilated_vector(p, h1 if mode == "static" or args.variant == "annihilator" else h2, h2, args.variant, mode), p)
        for p in pts
    )
    report = {
        "system": entry.name,
        "variant": args.variant,
        "mode": mode,
        "annihilation_residual": worst,
        "g_samples": [
            {"delayed": p.delayed.tolist(), "current": p.current.tolist(), "g": spec.g(p).tolist()}
            for p in pts[: args.show]
        ],
    }
    if entry.revisited_display and args.variant == "outer-product" and not args.constant_h and mode == entry.revisit_inputs[3]:
        shown_field, shown_metric = entry.revisited_display
        report["diff_field"] = diff_report(spec.rhs, shown_field, entry.n, args.samples, args.seed)
        report["diff_metric"] = diff_report(lambda xd, x: spec.g.fn(xd, x), shown_metric, entry.n, args.samples, args.seed)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text, file=out)
    return EXIT_OK


# -- plot ---------------------------------------------------------------------


def read_csv(path) -> tuple[list[str], np.ndarray]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CLIError(EXIT_INPUT, f"cannot read {path}: {exc}") from None
    body = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise CLIError(EXIT_INPUT, f"{path}: no header")
    header = [c.strip() for c in body[0].split(",")]
    if not header or header[0] != "t" or len(set(header)) != len(header):
        raise CLIError(EXIT_INPUT, f"{path}: header must start with 't' and have unique columns")
    rows = []
    for i, ln in enumerate(body[1:], 2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise CLIError(EXIT_INPUT, f"{path}: row {i} has {len(cells)} cells, expected {len(header)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise CLIError(EXIT_INPUT, f"{path}: non-numeric value in row {i}") from None
    if not rows:
        raise CLIError(EXIT_INPUT, f"{path}: no data rows")
    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        raise CLIError(EXIT_INPUT, f"{path}: non-finite values")
    return header, data


def render_svg(header: list[str], data: np.ndarray, axes: list[str], size: int = 480, title: str = "") -> str:
    """Orbit projected on the first two axes; a third axis sets the stroke shade."""
    if len(axes) not in (2, 3):
        raise CLIError(EXIT_ARG, "axes must name two or three columns")
    for a in axes:
        if a not in header:
            raise CLIError(EXIT_ARG, f"unknown column {a!r}; available: {','.join(header)}")
    cols = [data[:, header.index(a)] for a in axes]
    u, v = cols[0], cols[1]
    margin = 40
    span = size - 2 * margin

    def scale(c):
        lo, hi = float(c.min()), float(c.max())
        if hi == lo:
            return np.full_like(c, 0.5)
        return (c - lo) / (hi - lo)

    px = margin + span * scale(u)
    py = size - margin - span * scale(v)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="#999" stroke-width="0.5"/>',
        f'<text x="{size / 2:.1f}" y="{size - 10}" font-size="12" text-anchor="middle">{axes[0]}</text>',
        f'<text x="12" y="{size / 2:.1f}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {size / 2:.1f})">{axes[1]}</text>',
    ]
    if title:
        out.append(f'<text x="{size / 2:.1f}" y="20" font-size="13" text-anchor="middle">{title}</text>')
    if len(px) == 1:
        out.append(f'<circle cx="{px[0]:.3f}" cy="{py[0]:.3f}" r="3" fill="black"/>')
    elif len(axes) == 2:
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(px, py))
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="0.8"/>')
    else:
        # depth shading: near (large third coordinate) dark, far light
        depth = scale(cols[2])
        for i in range(len(px) - 1):
            shade = int(round(200 * (1.0 - 0.5 * (depth[i] + depth[i + 1]))))
            out.append(
                f'<line x1="{px[i]:.3f}" y1="{py[i]:.3f}" x2="{px[i + 1]:.3f}" y2="{py[i + 1]:.3f}" '
                f'stroke="rgb({shade},{shade},{shade})" stroke-width="0.8"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args, out=sys.stdout) -> int:
    header, data = read_csv(args.csv)
    axes = [a.strip() for a in args.axes.split(",")] if args.axes else header[1:4] if len(header) > 3 else header[1:3]
    if len(axes) < 2:
        raise CLIError(EXIT_INPUT, "need at least two state columns to plot")
    svg = render_svg(header, data, axes, title=args.title or "")
    target = args.out or str(Path(args.csv).with_suffix(".svg"))
    Path(target).write_text(svg)
    print(f"svg: {target}", file=out)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="leibniz-delay", description="Leibniz and almost Leibniz systems with time delay")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ls = sub.add_parser("list", help="list catalog systems")
    ls.add_argument("pattern", nargs="?", default="")

    run = sub.add_parser("run", help="integrate a system and write CSV")
    run.add_argument("system", nargs="?")
    run.add_argument("--config", help="flat key = value file; flags override it")
    run.add_argument("--param", action="append", metavar="NAME=VALUE")
    run.add_argument("--tau", type=float)
    run.add_argument("--history-kind", choices=["constant", "polynomial"])
    run.add_argument("--history-values")
    run.add_argument("--t-end", type=float)
    run.add_argument("--steps-per-delay", type=int)
    run.add_argument("--step", type=float, help="step size for static systems")
    run.add_argument("--record-every", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--svg")
    run.add_argument("--literal", action="store_true", help="integrate the printed formula instead of the constructed one")

    chk = sub.add_parser("check", help="run the property suite")
    chk.add_argument("scope", nargs="?", default="all")
    chk.add_argument("--trials", type=int, default=200)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--plant-typo", type=float, default=0.0, help=argparse.SUPPRESS)

    rev = sub.add_parser("revisit", help="build a revisited system and report on it")
    rev.add_argument("system")
    rev.add_argument("--variant", choices=["outer-product", "annihilator"], default="outer-product")
    rev.add_argument("--mode", choices=["static", "delay"])
    rev.add_argument("--samples", type=int, default=100)
    rev.add_argument("--show", type=int, default=3)
    rev.add_argument("--seed", type=int, default=0)
    rev.add_argument("--constant-h", action="store_true", help="generate the metric from a constant function")
    rev.add_argument("--out")

    plot = sub.add_parser("plot", help="render a CSV orbit as SVG")
    plot.add_argument("csv")
    plot.add_argument("--axes")
    plot.add_argument("--out")
    plot.add_argument("--title")
    return p


COMMANDS = {
    "list": lambda a, out: cmd_list(a.pattern, out),
    "run": cmd_run,
    "check": cmd_check,
    "revisit": cmd_revisit,
    "plot": cmd_plot,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
