import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from leibniz_delay.catalog import get_entry
from leibniz_delay.cli import main, read_csv
from leibniz_delay.dde import HistoryFunction, IntegrationConfig, integrate


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def circle_csv(tmp_path):
    path = tmp_path / "circle.csv"
    rows = ["t,x1,x2"] + [f"{t},{math.cos(t)!r},{math.sin(t)!r}" for t in [2 * math.pi * k / 200 for k in range(201)]]
    path.write_text("\n".join(rows) + "\n")
    return path


class TestList:
    def test_all(self):
        code, text = run("list")
        assert code == 0
        assert len(text.strip().splitlines()) - 1 >= 10

    def test_filter(self):
        code, text = run("list", "rigid")
        names = [ln.split()[0] for ln in text.strip().splitlines()[1:]]
        assert names and all("rigid" in n for n in names)

    def test_unknown_filter(self):
        code, text = run("list", "no-such-thing")
        assert code == 0
        assert len(text.strip().splitlines()) == 1


class TestRun:
    def test_rigid_body_ignores_tau(self, tmp_path):
        out = tmp_path / "rb.csv"
        code, text = run("run", "rigid-body", "--tau", 3.0, "--t-end", 50, "--out", out)
        assert code == 0
        summary = dict(ln.split(": ", 1) for ln in text.strip().splitlines())
        assert summary["tau"] == "0"
        assert float(summary["drift.h2"]) <= 1e-8

    def test_csv_schema(self, tmp_path):
        out = tmp_path / "a.csv"
        code, _ = run("run", "rigid-body-delay-3d", "--t-end", 2, "--out", out)
        assert code == 0
        lines = out.read_text().splitlines()
        meta = [ln for ln in lines if ln.startswith("#")]
        assert any(ln.startswith("# tau: 0.5") for ln in meta)
        assert any(ln.startswith("# param.a1: 0.6") for ln in meta)
        assert any(ln.startswith("# history: constant") for ln in meta)
        header, data = read_csv(out)
        assert header == ["t", "x1", "x2", "x3"]
        assert data[0].tolist() == [0.0, 0.5, 0.5, 1.0]
        assert data[-1, 0] == pytest.approx(2.0)

    def test_round_trip_precision(self, tmp_path):
        out = tmp_path / "p.csv"
        run("run", "rigid-body-delay-3d", "--t-end", 1, "--out", out)
        _, data = read_csv(out)
        e = get_entry("rigid-body-delay-3d")
        traj = integrate(e.spec, HistoryFunction.constant([0.5, 0.5, 1.0], 0.5), IntegrationConfig(0.5, 1.0, 50))
        assert np.array_equal(data[:, 1:], traj.states)

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        out = tmp_path / "c.csv"
        cfg.write_text(f"# demo\nsystem = rigid-body-delay-1d\nparam.a1 = 0.7\ntau = 0.25\nt_end = 1\nout = {out}\n")
        code, text = run("run", "--config", cfg, "--tau", 0.5)
        assert code == 0
        assert "param.a1: 0.7" in text and "tau: 0.5" in text

    def test_polynomial_history(self, tmp_path):
        out = tmp_path / "poly.csv"
        code, text = run("run", "example-4-5", "--t-end", 1, "--history-kind", "polynomial",
                         "--history-values", "0.5 0.1; 0.5; 1 0 0.2", "--out", out)
        assert code == 0
        assert "history: polynomial" in text

    def test_literal_flag(self, tmp_path):
        code, text = run("run", "revisited-rigid-body", "--literal", "--t-end", 1, "--out", tmp_path / "l.csv")
        assert code == 0 and "literal: true" in text
        code, _ = run("run", "rigid-body", "--literal", "--t-end", 1, "--out", tmp_path / "l.csv")
        assert code == 3

    @pytest.mark.parametrize(
        "argv,code",
        [
            (["run", "rigid-body", "--t-end", 0], 3),
            (["run", "rigid-body", "--t-end", -5], 3),
            (["run", "no-such-system"], 2),
            (["run", "three-wave", "--param", "g3=1"], 3),
            (["run", "rigid-body", "--param", "zeta=1"], 3),
            (["run", "rigid-body", "--history-values", "1,2"], 3),
            (["run", "rigid-body", "--steps-per-delay", "x"], 3),
            (["bogus"], 3),
        ],
    )
    def test_errors(self, tmp_path, argv, code):
        if argv[0] == "run":
            argv = argv + ["--out", tmp_path / "x.csv"]
        assert run(*argv)[0] == code

    def test_blow_up(self, tmp_path, capsys):
        # with the default delay and history this solution escapes near t = 60
        code, _ = run("run", "example-4-5", "--out", tmp_path / "b.csv")
        assert code == 4
        assert "blow-up at t = 60.1" in capsys.readouterr().err

    def test_malformed_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("system rigid-body\n")
        assert run("run", "--config", cfg)[0] == 5
        cfg.write_text("colour = red\n")
        assert run("run", "--config", cfg)[0] == 5


class TestCheck:
    def test_single_system(self):
        code, text = run("check", "three-wave-delay", "--trials", 20)
        assert code == 0
        assert json.loads(text)["passed"] is True

    def test_planted_typo(self):
        code, text = run("check", "rigid-body", "--trials", 20, "--plant-typo", 1e-3)
        assert code == 1
        report = json.loads(text)
        failing = report["systems"]["rigid-body+perturbed"]["failing"]
        assert "structure: P x = 0" in failing

    def test_unknown(self):
        assert run("check", "nope")[0] == 2


class TestRevisit:
    def test_rigid_body(self):
        code, text = run("revisit", "rigid-body")
        report = json.loads(text)
        assert report["annihilation_residual"] <= 1e-12
        assert report["diff_metric"]["matches"]
        assert len(report["g_samples"]) == 3

    def test_example_diff_emitted(self):
        code, text = run("revisit", "example-4-5")
        report = json.loads(text)
        assert code == 0
        assert "diff_field" in report and "componentwise" in report["diff_field"]

    def test_constant_function_warns(self):
        code, text = run("revisit", "rigid-body", "--constant-h", "--show", 1)
        assert code == 0
        assert text.startswith("warning:")
        report = json.loads(text[text.index("{"):])
        assert all(v == 0 for row in report["g_samples"][0]["g"] for v in row)

    def test_no_revisit_data(self):
        assert run("revisit", "three-wave")[0] == 3


class TestPlot:
    def test_circle(self, circle_csv, tmp_path):
        out = tmp_path / "c.svg"
        code, _ = run("plot", circle_csv, "--axes", "x1,x2", "--out", out)
        assert code == 0
        svg = out.read_text()
        pts = [tuple(map(float, p.split(","))) for p in svg.split('points="')[1].split('"')[0].split()]
        xs, ys = zip(*pts)
        assert (max(xs) - min(xs)) == pytest.approx(max(ys) - min(ys), rel=1e-3)
        assert pts[0] == pytest.approx(pts[-1], abs=1e-3)

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("t,x1,x2\n0,1,2\n")
        out = tmp_path / "one.svg"
        assert run("plot", path, "--out", out)[0] == 0
        assert "<circle" in out.read_text()

    def test_three_axes_depth_shading(self, tmp_path):
        path = tmp_path / "h.csv"
        rows = ["t,x1,x2,x3"] + [f"{k},{math.cos(k / 5)},{math.sin(k / 5)},{k / 50}" for k in range(50)]
        path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "h.svg"
        assert run("plot", path, "--axes", "x1,x2,x3", "--out", out)[0] == 0
        shades = [int(c.split(",")[0]) for c in out.read_text().split('stroke="rgb(')[1:]]
        assert len(shades) == 49
        assert shades[0] > 190 and shades[-1] < 10

    def test_deterministic(self, circle_csv, tmp_path):
        run("plot", circle_csv, "--out", tmp_path / "a.svg")
        run("plot", circle_csv, "--out", tmp_path / "b.svg")
        assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()

    @pytest.mark.parametrize(
        "content", ["", "x,y\n1,2\n", "t,x1\n0,abc\n", "t,x1\n0,1,2\n", "t,x1\n"],
        ids=["empty", "bad-header", "non-numeric", "ragged", "no-rows"],
    )
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content)
        assert run("plot", path, "--out", tmp_path / "bad.svg")[0] == 5

    def test_unknown_column(self, circle_csv, tmp_path):
        assert run("plot", circle_csv, "--axes", "x1,x9", "--out", tmp_path / "u.svg")[0] == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "leibniz_delay", "list", "three"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "three-wave-delay" in res.stdout
