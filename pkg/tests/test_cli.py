import json
from pathlib import Path

import numpy as np
import pytest

from ptflow import cli
from ptflow.io import RunManifest, dumps_json, read_csv, sha256_file, svg_line_plot


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_configs_listed():
    names = cli.bundled_configs()
    for n in ("fig1a.cfg", "fig1b.cfg", "fig1c.cfg", "figS2.cfg", "scan_unbroken.cfg", "scan_broken.cfg"):
        assert n in names


@pytest.mark.parametrize("name", [n for n in cli.bundled_configs()])
def test_bundled_configs_validate(name):
    cfg, _ = cli.load_config(cli.resolve_config(name))
    assert cfg["schema_version"] == cli.SCHEMA_VERSION


def test_run_fig1a(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "fig1a", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    for rec in summary["runs"]:
        T = np.pi / np.sqrt(1 - rec["a"] ** 2)
        assert rec["recurrence_time"] == pytest.approx(T, rel=1e-3)
    assert (out / "distinguishability.svg").read_text().startswith("<svg")
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"D_a0.25.csv", "D_a0.5.csv", "D_a0.75.csv", "summary.json", "distinguishability.svg"}
    for name, digest in manifest["outputs"].items():
        assert sha256_file(out / name) == digest
    assert manifest["config_sha256"] == sha256_file(cli.resolve_config("fig1a"))


def test_run_fig1c_entropy_period(tmp_path):
    out = tmp_path / "c"
    assert cli.main(["run", "fig1c", "--out", str(out), "--no-plots"]) == 0
    s = json.loads((out / "summary.json").read_text())
    a = 0.75
    T_E = np.pi / (2 * np.sqrt(1 - a * a))
    assert s["entropy_period"] == pytest.approx(T_E, rel=1e-2)
    assert s["distinguishability_period"] == pytest.approx(2 * T_E, rel=1e-2)
    assert s["postselection_max_error"] < 1e-8
    table = read_csv(out / "entropy.csv")
    assert set(table) == {"t", "S1", "S2", "D"}


def test_deterministic_outputs(tmp_path):
    cfg = write(
        tmp_path,
        "r.cfg",
        "schema_version: 1\nkind: twolevel-series\na: [0.3, 1.5]\nt_max: 5\nsteps: 200\nstates: random\nseed: 7\n",
    )
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(cfg), "--out", str(a)]) == 0
    assert cli.main(["run", str(cfg), "--out", str(b)]) == 0
    for f in a.iterdir():
        if f.suffix in (".csv", ".json") and f.name != "manifest.json":
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_scan_then_fit(tmp_path, capsys):
    cfg = write(
        tmp_path,
        "s.cfg",
        "schema_version: 1\nkind: scan\nmodel: {kind: two_level, s: 1.0}\nparameter: a\nlam_ep: 1.0\n"
        "side: below\nobservables: [RecurrenceT]\n",
    )
    out = tmp_path / "s"
    assert cli.main(["run", str(cfg), "--out", str(out), "--threads", "2"]) == 0
    fits = json.loads((out / "fits.json").read_text())
    assert fits["fits"]["RecurrenceT"]["exponent"] == pytest.approx(-0.5, abs=0.02)
    capsys.readouterr()
    assert cli.main(["fit", str(out / "scan_RecurrenceT.csv"), "--kind", "power", "--lam-ep", "1"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["exponent"] == pytest.approx(-0.5, abs=0.02)


def test_fit_synthetic_power(tmp_path, capsys):
    x = np.geomspace(1e-3, 1e-1, 10)
    lines = ["x,y"] + [f"{a:.17g},{2.5 * a ** -0.75:.17g}" for a in x]
    p = write(tmp_path, "p.csv", "\n".join(lines) + "\n")
    out = tmp_path / "fit.json"
    assert cli.main(["fit", str(p), "--kind", "power", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["exponent"] == pytest.approx(-0.75, abs=1e-9)
    assert res["window"] == pytest.approx([1e-3, 1e-1])


def test_fit_exponential(tmp_path, capsys):
    t = np.linspace(0, 5, 50)
    lines = ["t,D"] + [f"{a:.17g},{np.exp(-a / 0.4):.17g}" for a in t]
    p = write(tmp_path, "e.csv", "\n".join(lines) + "\n")
    assert cli.main(["fit", str(p), "--kind", "exp"]) == 0
    assert json.loads(capsys.readouterr().out)["tau"] == pytest.approx(0.4)


def test_fit_constant_csv_is_numeric_error(tmp_path, capsys):
    p = write(tmp_path, "c.csv", "x,y\n" + "".join(f"{i},3\n" for i in range(1, 12)))
    assert cli.main(["fit", str(p), "--kind", "power"]) == 2
    assert "FitUnstable" in capsys.readouterr().err


def test_malformed_config_points_at_line(tmp_path, capsys):
    p = write(tmp_path, "bad.cfg", "schema_version: 1\nkind: twolevel-series\na: [0.5]\nsteps: -3\n")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "x")]) == 1
    err = capsys.readouterr().err
    assert "bad.cfg:4:" in err and "steps" in err


def test_yaml_syntax_error(tmp_path, capsys):
    p = write(tmp_path, "bad.cfg", "schema_version: 1\nkind: scan\nmodel: {kind: two_level\n")
    assert cli.main(["run", str(p)]) == 1
    assert "bad.cfg:" in capsys.readouterr().err


def test_unknown_kind_and_version(tmp_path, capsys):
    p = write(tmp_path, "v.cfg", "schema_version: 2\nkind: nonsense\n")
    assert cli.main(["run", str(p)]) == 1
    err = capsys.readouterr().err
    assert "v.cfg:1:" in err and "v.cfg:2:" in err


def test_missing_config(capsys):
    assert cli.main(["run", "no_such_config_anywhere"]) == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads(None) == 3
    assert cli._threads(2) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    with pytest.raises(cli.ConfigError):
        cli._threads(None)


def test_numeric_failure_exit_code(tmp_path, capsys):
    # the metric does not exist in the broken phase
    p = write(tmp_path, "e.cfg", "schema_version: 1\nkind: embed\nmodel: {kind: two_level, a: 1.5}\nt_max: 1\n")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "e")]) == 2
    assert "BrokenPhase" in capsys.readouterr().err


def test_fit_config_kind(tmp_path):
    x = np.geomspace(1, 100, 8)
    data = write(tmp_path, "d.csv", "x,y\n" + "".join(f"{a:.17g},{a ** 2:.17g}\n" for a in x))
    cfg = write(tmp_path, "f.cfg", f"schema_version: 1\nkind: fit\ncsv: {data.name}\nfit_kind: power\n")
    out = cli.run(cfg, tmp_path / "f")
    assert json.loads((out / "fit.json").read_text())["exponent"] == pytest.approx(2.0)


def test_optics_config_small(tmp_path):
    cfg = write(
        tmp_path,
        "o.cfg",
        "schema_version: 1\nkind: optics\nvariants: [different_widths]\nN: 1024\nL: 100.53096491487338\n"
        "z_max: 10\nw: 9.42477796076938\nsnapshots: true\n",
    )
    out = cli.run(cfg, tmp_path / "o")
    m = RunManifest(**{k: v for k, v in json.loads((out / "manifest.json").read_text()).items()})
    assert m.verify(out)
    meta = json.loads((out / "different_widths_beam1.f64.json").read_text())
    assert meta["N"] == 1024 and meta["byte_order"] == "little"


def test_io_helpers(tmp_path):
    assert json.loads(dumps_json({"b": float("nan"), "a": np.arange(2)})) == {"a": [0, 1], "b": None}
    assert list(json.loads(dumps_json({"b": 1, "a": 2}))) == ["a", "b"]
    svg = svg_line_plot([("c", np.array([1.0, 10.0]), np.array([1.0, 0.1]))], "x", "y", logx=True, logy=True)
    assert "<polyline" in svg and svg.rstrip().endswith("</svg>")
    p = write(tmp_path, "t.csv", "a,b,phase\n1,2,Unbroken\n")
    t = read_csv(p)
    assert t["a"][0] == 1 and np.isnan(t["phase"][0])
