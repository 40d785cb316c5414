import json

import pytest

from signorini_orlicz.cli import main
from signorini_orlicz.errors import ConfigError
from signorini_orlicz.runner import (DIAGNOSTICS_KEYS, SUITES, SUMMARY_KEYS, load_config,
                                     parse_config, run_experiment, thread_cap, verify_suite)

SIGNORINI = """
[domain]
radius = 1.0
h = {h}

[nfunction]
kind = power
p = 1

[diagnostics]
extension_check = {ext}

[run]
benchmark = signorini
output = {out}
seed = 0
"""


def write_cfg(tmp_path, name="run.ini", h=0.04, ext="false", out="out", extra=""):
    path = tmp_path / name
    path.write_text(SIGNORINI.format(h=h, ext=ext, out=out) + extra)
    return path


def test_parse_defaults(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    assert cfg.h == 0.04 and cfg.benchmark == "signorini"
    assert cfg.boundary_data().kind == "signorini_trace"
    assert cfg.output_dir == str(tmp_path / "out")
    assert cfg.diagnostics["holder"] and not cfg.diagnostics["extension_check"]


@pytest.mark.parametrize("text, key", [
    ("[nfunction]\nkind = power_log\na = 2\nb = -1\nc = 1\n[run]\nbenchmark = signorini\n", "b"),
    ("[domain]\nh = 2.0\n[run]\nbenchmark = signorini\n", "h"),
    ("[domain]\nmesh = fine\n", "mesh"),
    ("[plot]\ncolor = red\n", "plot"),
    ("[run]\nbenchmark = membrane\n", "benchmark"),
    ("[boundary]\nkind = parabola\n", "kind"),
    ("[boundary]\nkind = linear\nd = 1\n", "d"),
    ("[solver]\ntol_kkt = -1\n[run]\nbenchmark = signorini\n", "tol_kkt"),
    ("[solver]\nmax_iters = many\n[run]\nbenchmark = signorini\n", "max_iters"),
    ("[diagnostics]\nnodal = maybe\n[run]\nbenchmark = signorini\n", "nodal"),
    ("[domain]\nh = 0.1\n", "boundary"),
])
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = load_config(write_cfg(tmp, ext="true"))
    return cfg, run_experiment(cfg)


def test_run_experiment_schema(bundle):
    cfg, res = bundle
    assert res.exit_code == 0
    d = json.loads(open(res.paths["diagnostics"]).read())
    assert set(d) == set(DIAGNOSTICS_KEYS)
    assert set(d["summary"]) == set(SUMMARY_KEYS)
    s = d["summary"]
    assert s["error_linf"] <= 0.05 and s["free_boundary_offset"] <= 2 * cfg.h
    assert "beta_fit" in s
    assert d["extension"]["discrepancy_sup"] <= d["extension"]["bound"]
    solve = json.loads(open(res.paths["solve"]).read())
    assert solve["converged"] and "wall_time" not in solve
    for key in ("mesh", "field", "points"):
        assert open(res.paths[key]).readline().strip()


def test_run_experiment_deterministic(bundle, tmp_path):
    cfg, res = bundle
    cfg2 = load_config(write_cfg(tmp_path, ext="true"))
    res2 = run_experiment(cfg2)
    for key in ("diagnostics", "solve", "field", "mesh", "points"):
        assert open(res.paths[key], "rb").read() == open(res2.paths[key], "rb").read()


def test_nonconvergence_keeps_outputs(tmp_path):
    path = write_cfg(tmp_path, h=0.1, extra="\n[solver]\nmax_iters = 2\n")
    res = run_experiment(load_config(path))
    assert res.exit_code != 0
    assert not res.diagnostics["summary"]["converged"]
    for key in ("mesh", "field", "solve", "diagnostics"):
        assert open(res.paths[key]).read()


def test_verify_quick_and_faults():
    ok, results = verify_suite("quick")
    assert ok and [n for n, _ in results] == SUITES["quick"]
    ok, results = verify_suite("quick", faults=("comparison",), only={"comparison", "pre2"})
    assert not ok
    assert [n for n, r in results if not r.passed] == ["comparison"]
    with pytest.raises(ConfigError):
        verify_suite("quick", faults=("nope",))
    with pytest.raises(ConfigError):
        verify_suite("medium")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("THREADS", "1")
    assert thread_cap() == 1
    monkeypatch.setenv("THREADS", "x")
    with pytest.raises(ConfigError):
        thread_cap()


def test_cli_solve_and_analyze(tmp_path, capsys):
    path = write_cfg(tmp_path, h=0.08)
    assert main(["solve", str(path)]) == 0
    assert "converged=True" in capsys.readouterr().out
    out = tmp_path / "out"
    assert main(["analyze", str(out / "mesh.csv"), str(out / "field.csv"),
                 "-o", str(tmp_path / "a.json")]) in (0, 1)
    d = json.loads((tmp_path / "a.json").read_text())
    assert set(d) == set(DIAGNOSTICS_KEYS)


def test_cli_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[nfunction]\nkind = power_log\na = 2\nb = -1\nc = 1\n[run]\nbenchmark = signorini\n")
    assert main(["solve", str(bad)]) == 2
    assert "[b]" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.ini")]) == 2


def test_cli_check_nfunction(capsys):
    assert main(["check-nfunction", "kind=double_power, a=2, b=3, p=1, q=3"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["estimate"][0] == pytest.approx(1.0, abs=1e-5)
    assert main(["check-nfunction", "kind=power_log, a=2, b=-1, c=1"]) == 2


def test_cli_verify_fault(capsys):
    assert main(["verify", "--fault", "symmetry"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  symmetry" in out and "failing: symmetry" in out


def test_cli_convergence(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("THREADS", "2")
    path = write_cfg(tmp_path)
    assert main(["convergence", str(path), "--h=0.1,0.08", "-o", str(tmp_path / "conv")]) == 0
    rows = (tmp_path / "conv" / "convergence.csv").read_text().splitlines()
    assert rows[0].startswith("h,converged,error_linf") and len(rows) == 3
    assert "nan" not in "".join(rows)
