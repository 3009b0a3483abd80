import json
import time

import pytest
from click.testing import CliRunner

from cubiccrit.cli import RunConfig, main


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args, env=None):
        return runner.invoke(main, list(args), env=env, catch_exceptions=False)
    return go


def test_curve_info_tau0(run):
    r = run("curve-info", "--tau", "0")
    assert r.exit_code == 0
    d = json.loads(r.output)
    assert d["schema"] == "cubiccrit/curve-info/1"
    assert d["a1"] == pytest.approx(3 ** (2 / 3) / 4, abs=1e-10)
    assert d["b1"] == pytest.approx(3 ** (2 / 3) / 4, abs=1e-10)
    assert d["regime"] == "precritical"


def test_curve_info_merge(run):
    d = json.loads(run("curve-info", "--tau", "1/12").output)
    assert d["degenerate_merge"] is True
    d = json.loads(run("curve-info", "--tau", "0.1").output)
    assert d["degenerate_merge"] is False


@pytest.mark.parametrize("tau", ["0.3", "-0.1", "abc"])
def test_domain_exit_code(run, tau):
    assert run("curve-info", "--tau", tau).exit_code == 2


def test_widths_small_grid(run):
    t0 = time.perf_counter()
    r = run("widths", "--grid-n", "10")
    assert time.perf_counter() - t0 < 5.0
    assert r.exit_code == 0
    lines = r.output.splitlines()
    assert lines[0].startswith("# cubiccrit 0.1.0 widths schema 1")
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "tau,omega1,omega2,omega3,omega4"
    assert len(body) == 11


def test_widths_deterministic(run):
    a = run("widths", "--grid-n", "4", "--nodes-m", "500", "--format", "json").output
    b = run("widths", "--grid-n", "4", "--nodes-m", "500", "--format", "json").output
    assert a == b
    assert len(json.loads(a)["rows"]) == 4


def test_config_file_and_flag_precedence(run, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nn = 3\nm = 400\n")
    d = json.loads(run("--config", str(cfg), "widths", "--format", "json").output)
    assert (d["n"], d["m"]) == (3, 400)
    d = json.loads(run("--config", str(cfg), "widths", "--grid-n", "2", "--format", "json").output)
    assert (d["n"], d["m"]) == (2, 400)
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run("--config", str(bad), "widths").exit_code != 0


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CUBICCRIT_THREADS", "3")
    assert RunConfig.load(None).threads == 3


def test_critical_taus_tol_domain(run):
    assert run("critical-taus", "--tol", "1e-12").exit_code == 2


def test_supports_precritical_empty_mu3(run, tmp_path):
    out = tmp_path / "s"
    r = run("supports", "--tau", "0.126", "--nodes", "200", "--out", str(out))
    assert r.exit_code == 0
    mu3 = (out / "mu3.csv").read_text().splitlines()
    assert [ln for ln in mu3 if not ln.startswith("#")] == ["re_s,im_s,density"]
    assert len((out / "mu1.csv").read_text().splitlines()) > 100
    s = json.loads((out / "summary.json").read_text())
    assert [c["empty"] for c in s["components"]] == [False, False, True]


def test_supports_deterministic(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("supports", "--tau", "0.2", "--nodes", "200", "--out", str(a))
    run("supports", "--tau", "0.2", "--nodes", "200", "--out", str(b))
    for name in ("mu1.csv", "mu2.csv", "mu3.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_graph_svg(run, tmp_path):
    out = tmp_path / "g.svg"
    r = run("graph", "--tau", "0.04", "--out", str(out))
    assert r.exit_code == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[1].startswith("<!-- cubiccrit 0.1.0")
    assert text.count("<g id=\"sheet") == 3
    # the short trajectory between a2 and b2 is drawn on the second panel
    assert 'data-edge="a2^(2) -- b2^(2)" data-sheet="2"' in text


def test_graph_json(run):
    d = json.loads(run("graph", "--tau", "0.1", "--format", "json").output)
    assert d["failures"] == []
    assert d["prong_defects"] == {}
    assert "a2^(2) -- b2^(2)" in d["edges"]


def test_trace_command(run):
    r = run("trace", "--tau", "0.1", "--seed", "a2^(2):0")
    assert r.exit_code == 0
    lines = r.stdout.splitlines()
    assert lines[1] == "vertex,direction,index,re_z,im_z,sheet"
    assert all(ln.startswith("a2^(2),0,") for ln in lines[2:])
    summary = json.loads(r.stderr)
    assert summary["trajectories"][0]["vertex"] == "a2^(2)"
    assert run("trace", "--tau", "0.1", "--seed", "zz^(9)").exit_code == 2
    assert run("trace", "--tau", "0.1", "--seed", "a2^(2):9").exit_code == 2


def test_sweep(run, tmp_path):
    out = tmp_path / "sw"
    r = run("sweep", "--tau-from", "0.04", "--tau-to", "0.05", "--count", "2", "--out", str(out))
    assert r.exit_code == 0
    assert len(list(out.glob("*.svg"))) == 2


def test_verify_supercritical(run):
    r = run("verify", "--tau", "0.2")
    assert r.exit_code == 0
    d = json.loads(r.output)
    assert d["ok"] is True
    assert all(c["ok"] for c in d["checks"].values())


def test_verify_failure_exit_code(run):
    # an impossible equality tolerance makes the report fail
    assert run("verify", "--tau", "0.1", "--tol", "1e-15", "--nodes", "400").exit_code == 1


def test_version(run):
    assert "0.1.0" in run("--version").output
