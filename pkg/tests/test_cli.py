import numpy as np
import pytest

from gfmplace.cli import main
from gfmplace.config import ConfigError, fixture_path, load_converters, load_network

NET = str(fixture_path("two_area.yaml"))
CONV = str(fixture_path("converters.yaml"))
NET39 = str(fixture_path("ieee39.yaml"))


def _rows(p):
    return [r for r in p.read_text().splitlines() if not r.startswith("#")]


def test_reduce(tmp_path, capsys):
    assert main(["reduce", "--network", NET, "--out", str(tmp_path)]) == 0
    assert "gSCR 3.0024" in capsys.readouterr().out
    text = (tmp_path / "qred.csv").read_text()
    assert "sha256 network two_area.yaml" in text
    assert len(_rows(tmp_path / "qred.csv")) == 5


def test_reduce_39(tmp_path, capsys):
    assert main(["reduce", "--network", NET39, "--out", str(tmp_path)]) == 0
    assert "gSCR 3.3100" in capsys.readouterr().out


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("GFMPLACE_OUT", str(tmp_path / "envout"))
    assert main(["reduce", "--network", NET]) == 0
    assert (tmp_path / "envout" / "qred.csv").exists()


def test_malformed_line(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("buses:\n  - {id: 1, kind: converter}\n  - {id: 2, kind: infinite}\nlines:\n  - {from: 1, to: 2}\n")
    assert main(["reduce", "--network", str(bad), "--out", str(tmp_path)]) == 3
    assert "bad.yaml:5" in capsys.readouterr().err


def test_missing_bus_reference(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("buses:\n  - {id: 1, kind: converter}\n  - {id: 2, kind: infinite}\n"
                   "lines:\n  - {from: 1, to: 2, x: 0.1}\n  - {from: 1, to: 7, x: 0.1}\n")
    assert main(["reduce", "--network", str(bad), "--out", str(tmp_path)]) == 3
    assert "bad.yaml:6" in capsys.readouterr().err


def test_place(tmp_path, capsys):
    assert main(["place", "--network", NET, "--q", "2", "--method", "enumeration", "--out", str(tmp_path)]) == 0
    assert "chosen: 3, 4" in capsys.readouterr().out
    assert main(["place", "--network", NET, "--q", "2", "--method", "greedy-participation", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "node 3: 0.6231" in out and "node 4: 0.8103" in out


def test_place_usage_and_cap(tmp_path):
    assert main(["place", "--network", NET, "--q", "4", "--out", str(tmp_path)]) == 2
    assert main(["place", "--network", NET39, "--q", "4", "--method", "enumeration", "--cap", "5",
                 "--out", str(tmp_path)]) == 4


def test_eig(tmp_path, capsys):
    assert main(["eig", "--network", NET, "--converters", CONV, "--out", str(tmp_path)]) == 0
    for c in ("case1", "case2", "case3"):
        assert (tmp_path / f"eig_{c}.csv").exists()
    assert main(["eig", "--network", NET, "--converters", CONV, "--all-pll", "--decoupled", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "roots_all-pll.csv")) == 1 + 56


def test_eig_empty_case_list(tmp_path):
    manifest = tmp_path / "cases.yaml"
    manifest.write_text("cases: []\n")
    assert main(["eig", "--network", NET, "--converters", CONV, "--cases", str(manifest), "--out", str(tmp_path)]) == 2


def test_bode_dlambda(tmp_path, capsys):
    args = ["bode-dlambda", "--network", NET, "--converters", CONV, "--gfm", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    assert len(_rows(tmp_path / "dlambda_3.csv")) == 201
    assert main(args + ["--points", "1"]) == 0
    assert len(_rows(tmp_path / "dlambda_3.csv")) == 2
    assert main(args + ["--band", "200,1"]) == 2


def test_simulate_with_manifest(tmp_path, capsys):
    manifest = tmp_path / "cases.yaml"
    manifest.write_text("cases:\n  - {name: c3, gfm_nodes: [3, 4]}\n")
    assert main(["simulate", "--network", NET, "--converters", CONV, "--cases", str(manifest),
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "trace_c3.csv")
    assert rows[0] == "t,dP_1,dP_2,dP_3,dP_4"
    assert "sha256 cases" in (tmp_path / "trace_c3.csv").read_text()


def test_outputs_are_idempotent(tmp_path):
    for d in ("a", "b"):
        main(["eig", "--network", NET, "--converters", CONV, "--gfm", "3", "--out", str(tmp_path / d)])
    assert (tmp_path / "a" / "eig_custom.csv").read_bytes() == (tmp_path / "b" / "eig_custom.csv").read_bytes()


def test_unknown_gfm_node(tmp_path):
    assert main(["eig", "--network", NET, "--converters", CONV, "--gfm", "9", "--out", str(tmp_path)]) == 2


def test_no_command():
    assert main([]) == 2


def test_load_network_reactance_to_susceptance():
    spec = load_network(NET)
    b = {frozenset((ln.i, ln.j)): ln.b for ln in spec.lines}
    assert b[frozenset((1, 5))] == pytest.approx(10.0)
    assert spec.tau == 0.1


def test_load_converters():
    c = load_converters(CONV)
    assert c.pll.pi_pll == (104.0, 5390.0)
    assert c.gfm.j == 2.0
    assert [k.name for k in c.cases] == ["case1", "case2", "case3"]
    assert load_converters(fixture_path("converters_ieee39.yaml")).pll.pi_pll == (147.0, 10773.0)


def test_unknown_parameter(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("pll:\n  lf: 0.05\n  bogus: 1\n")
    with pytest.raises(ConfigError, match="c.yaml:2.*bogus"):
        load_converters(p)


def test_yaml_syntax_error(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("pll: [\n")
    with pytest.raises(ConfigError, match="syntax"):
        load_converters(p)
