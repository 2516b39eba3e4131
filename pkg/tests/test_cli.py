import json

import pytest

from wreathlab.cli import format_state, main, parse_state
from wreathlab.config import ConfigError, parse_config
from wreathlab.lamp import stock_lamp_graph


def run(tmp_path, *argv):
    code = main([*argv, "--out", str(tmp_path)])
    return code, json.loads((tmp_path / f"{argv[0]}.json").read_text()) if code != 2 else None


def test_ball_report(tmp_path):
    code, doc = run(tmp_path, "ball", "--model", "z2", "--radius", "3")
    assert code == 0
    assert doc["schema"] == "wreathlab.report/1" and doc["results"]["vertices"] == 25
    assert doc["inputs"]["model"] == "z2" and doc["ok"]
    assert (tmp_path / "ball.txt").read_text().splitlines()[-1] == "overall: PASS"


def test_distance_engines_agree(tmp_path):
    code, doc = run(tmp_path, "dist", "--model", "z2wr_z_z2", "--engine", "both",
                    "--source", "@0,0", "--target", "2=1@0,0")
    assert code == 0
    assert doc["results"]["engines"]["bfs"]["value"] == doc["results"]["engines"]["zone-tsp"]["value"] == 5
    assert doc["verdicts"]["engines_agree"]


def test_certificate_replay_and_tampering(tmp_path):
    code, _ = run(tmp_path, "certify-qi", "--map", "cor18_gamma", "--map-params", '{"m": 2, "r": 2}',
                  "--radius", "6", "--C-max", "2", "--K-max", "0")
    assert code == 0
    cert = tmp_path / "certify-qi.certificate.json"
    assert main(["replay", str(cert), "--out", str(tmp_path)]) == 0
    doc = json.loads(cert.read_text())
    doc["samples"]["histogram"][2][2] += 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["replay", str(bad), "--out", str(tmp_path)]) == 1


def test_verdict_failure_exits_one(tmp_path):
    code, doc = run(tmp_path, "ball", "--radius", "3", "--expect-vertices", "24")
    assert code == 1 and not doc["ok"]


def test_pairs_constant_failure_is_reported(tmp_path):
    code, doc = run(tmp_path, "certify-pairs", "--map", "cor18_gamma", "--map-params", '{"m": 2, "r": 3}',
                    "--Q-max", "1")
    assert code == 1 and doc["results"]["Q"] == 2


def test_reports_are_byte_identical_on_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["certify-scaling", "--rule", "lift_floor_half", "--seed", "4", "--out", str(out)]) == 0
    assert (a / "certify-scaling.json").read_bytes() == (b / "certify-scaling.json").read_bytes()


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# three-dimensional ball\nmodel = z3\nradius: 2\nexpect-vertices = 25\n")
    out = tmp_path / "o"
    assert main(["ball", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["ball", "--config", str(cfg), "--radius", "1", "--out", str(out)]) == 1


@pytest.mark.parametrize("text", ["modle = z3\n", "radius = two\n", "[other]\nradius = 1\n", "radius\n"])
def test_bad_config_exits_two(tmp_path, text, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["ball", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_input_exits_two(tmp_path):
    assert main(["ball", "--model", "q8", "--out", str(tmp_path)]) == 2
    assert main(["dist", "--target", "2=1@0", "--out", str(tmp_path)]) == 2
    assert main(["ball", "--radius"]) == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("WREATHLAB_OUT", str(tmp_path / "env"))
    assert main(["ball", "--radius", "1"]) == 0
    assert (tmp_path / "env" / "ball.json").exists()


def test_state_syntax_round_trips():
    g = stock_lamp_graph("z2wr_z_z2")
    for text in ("@0,0", "2=1@0,0", "-3=1;1=1@2,-2"):
        assert format_state(parse_state(g, text)) == text


def test_parse_config_normalises_keys():
    assert parse_config("map-params = {}\nC_max: 2\n") == {"map_params": "{}", "C_max": "2"}
    with pytest.raises(ConfigError):
        parse_config("[x]\n")


@pytest.mark.parametrize("argv", [
    ["coneoff", "--radius", "3", "--pairs", "0,0:0,3"],
    ["map-apply", "--map", "example48", "--points", "@-1,0|1=1@2,2"],
    ["certify-scaling", "--rule", "double"],
    ["certify-scaling", "--rule", "n_to_one", "--model", "f2", "--radius", "3", "--n", "2", "--Q", "1"],
    ["qm-validate", "--spec", "path3"],
    ["hyperplanes", "--spec", "edge"],
    ["box-model-check", "--desk", "z2", "--section", "twisted"],
    ["lamp-coneoff-check", "--radius", "1"],
])
def test_other_commands_pass(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == 0
    assert (tmp_path / f"{argv[0]}.txt").exists()
