import csv
import json
import os

import pytest

from spintau.cli import ConfigParse, RunConfig, main, write_series_csv

HERE = os.path.dirname(os.path.abspath(__file__))
LEMNISCATIC = os.path.join(HERE, "..", "curves", "lemniscatic.json")


def test_picard_report(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["picard", "--g", "3", "--out", out]) == 0
    line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    with open(line["report"]) as fh:
        doc = json.load(fh)
    assert doc["result"]["Z_g"] == {"lambda": "11", "alpha0": "-5/4", "alpha1": "-4", "beta0": "-2", "beta1": "-2"}
    assert doc["result"]["Theta_null"]["alpha0"] == "-1/16"


def test_reports_are_deterministic_and_append_only(tmp_path):
    out = str(tmp_path)
    main(["picard", "--g", "4", "--out", out])
    main(["picard", "--g", "4", "--out", out])
    reports = sorted(f for f in os.listdir(out) if not f.endswith(".meta.json"))
    assert len(reports) == 1
    meta = [f for f in os.listdir(out) if f.endswith(".meta.json")]
    with open(os.path.join(out, meta[0])) as fh:
        assert len(json.load(fh)) == 2
    main(["picard", "--g", "5", "--out", out])
    assert len([f for f in os.listdir(out) if not f.endswith(".meta.json")]) == 2


def test_periods_lemniscatic(tmp_path, capsys):
    assert main(["periods", "--curve", LEMNISCATIC, "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out.strip().splitlines()[-1])["report"]
    with open(rep) as fh:
        om = json.load(fh)["result"]["Omega"]
    assert abs(om[0][0][0]) < 1e-10 and abs(om[0][0][1] - 1) < 1e-10


def test_theta_command(tmp_path):
    assert main(["theta", "--curve", LEMNISCATIC, "--eta", "00", "--out", str(tmp_path)]) == 0


def test_bad_configs(tmp_path, capsys):
    assert main(["picard", "--tol", "-1", "--out", str(tmp_path)]) == 2
    assert "ConfigParse" in capsys.readouterr().err
    assert main(["degenerate", "--grid", "1e-2,2,6", "--out", str(tmp_path)]) == 2
    assert main(["spinor", "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "picard", "colour": "red"}))
    assert main(["picard", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    with pytest.raises(ConfigParse):
        RunConfig.from_dict({"command": "plot"})


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "picard", "g": 6, "out": str(tmp_path)}))
    assert main(["picard", "--config", str(cfg)]) == 0
    assert any(f.startswith("picard-") for f in os.listdir(tmp_path))


def test_csv_columns(tmp_path):
    p = write_series_csv(str(tmp_path / "s.csv"), [1e-2, 5e-3], [1e-4, 2.5e-5], slope=2.0, intercept=0.0)
    with open(p) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "value_re", "value_im", "abs", "fitted_slope", "residual"]
    assert abs(float(rows[1][5])) < 1e-12
