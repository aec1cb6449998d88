import csv
import io
import json

import pytest

from asepaw import verify
from asepaw.cli import make_parser, run_captured

TASEP = ["--alpha", "1", "--beta", "1", "--gamma", "0", "--delta", "0", "--q", "0"]
HD = ["--A", "2", "--B", "0", "--C", "0.4", "--D", "0", "--q", "0.5"]
SHOCK = ["--A", "2", "--B", "0", "--C", "1.5", "--D", "0", "--q", "0.5"]
COEX = ["--A", "2", "--B", "0", "--C", "2", "--D", "0", "--q", "0.5"]


def run_json(argv):
    code, out, err = run_captured(argv)
    assert code == 0, err
    return json.loads(out)


def test_phase_examples():
    d = run_json(["phase", *TASEP])
    assert d["phase"] == "max-current" and d["region"] == "fan"
    assert d["abcd"] == pytest.approx({"A": 0, "B": 0, "C": 0, "D": 0, "q": 0})
    d = run_json(["phase", *SHOCK])
    assert (d["phase"], d["region"]) == ("high-density", "shock")
    assert d["rates"]["alpha"] > 0
    assert run_json(["phase", *COEX])["phase"] == "coexistence-line"


def test_stationary():
    d = run_json(["stationary", *TASEP, "--n", "2"])
    assert d["probs"] == pytest.approx([0.2, 0.4, 0.2, 0.2])
    assert d["max_abs_diff"] <= 1e-12
    assert d["encoding"] == "bit i = site i+1"
    d = run_json(["stationary", "--A", "2", "--B", "0", "--C", "0.5", "--D", "0", "--q", "0.5", "--n", "3"])
    assert d["bernoulli_product"]
    code, _, err = run_captured(["stationary", *TASEP, "--n", "15"])
    assert code == 2 and "SizeCap" in err


def test_measure_and_kernel():
    d = run_json(["measure", "--A", "0.6", "--B", "-0.2", "--C", "0.5", "--D", "0", "--q", "0.4", "--t", "1"])
    assert all(a["mass"] >= 0 for a in d["atoms"]) and d["total_mass"] == pytest.approx(1)
    code, _, err = run_captured(["measure", *COEX, "--t", "1"])
    assert code == 2 and "InadmissibleTime" in err
    d = run_json(["measure", *SHOCK, "--t", "0.95"])
    assert min(a["mass"] for a in d["atoms"]) < 0
    d = run_json(["kernel", *SHOCK, "--s", "0.8", "--t", "0.9", "--x", "0.3", "--quad-nodes", "400"])
    assert d["total_mass"] == pytest.approx(1, abs=1e-8) and len(d["nodes"]) == 400


def test_pi():
    d = run_json(["pi", *SHOCK, "--ts", "0.8,0.9", "--quad-nodes", "400"])
    assert d["relative_error"] < 1e-5


def test_csv_outputs():
    code, out, _ = run_captured(["profile", *HD, "--n", "10", "--out", "csv"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["site", "x", "density", "prediction"] and len(rows) == 11
    code, out, _ = run_captured(["fluct", *HD, "--n", "20", "--xs", "0.5,1", "--out", "csv"])
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x_i", "x_j", "cov", "cov_over_n", "prediction_over_n"] and len(rows) == 5
    code, out, _ = run_captured(["asymptote", *COEX, "--ns", "100,200", "--out", "csv", "--threads", "2"])
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "log_Zn", "log_prediction", "ratio", "trend_ok"]
    assert rows[2][4] == "True"


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"abcd": {"A": 2, "B": 0, "C": 0.4, "D": 0, "q": 0.5},
                               "numeric": {"quad_nodes": 30}}))
    d = run_json(["measure", "--config", str(cfg), "--t", "1"])
    assert len(d["nodes"]) == 30
    d = run_json(["measure", "--config", str(cfg), "--t", "1", "--quad-nodes", "40", "--C", "0.3"])
    assert len(d["nodes"]) == 40 and d["params"]["c"] == pytest.approx(0.3)
    # rates on the command line replace the file's boundary parameters
    d = run_json(["phase", "--config", str(cfg), *TASEP])
    assert d["phase"] == "max-current"


def test_config_errors(tmp_path):
    code, _, err = run_captured(["phase", "--A", "2"])
    assert code == 2 and "ConfigError" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, _, err = run_captured(["phase", "--config", str(bad)])
    assert code == 2
    both = tmp_path / "both.json"
    both.write_text(json.dumps({"rates": {"alpha": 1, "beta": 1, "gamma": 0, "delta": 0},
                                "abcd": {"A": 0, "B": 0, "C": 0, "D": 0}, "q": 0}))
    code, _, err = run_captured(["phase", "--config", str(both)])
    assert code == 2 and "exactly one" in err


def test_verify_exit_codes(monkeypatch):
    code, out, err = run_captured(["verify", "--suite", "qseries"])
    assert code == 0 and json.loads(out)["passed"] and "overall: PASS" in err

    def failing():
        return verify._check("forced failure", 1.0, 0.0)

    monkeypatch.setitem(verify.SUITES, "qseries", [failing])
    code, out, err = run_captured(["verify", "--suite", "qseries"])
    assert code == 1 and "FAIL" in err


def test_help_documents_csv_columns(capsys):
    with pytest.raises(SystemExit):
        make_parser().parse_args(["profile", "--help"])
    assert "site,x,density,prediction" in capsys.readouterr().out
