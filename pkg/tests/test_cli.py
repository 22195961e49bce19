import csv
import json

import pytest

from impsobol.cli import main

from conftest import CONFIGS


def _config(tmp_path, name="f1", **edits):
    raw = json.loads((CONFIGS / f"{name}.json").read_text())
    for key, value in edits.items():
        section, _, field = key.partition("__")
        if field:
            raw.setdefault(section, {})[field] = value
        else:
            raw[section] = value
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(raw))
    return path


def test_bounds_f1(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["bounds", "--config", str(CONFIGS / "f1.json"), "--output-dir", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    for name in ("x1", "x2"):
        lo, hi = res["indices"][name]["first"]
        assert lo == pytest.approx(0.0, abs=1e-3) and hi == pytest.approx(0.8, abs=1e-3)
    assert res["n_evaluations"] == 50 and res["design_rows"] == 500
    assert "model evaluations: 50" in capsys.readouterr().out
    rows = list(csv.DictReader((out / "barplot.csv").open()))
    assert [r["input"] for r in rows] == ["x1", "x2"]
    assert (out / "impact_epistemic.csv").exists() and (out / "design.csv").exists()


def test_reruns_are_byte_identical(tmp_path):
    cfg = _config(tmp_path, validation__n=0)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bounds", "--config", str(cfg), "--output-dir", str(a)]) == 0
    assert main(["bounds", "--config", str(cfg), "--output-dir", str(b)]) == 0
    for name in ("results.json", "design.csv", "barplot.csv", "impact_epistemic.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_override(tmp_path):
    cfg = _config(tmp_path, validation__n=0)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["fit", "--config", str(cfg), "--output-dir", str(a)]) == 0
    assert main(["fit", "--config", str(cfg), "--output-dir", str(b), "--seed", "8"]) == 0
    assert (a / "design.csv").read_bytes() != (b / "design.csv").read_bytes()


def test_fit_reports_ten_terms(tmp_path, capsys):
    out = tmp_path / "fit"
    assert main(["fit", "--config", str(CONFIGS / "f1.json"), "--output-dir", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    assert res["pce"]["n_terms"] == 10
    assert res["pce"]["loo"] < 1e-10
    assert "10 terms" in capsys.readouterr().out


def test_default_output_dir_is_relative_to_config(tmp_path):
    cfg = _config(tmp_path, validation__n=0, outputs={"dir": "here", "formats": ["json"]})
    assert main(["fit", "--config", str(cfg)]) == 0
    assert (tmp_path / "here" / "results.json").exists()
    assert not (tmp_path / "here" / "design.csv").exists()


def test_validate_f1(tmp_path, capsys):
    cfg = _config(tmp_path, validation__n=0, oracle={"n": 20000, "grid": 3, "seed": 1})
    out = tmp_path / "v"
    assert main(["validate", "--config", str(cfg), "--output-dir", str(out)]) == 0
    rows = list(csv.DictReader((out / "validate.csv").open()))
    assert len(rows) == (1 + 3**4) * 2 * 2
    ok = sum(r["within_3se"] == "True" for r in rows)
    assert ok >= 0.95 * len(rows)
    assert "surrogate within 3 SE" in capsys.readouterr().out


def test_missing_config(tmp_path, capsys):
    out = tmp_path / "never"
    assert main(["bounds", "--config", str(tmp_path / "nope.json"), "--output-dir", str(out)]) == 1
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


@pytest.mark.parametrize("edit", [
    {"model": "nope"},
    {"design": {"N": 1}},
    {"design": {"N": 10, "bogus": 1}},
    {"inputs": [{"name": "x1", "family": "gaussian", "params": {"mean": 0.0, "std": -1.0}},
                {"name": "x2", "family": "gaussian", "params": {"mean": 0.0, "std": 1.0}}]},
])
def test_config_errors(tmp_path, edit):
    cfg = _config(tmp_path, **edit)
    assert main(["fit", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["fit", "--config", str(p)]) == 1


def test_numerical_failure(tmp_path, capsys):
    truss = json.loads((CONFIGS.parent / "src" / "impsobol" / "data" / "pratt_truss.json").read_text())
    truss["supports"] = truss["supports"][:0]
    (tmp_path / "loose.json").write_text(json.dumps(truss))
    cfg = _config(tmp_path, "truss", model="truss:loose.json", validation__n=0)
    assert main(["fit", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 2
    assert "numerical failure in models" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_bundled_configs_parse():
    from impsobol.config import AnalysisConfig

    for name in ("f1", "sdof", "truss"):
        cfg = AnalysisConfig.from_file(CONFIGS / f"{name}.json")
        assert cfg.N >= 50
