import json
import subprocess
import sys

import pytest

from jacobi_workbench.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from jacobi_workbench.config import ConfigError, ExperimentConfig, FieldSpec, build_field, parse_config
from jacobi_workbench.sphere import make_grid


def _write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_defaults_round_trip():
    cfg = parse_config("")
    assert cfg == ExperimentConfig()
    assert parse_config(cfg.to_yaml()) == cfg


def test_overrides_and_merged_tolerances():
    cfg = parse_config("n: 3\ntolerances: {eigen: 0.01}\n", overrides={"seed": 9, "threads": None})
    assert cfg.n == 3 and cfg.seed == 9 and cfg.threads == 1
    assert cfg.tolerances["eigen"] == 0.01
    assert cfg.tolerances["lemma_rel"] == 1e-7


def test_unknown_key_reports_its_line():
    with pytest.raises(ConfigError) as info:
        parse_config("n: 2\nbogus: 1\n", path="x.yaml")
    assert info.value.line == 2
    assert "x.yaml:2" in str(info.value)
    assert "bogus: 1" in str(info.value)


@pytest.mark.parametrize(
    "text",
    ["n: two\n", "resolution: 2\n", "operator: other\n", "f: {params: {}}\n", "- 1\n", "n: [1\n", "tolerances: {nope: 1}\n"],
)
def test_invalid_configs_raise(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_build_field_types():
    grid = make_grid(2, 8)
    pts = grid.unit_points
    zonal = build_field(FieldSpec("zonal", {"modes": [[1, 0.3], [2, 1.0]]}), 2)
    harm = build_field(FieldSpec("harmonic", {"modes": [[2, 1, 3.0]]}), 2)
    expr = build_field(FieldSpec("expression", {"expr": "x0*x2 + 0.5"}), 2)
    rand = build_field(FieldSpec("random", {"band": 3, "seed": 1}), 2)
    assert expr.value(pts) == pytest.approx(pts[:, 0] * pts[:, 2] + 0.5)
    for f in (zonal, harm, rand):
        assert f.value(pts).shape == (len(pts),)
    with pytest.raises(ConfigError):
        build_field(FieldSpec("harmonic", {"modes": [[2, 1, 1.0]]}), 3)
    with pytest.raises(ConfigError):
        build_field(FieldSpec("expression", {}), 2)


def test_verify_lemmas_exit_codes(tmp_path):
    out = tmp_path / "a"
    assert main(["verify-lemmas", "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "lemmas.json").read_text())
    assert report["passed"] and not report["failing_items"]
    assert (out / "config.yaml").exists()
    assert (out / "lemmas.csv").read_bytes().startswith(b"item,quantity")
    assert main(["verify-lemmas", "--out", str(tmp_path / "b"), "--inject-sign-fault", "2.7"]) == EXIT_FAIL
    failing = json.loads((tmp_path / "b" / "lemmas.json").read_text())["failing_items"]
    assert failing == ["2.7"]


def test_rerun_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["verify-lemmas", "--out", str(tmp_path / name), "--seed", "3"]) == EXIT_OK
    for f in ("lemmas.csv", "config.yaml"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    # the emitted config reproduces the run
    assert main(["verify-lemmas", "--config", str(tmp_path / "a" / "config.yaml"), "--out", str(tmp_path / "c")]) == EXIT_OK
    assert (tmp_path / "a" / "lemmas.csv").read_bytes() == (tmp_path / "c" / "lemmas.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "n: 2\nbogus: 1\n")
    assert main(["eigen", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert ":2:" in err and "bogus" in err
    assert main(["eigen", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_willmore_curve_in_three_dimensions(tmp_path):
    cfg = _write(tmp_path, "n: 3\nresolution: 64\nf: {type: zonal, params: {degree: 3}}\n")
    assert main(["willmore-curve", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    result = json.loads((tmp_path / "o" / "willmore_curve.json").read_text())["result"]
    assert result["passed"]
    assert result["min_value"] >= 3.0 - 1e-8


def test_conjecture_scan_threads_do_not_change_results(tmp_path):
    cfg = _write(tmp_path, "n: 3\nsamples: 6\n")
    assert main(["conjecture-scan", "--config", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["conjecture-scan", "--config", cfg, "--threads", "3", "--out", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "conjecture_scan.csv").read_bytes()
    assert a == (tmp_path / "b" / "conjecture_scan.csv").read_bytes()
    assert a.count(b"\r\n") == 7


def test_eigen_zonal_run(tmp_path):
    cfg = _write(tmp_path, "n: 3\nt_grid: [-0.05, 0.0, 0.05]\n")
    assert main(["eigen", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = (tmp_path / "o" / "eigen.csv").read_text().splitlines()
    assert rows[0].startswith("label,t,lambda1")


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "jacobi_workbench.cli", "--version"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout.strip()
