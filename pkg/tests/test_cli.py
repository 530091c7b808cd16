"""Config resolution and the build/verify/report command contracts."""

import json
import math
import shutil

import pytest

from carleman import cli
from carleman.config import (
    ConfigError,
    DEFAULTS,
    load_config,
    load_config_file,
    resolve_windows,
    sector_centers,
)


# ---------------------------------------------------------------------------
# config


def test_defaults_resolve():
    cfg = load_config({})
    assert cfg["operator"] == "cauchy-riemann"
    assert cfg["stages"] == 3
    assert len(cfg["probes"]) == 8
    for band in cfg["cover"]["bands"]:
        assert band["windows"]
        assert "window_halfwidth" not in band


def test_config_validation_names_fields():
    with pytest.raises(ConfigError, match="operator"):
        load_config({"operator": "heat"})
    with pytest.raises(ConfigError, match="cover.c"):
        load_config({"cover": {"c": 0.7}})
    with pytest.raises(ConfigError, match="exhaustion"):
        load_config({"stages": 2})
    with pytest.raises(ConfigError, match="gauge.eps0"):
        load_config({"gauge": {"eps0": 0.0}})


def test_sector_centers():
    got = sector_centers([0.0, math.pi])
    assert got == pytest.approx([math.pi / 2, 3 * math.pi / 2])
    assert sector_centers([]) == [0.0]


def test_resolve_windows_variants():
    probes = [0.5, 2.5]
    cuts = [0.0, math.pi]
    band = {"windows": "probes", "window_halfwidth": 0.1}
    assert resolve_windows(band, probes, cuts) == [[0.4, 0.6], [2.4, 2.6]]
    band = {"windows": "sectors", "window_halfwidth": 0.2}
    ws = resolve_windows(band, probes, cuts)
    assert ws[0] == pytest.approx([math.pi / 2 - 0.2, math.pi / 2 + 0.2])
    band = {"windows": [[1.0, 2.0]]}
    assert resolve_windows(band, probes, cuts) == [[1.0, 2.0]]
    assert resolve_windows({}, probes, cuts) == []
    with pytest.raises(ConfigError):
        resolve_windows({"windows": "corners"}, probes, cuts)


def test_load_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{bad json", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 1"):
        load_config_file(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="top level"):
        load_config_file(arr)


def test_defaults_untouched_by_merge():
    load_config({"cover": {"c": 0.3}})
    assert DEFAULTS["cover"]["c"] == 0.45


# ---------------------------------------------------------------------------
# exit codes


def test_build_exit_1_on_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{bad", encoding="utf-8")
    code = cli.main(["build", "--config", str(bad), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_build_exit_1_on_missing_config(tmp_path):
    code = cli.main(
        ["build", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "out")]
    )
    assert code == 1


def test_verify_exit_1_on_missing_artifacts(tmp_path):
    assert cli.main(["verify", "--run", str(tmp_path)]) == 1
    assert cli.main(["report", "--run", str(tmp_path)]) == 1


def test_build_exit_2_when_budgets_infeasible(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps(
            {
                "gauge": {"eps0": 1e-9},
                "fit": {"max_degree": 32, "refine": 0},
                "verify": {"flood_step": 1.0 / 128.0},
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "out"
    code = cli.main(["build", "--config", str(cfg_path), "--out", str(out)])
    assert code == 2
    run_doc = json.loads((out / "run.json").read_text(encoding="utf-8"))
    assert not run_doc["all_passed"]
    assert any(not s["passed"] for s in run_doc["stages"])


def test_verify_exit_3_on_tampered_polynomial(tmp_path, cr_run):
    run_dir = tmp_path / "tampered"
    shutil.copytree(cr_run["dir"], run_dir)
    poly_path = run_dir / "polynomial.json"
    doc = json.loads(poly_path.read_text(encoding="utf-8"))
    doc["parts"][0]["coeffs_re"][0] += 0.1
    poly_path.write_text(json.dumps(doc), encoding="utf-8")
    assert cli.main(["--threads", "4", "verify", "--run", str(run_dir)]) == 3
    ver = json.loads((run_dir / "verify.json").read_text(encoding="utf-8"))
    assert not ver["component_scan_ok"]


def test_verify_extra_probe_at_jump_is_vacuous(tmp_path, cr_run):
    # a probe at the jump angle 0 is outside S: profiled but never gating
    run_dir = tmp_path / "extra"
    shutil.copytree(cr_run["dir"], run_dir)
    code = cli.main(["--threads", "4", "verify", "--run", str(run_dir), "--probes", "0.0"])
    assert code == 0
    ver = json.loads((run_dir / "verify.json").read_text(encoding="utf-8"))
    assert len(ver["approach"]) == 9
    assert ver["approach"][-1]["certified"] is False


def test_minimal_constant_run(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps(
            {
                "stages": 1,
                "exhaustion": [0.85],
                "boundary": {
                    "values": [0.5],
                    "cuts": [0.25],
                    "s_arcs": [[1.0, 6.0]],
                },
                "verify": {"flood_step": 1.0 / 128.0},
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "out"
    assert cli.main(["build", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert cli.main(["--threads", "4", "verify", "--run", str(out)]) == 0


def test_report_prints_summary_and_figures(cr_run, capsys):
    code = cli.main(["report", "--run", str(cr_run["dir"])])
    assert code == 0
    out = capsys.readouterr().out
    assert "CERTIFIED (finite-stage)" in out
    assert "stage  degree" in out
    for name in ("density.png", "approach.png", "chaplet.png"):
        assert (cr_run["dir"] / name).exists()


def test_build_artifacts_present(cr_run):
    for name in (
        "resolved_config.json",
        "chaplet.json",
        "polynomial.json",
        "run.json",
        "density.csv",
        "approach.csv",
        "verify.json",
    ):
        assert (cr_run["dir"] / name).exists()
