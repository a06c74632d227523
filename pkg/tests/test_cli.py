"""Command line interface: exit codes, config handling, artifacts."""

import json
import os
import sys

import pytest

from corona_spectra import cli

LAPLACIAN_CFG = {
    "group": {"kind": "zn", "dimension": 1},
    "kernel": [
        {"coeff": {"type": "constant", "value": [1.0, 0.0]},
         "profile": [{"element": [1], "value": [1.0, 0.0]},
                     {"element": [-1], "value": [1.0, 0.0]}]},
    ],
}

EDGE_CFG = {
    "group": {"kind": "zn", "dimension": 1},
    "kernel": [
        {"coeff": {"type": "constant", "value": [2.0, 0.0]},
         "profile": [{"element": [0], "value": [1.0, 0.0]}]},
        {"coeff": {"type": "constant", "value": [1.0, 0.0]},
         "profile": [{"element": [1], "value": [1.0, 0.0]},
                     {"element": [-1], "value": [1.0, 0.0]}]},
    ],
}


def write_cfg(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_ess_spectrum_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    out = tmp_path / "run"
    code = cli.main(["ess-spectrum", "--config", cfg, "--out", str(out), "--svg"])
    assert code == 0
    for name in ("manifest.json", "spectrum.csv", "provenance.json",
                 "spectrum.svg"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["task"] == "ess-spectrum"
    assert manifest["package"] == "corona-spectra"
    assert "config_sha256" in manifest
    rows = (out / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "re,im,tag,resolution"
    assert any("interval0:lo" in r for r in rows[1:])
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["spectrum"]["intervals"] == [[-2.0, 2.0]]
    assert len(prov["quasi_orbits"]) == 1


def test_ess_spectrum_artifacts_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["ess-spectrum", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["ess-spectrum", "--config", cfg, "--out", str(out2)]) == 0
    for name in ("manifest.json", "spectrum.csv", "provenance.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_option_overrides_reach_manifest(tmp_path):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    out = tmp_path / "run"
    code = cli.main(["ess-spectrum", "--config", cfg, "--out", str(out),
                     "--dual-grid", "512"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["options"]["dual_grid"] == 512


def test_fredholm_exit_codes(tmp_path):
    lap = write_cfg(tmp_path, LAPLACIAN_CFG, "lap.json")
    out = tmp_path / "f1"
    code = cli.main(["fredholm", "--config", lap, "--out", str(out)])
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "NOT_FREDHOLM"

    code = cli.main(["fredholm", "--config", lap, "--out", str(tmp_path / "f2"),
                     "--point", "5.0"])
    assert code == 0
    cert = json.loads((tmp_path / "f2" / "certificate.json").read_text())
    assert cert["verdict"] == "FREDHOLM"

    edge = write_cfg(tmp_path, EDGE_CFG, "edge.json")
    code = cli.main(["fredholm", "--config", edge, "--out", str(tmp_path / "f3")])
    assert code == 2
    cert = json.loads((tmp_path / "f3" / "certificate.json").read_text())
    assert cert["verdict"] == "INCONCLUSIVE"


def test_crosscheck_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    out = tmp_path / "x"
    code = cli.main(["crosscheck", "--config", cfg, "--out", str(out),
                     "--window", "120"])
    assert code == 0
    report = json.loads((out / "crosscheck.json").read_text())
    assert report["hermitian"] is True
    assert report["max_distance"] < 1e-12
    assert "finite" in report["caveat"].lower() or "section" in report["caveat"]
    rows = (out / "eigenvalues.csv").read_text().splitlines()
    assert rows[0] == "re,im,distance"
    assert len(rows) == 1 + 2 * 120 + 1


def test_config_error_pointers(tmp_path, capsys):
    bad = write_cfg(tmp_path, {"kernel": []}, "bad.json")
    assert cli.main(["ess-spectrum", "--config", bad,
                     "--out", str(tmp_path / "o1")]) == 1
    err = capsys.readouterr().err
    assert "/group" in err

    bad2 = write_cfg(tmp_path, {"group": {"kind": "zn", "dimension": 1},
                                "kernel": []}, "bad2.json")
    assert cli.main(["ess-spectrum", "--config", bad2,
                     "--out", str(tmp_path / "o2")]) == 1
    err = capsys.readouterr().err
    assert "/kernel" in err

    assert cli.main(["ess-spectrum", "--config", str(tmp_path / "missing.json"),
                     "--out", str(tmp_path / "o3")]) == 1


def test_verify_subcommands_exit_codes(tmp_path):
    assert cli.main(["verify-algebra", "--group", "zn:1", "--trials", "3"]) == 0
    assert cli.main(["verify-algebra", "--group", "S3", "--trials", "3"]) == 0
    assert cli.main(["verify-fourier", "--group", "Q8", "--trials", "3"]) == 0
    # an unreachable tolerance must fail loudly
    assert cli.main(["verify-algebra", "--group", "zn:1", "--trials", "3",
                     "--tol", "1e-30"]) == 3


def test_entry_env_thread_validation(monkeypatch, tmp_path):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    monkeypatch.setenv("CORONA_SPECTRA_THREADS", "not_a_number")
    monkeypatch.setattr(sys, "argv",
                        ["corona-spectra", "ess-spectrum", "--config", cfg,
                         "--out", str(tmp_path / "t")])
    with pytest.raises(SystemExit) as exc:
        cli.entry()
    assert exc.value.code == 1


def test_entry_env_thread_accepted(monkeypatch, tmp_path):
    cfg = write_cfg(tmp_path, LAPLACIAN_CFG)
    monkeypatch.setenv("CORONA_SPECTRA_THREADS", "2")
    monkeypatch.setattr(sys, "argv",
                        ["corona-spectra", "fredholm", "--config", cfg,
                         "--out", str(tmp_path / "t")])
    with pytest.raises(SystemExit) as exc:
        cli.entry()
    assert exc.value.code == 0
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS"):
        assert os.environ.get(var) == "2"
