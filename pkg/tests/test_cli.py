"""Command-line pipeline: config resolution, stage execution, exit codes,
and the RESULT summary line."""

import json

import pytest

from saddlecheck.cache import CACHE_ENV_VAR
from saddlecheck.cli import main, resolve_config, build_parser

M_ARGS = ["--m", "4", "--R", "8", "--h", "0.2"]


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)


def _last_line(capsys):
    return capsys.readouterr().out.strip().splitlines()[-1]


def test_config_precedence(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nm = 2\nR = 8\nh = 0.2\ntol = 1e-9\n")
    parser = build_parser()
    args = parser.parse_args(["run", "--config", str(ini), "--m", "4"])
    cfg = resolve_config(args)
    assert cfg.m == 4          # flag beats file
    assert cfg.R == 8.0        # file beats default
    assert cfg.tol == 1e-9
    args = parser.parse_args(["run", "--config", str(ini)])
    assert resolve_config(args).m == 2


def test_n_flag_sets_m():
    args = build_parser().parse_args(["run", "--n", "10"])
    assert resolve_config(args).m == 5
    args = build_parser().parse_args(["run", "--n", "9"])
    with pytest.raises(ValueError):
        resolve_config(args)


def test_verify_command_passes(capsys):
    rc = main(["verify"] + M_ARGS)
    assert rc == 0
    line = _last_line(capsys)
    assert line == "RESULT pass stages=solve,suite,supersolution failures=0"


def test_spectrum_command_skips_candidate_validation(capsys):
    # m = 2 has no supersolution candidate, but the spectrum stage must run
    rc = main(["spectrum", "--m", "2", "--R", "8", "--h", "0.2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "lambda_min=-0." in out
    assert out.strip().splitlines()[-1].startswith("RESULT pass")


def test_report_written_and_second_run_cached(tmp_path, capsys):
    out = tmp_path / "outdir"
    argv = ["report", "--stages", "solve,suite", "--out", str(out)] + M_ARGS
    assert main(argv) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["schema"] == "saddlecheck-report/1"
    assert rep["failures"] == []
    assert rep["stages"]["solve"]["from_cache"] is False
    capsys.readouterr()
    assert main(argv) == 0
    rep2 = json.loads((out / "report.json").read_text())
    assert rep2["stages"]["solve"]["from_cache"] is True
    # determinism modulo timing and cache provenance
    for r in (rep, rep2):
        r.pop("timing")
        r["stages"]["solve"].pop("from_cache")
    assert rep == rep2


def test_plot_emits_maps_and_csv(tmp_path, capsys):
    out = tmp_path / "plots"
    assert main(["plot", "--out", str(out)] + M_ARGS) == 0
    assert (out / "u.csv").exists()
    svgs = sorted(p.name for p in out.glob("*.svg"))
    assert len(svgs) == 6


def test_exit_code_one_on_undecided_proof(tmp_path, capsys):
    ini = tmp_path / "rig.ini"
    ini.write_text("[run]\nm = 4\nR = 8\nh = 0.2\nrigor_max_boxes = 500\n")
    rc = main(["rigor", "--config", str(ini)])
    assert rc == 1
    line = _last_line(capsys)
    assert line.startswith("RESULT fail stages=solve,rigor failures=")


def test_exit_code_two_on_config_error(capsys):
    # unknown stage name
    rc = main(["report", "--stages", "solve,nonsense"] + M_ARGS)
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    # grid spacing not dividing R
    rc = main(["solve", "--m", "4", "--R", "8", "--h", "0.3"])
    assert rc == 2
    # candidate stage with a dimension outside the candidate table
    rc = main(["verify", "--m", "2", "--R", "8", "--h", "0.2"])
    assert rc == 2
    # missing config file
    rc = main(["run", "--config", "no-such-file.ini"])
    assert rc == 2


def test_full_run_emits_certificate(tmp_path, capsys):
    out = tmp_path / "full"
    ini = tmp_path / "full.ini"
    ini.write_text("[run]\nm = 4\nR = 8\nh = 0.2\n")
    rc = main(["run", "--config", str(ini), "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "report.json").read_text())
    cert = rep["stages"]["certificate"]
    assert cert["conclusion"] == "stable"
    assert cert["n"] == 8
    assert _last_line(capsys) == \
        "RESULT pass stages=solve,suite,supersolution,spectrum,rigor failures=0"
