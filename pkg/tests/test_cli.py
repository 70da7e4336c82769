import json

import pytest

from phaseless_stft.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_command(capsys):
    code, out, _ = run_cli(capsys, "bound", "--N", "11", "--W", "3", "--L", "1")
    assert code == 0
    assert "known=31" in out and "blind=33" in out
    code, out, _ = run_cli(capsys, "bound", "--N", "100", "--W", "10", "--L", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["known_window_count"] == 361


def test_bound_usage_error(capsys):
    code, _, err = run_cli(capsys, "bound", "--N", "8", "--W", "9", "--L", "1")
    assert code == 2
    assert "error" in err


def test_recover_known_cli(capsys):
    code, out, _ = run_cli(capsys, "recover", "known", "--N", "16", "--W", "4", "--L", "1",
                           "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "unique"


def test_recover_blind_cli(capsys):
    code, out, _ = run_cli(capsys, "recover", "blind", "--N", "12", "--W", "3", "--L", "1",
                           "--seed", "1")
    assert code == 0
    assert json.loads(out)["status"] == "unique"


def test_recover_rejects_w1(capsys):
    code, _, err = run_cli(capsys, "recover", "known", "--N", "16", "--W", "1", "--L", "1")
    assert code == 2


def test_simulate_figure1(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "simulate", "figure1", "--N", "20", "--out-dir", str(tmp_path))
    assert code == 0
    text = (tmp_path / "figure1.csv").read_text()
    assert text.splitlines()[0].startswith("schema_version,L,W,known,blind")
    assert (tmp_path / "figure1_manifest.json").exists()


def test_simulate_figure4_small(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys, "simulate", "figure4", "--K-list", "8", "--L-list", "1",
        "--W-min", "6", "--W-max", "6", "--trials", "2", "--seed", "7",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    lines = (tmp_path / "figure4.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == "schema_version,K,L,W,success_rate,mean_iterations,mean_final_error"


def test_simulate_outputs_deterministic(tmp_path, capsys):
    args = ("simulate", "figure4", "--K-list", "8", "--L-list", "1", "--W-min", "6",
            "--W-max", "6", "--trials", "2", "--seed", "7")
    run_cli(capsys, *args, "--out-dir", str(tmp_path / "a"))
    run_cli(capsys, *args, "--out-dir", str(tmp_path / "b"))
    assert (tmp_path / "a/figure4.csv").read_text() == (tmp_path / "b/figure4.csv").read_text()


def test_verify_fast_pass(capsys):
    code, out, _ = run_cli(capsys, "verify", "--trials", "6", "--seed", "0")
    assert code == 0
    assert "PASS" in out


def test_verify_negative_control(capsys):
    code, out, _ = run_cli(capsys, "verify", "--trials", "6", "--seed", "0", "--break-action")
    assert code == 1
    assert "FAIL" in out


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nN = 11\nW = 3\nL = 1\n")
    code, out, _ = run_cli(capsys, "--config", str(cfg), "bound", "--N", "11", "--W", "3", "--L", "2")
    assert code == 0  # command line wins over config
    assert "known=31" in out


def test_outdir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PHASELESS_STFT_OUTDIR", str(tmp_path))
    code, *_ = run_cli(capsys, "simulate", "figure1", "--N", "12")
    assert code == 0
    assert (tmp_path / "figure1.csv").exists()
