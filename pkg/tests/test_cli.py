import csv
import io
import math

import pytest

from dvcv_teleport.cli import main


def read_csv(path):
    text = path.read_text()
    header = [l for l in text.splitlines() if l.startswith("#")]
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return header, list(csv.DictReader(io.StringIO(body)))


def test_sweep_dual_peak(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--protocol", "dual", "--l", "0", "--k", "1",
                 "--alpha-min", "0.1", "--alpha-max", "1.2", "--steps", "111",
                 "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert len(rows) == 111
    assert any("dvcv-teleport" in h for h in header)
    best = max(rows, key=lambda r: float(r["p_direct"]))
    assert abs(float(best["alpha"]) - 0.628) < 0.006
    assert abs(float(best["p_direct"]) - 0.2637) < 5e-4
    for r in rows:
        for col in ("p_direct", "p_modulated", "p_total"):
            assert 0.0 <= float(r[col]) <= 1.0 + 1e-9
        assert abs(float(r["p_total"]) - 1.0) < 1e-6


def test_sweep_degenerate_two_rows(tmp_path):
    out = tmp_path / "two.csv"
    assert main(["sweep", "--protocol", "dual", "--alpha-min", "0.4",
                 "--alpha-max", "0.5", "--steps", "2", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 2


def test_sweep_deterministic_bytes(tmp_path):
    args = ["sweep", "--protocol", "dual", "--alpha-min", "0.2",
            "--alpha-max", "0.9", "--steps", "15"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_usage_errors(tmp_path):
    assert main(["sweep", "--protocol", "dual", "--alpha-min", "1.0",
                 "--alpha-max", "0.5", "--steps", "5"]) == 2
    assert main(["sweep", "--protocol", "dual", "--alpha-min", "0.1",
                 "--alpha-max", "0.5", "--steps", "1"]) == 2
    assert main(["sweep", "--protocol", "dual", "--alpha-min", "0.1",
                 "--alpha-max", "0.5", "--steps", "3", "--a1-abs", "0.2"]) == 2
    assert main(["sweep", "--protocol", "init_am_dual", "--alpha-min", "0.1",
                 "--alpha-max", "0.5", "--steps", "3"]) == 2
    assert main(["sweep", "--protocol", "bogus", "--alpha-min", "0.1",
                 "--alpha-max", "0.5", "--steps", "3"]) == 2


def test_sweep_init_am_grid(tmp_path):
    out = tmp_path / "am.csv"
    assert main(["sweep", "--protocol", "init_am_single", "--alpha-min", "0.2",
                 "--alpha-max", "0.3", "--steps", "2", "--a1-grid", "3",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 6  # steps x grid
    assert {r["a1_abs"] for r in rows} == {"0", "0.5", "1"}


def test_figure_fig2_operating_points(tmp_path):
    assert main(["figure", "fig2", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "fig2.csv")
    tgt = 1 / math.sqrt(2)
    at_root = min(rows, key=lambda r: abs(float(r["alpha"]) - tgt))
    assert abs(float(at_root["alpha"]) - tgt) < 1e-9
    assert abs(float(at_root["p_signfree"]) - 0.441789) < 5e-4
    at_peak = min(rows, key=lambda r: abs(float(r["alpha"]) - 0.628482))
    assert abs(float(at_peak["p_signfree"]) - 0.500673) < 5e-4


def test_figure_fig3_operating_points(tmp_path):
    assert main(["figure", "fig3", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "fig3.csv")
    at = min(rows, key=lambda r: abs(float(r["alpha"]) - 0.4072))
    assert abs(float(at["p_direct"]) + float(at["ps_12"]) - 0.5317) < 1e-3
    at2 = min(rows, key=lambda r: abs(float(r["alpha"]) - 0.5053))
    assert abs(float(at2["p_signfree"]) - 0.4014) < 1e-3


def test_figure_fig5_dominance(tmp_path):
    assert main(["figure", "fig5", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "fig5.csv")
    small = [r for r in rows if float(r["a1_abs"]) <= 0.2]
    assert small
    for r in small:
        assert float(r["single_alpha020"]) > float(r["dual_alpha020"])


def test_figure_unknown_name():
    assert main(["figure", "fig9"]) == 2


def test_figure_gnuplot_script(tmp_path):
    assert main(["figure", "fig4", "--out", str(tmp_path), "--gnuplot"]) == 0
    assert (tmp_path / "fig4.csv").exists()
    script = (tmp_path / "fig4.gp").read_text()
    assert "fig4.csv" in script and "plot" in script


def test_sweep_12_peak(tmp_path):
    out = tmp_path / "s12.csv"
    assert main(["sweep", "--protocol", "dual", "--l", "1", "--k", "2",
                 "--alpha-min", "0.1", "--alpha-max", "1.2", "--steps", "111",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    best = max(rows, key=lambda r: float(r["p_direct"]))
    assert abs(float(best["alpha"]) - 0.407) < 0.006
    assert abs(float(best["p_direct"]) - 0.24371) < 5e-4


def test_negativity_output(capsys):
    assert main(["negativity", "--beta", "1"]) == 0
    out = capsys.readouterr().out
    assert "0.990799859" in out
    assert main(["negativity", "--beta", "-1"]) == 2


def test_oracle_runs(capsys):
    assert main(["oracle", "--alpha", "0.5", "--r", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "max corrected-state infidelity" in out
    assert main(["oracle", "--alpha", "0.5", "--r", "0.9"]) == 2


def test_config_file_defaults_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha-min=0.3\nalpha_max=0.5\nsteps=3\nprotocol=dual\n")
    out = tmp_path / "cfg.csv"
    assert main(["sweep", "--config", str(cfg), "--steps", "4",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 4  # explicit flag beats the config value
    assert float(rows[0]["alpha"]) == pytest.approx(0.3)


def test_out_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DVCV_TELEPORT_OUT_DIR", str(tmp_path))
    assert main(["sweep", "--protocol", "dual", "--alpha-min", "0.4",
                 "--alpha-max", "0.5", "--steps", "2"]) == 0
    assert (tmp_path / "sweep_dual_01.csv").exists()


def test_verify_oracle_suite_exit_code():
    assert main(["verify", "--suite", "oracle"]) == 0
