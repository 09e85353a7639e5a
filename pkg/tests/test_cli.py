"""CLI flags, CSV stability, report checks, and exit codes."""

import csv
import math

import pytest

from qtriad import cli


def run_cli(args, monkeypatch, tmp_path):
    monkeypatch.setenv("QTRIAD_OUTDIR", str(tmp_path))
    return cli.main(args)


class TestAngleParsing:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("pi", math.pi),
            ("pi/4", math.pi / 4),
            ("3pi/8", 3 * math.pi / 8),
            ("2*pi/5", 2 * math.pi / 5),
            ("-pi/2", -math.pi / 2),
            ("90deg", math.pi / 2),
            ("45 deg", math.pi / 4),
            ("0.5", 0.5),
            ("1e-3", 1e-3),
        ],
    )
    def test_accepted_forms(self, text, expected):
        assert cli.parse_angle(text) == pytest.approx(expected, abs=1e-15)

    def test_rejects_garbage(self):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_angle("two pies")

    def test_linear_grid(self):
        grid = cli.parse_linear_grid("0:pi/4:5")
        assert len(grid) == 5
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(math.pi / 4)

    def test_int_range(self):
        assert list(cli.parse_int_range("1..4")) == [1, 2, 3, 4]


class TestSweepCommand:
    def test_ghz_endpoint_row(self, monkeypatch, tmp_path):
        assert run_cli(["sweep", "ghz", "--theta", "0:pi/4:100"], monkeypatch, tmp_path) == 0
        with open(tmp_path / "sweep_ghz.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 100
        last = rows[-1]
        assert float(last["parameter"]) == pytest.approx(math.pi / 4)
        assert float(last["win_exact"]) == pytest.approx(1.0, abs=1e-11)
        assert float(last["x_measure"]) == pytest.approx(1.0, abs=1e-9)
        assert float(last["classical_baseline"]) == 0.75

    def test_wn_first_row_quotes(self, monkeypatch, tmp_path):
        assert run_cli(["sweep", "wn", "--n", "1..50"], monkeypatch, tmp_path) == 0
        with open(tmp_path / "sweep_wn.csv") as fh:
            rows = list(csv.DictReader(fh))
        first = rows[0]
        assert float(first["parameter"]) == 1.0
        assert float(first["win_exact"]) == pytest.approx(0.864277, abs=1e-6)
        assert abs(float(first["win_exact"]) - 0.86425) < 1e-4
        assert float(first["x_measure"]) == pytest.approx(1.9142, abs=1e-3)

    def test_rulemaker_w_endpoints(self, monkeypatch, tmp_path):
        assert run_cli(["sweep", "rulemaker-w", "--lambda", "0:pi/2:90"], monkeypatch, tmp_path) == 0
        with open(tmp_path / "sweep_rulemaker-w.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert float(rows[0]["win_exact"]) == pytest.approx(1 / 12, abs=1e-9)
        assert float(rows[-1]["win_exact"]) == pytest.approx(11 / 12, abs=1e-9)

    def test_rulemaker_ghz_note_printed(self, monkeypatch, tmp_path, capsys):
        assert run_cli(["sweep", "rulemaker-ghz", "--lambda", "0:pi/2:9"], monkeypatch, tmp_path) == 0
        out = capsys.readouterr().out
        assert "NOTE:" in out
        assert "enumera" in out

    def test_csv_byte_stable(self, monkeypatch, tmp_path):
        run_cli(["sweep", "w", "--points", "50", "--seed", "9", "--out", str(tmp_path / "a.csv")], monkeypatch, tmp_path)
        run_cli(["sweep", "w", "--points", "50", "--seed", "9", "--out", str(tmp_path / "b.csv")], monkeypatch, tmp_path)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_plot_renders_file(self, monkeypatch, tmp_path):
        assert run_cli(["sweep", "ghz", "--theta", "0:pi/4:20", "--plot"], monkeypatch, tmp_path) == 0
        png = tmp_path / "sweep_ghz.png"
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestGameCommand:
    def test_ghz_xy(self, monkeypatch, tmp_path, capsys):
        assert run_cli(["game", "--state", "ghz", "--xy"], monkeypatch, tmp_path) == 0
        out = capsys.readouterr().out
        assert "exact win        : 1" in out
        assert "classical best   : 3/4" in out

    def test_w_std_zy_with_mc(self, monkeypatch, tmp_path, capsys):
        code = run_cli(["game", "--state", "w-std", "--zy", "--trials", "1e5", "--seed", "7"], monkeypatch, tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "0.875" in out
        assert "PASS" in out and "FAIL" not in out

    def test_degenerate_w_closed_form(self, monkeypatch, tmp_path, capsys):
        code = run_cli(["game", "--state", "w", "--a", "1", "--b", "0", "--c", "0", "--zy"], monkeypatch, tmp_path)
        assert code == 0
        assert "0.625" in capsys.readouterr().out

    def test_closed_form_na_outside_slice(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["game", "--state", "w", "--a", "-0.5", "--b", "0.5", "--c", "0.7071067811865476", "--zy"],
            monkeypatch, tmp_path,
        )
        assert code == 0
        assert "n/a" in capsys.readouterr().out

    def test_rulemaker_game(self, monkeypatch, tmp_path, capsys):
        code = run_cli(["game", "--state", "w-std", "--rulemaker", "--lambda", "90deg"], monkeypatch, tmp_path)
        assert code == 0
        assert "0.916666666667" in capsys.readouterr().out

    def test_usage_error_exit_2(self, monkeypatch, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(["game", "--state", "ghz"], monkeypatch, tmp_path)  # no game selected
        assert err.value.code == 2


class TestProtocolCommands:
    def test_qss(self, monkeypatch, tmp_path, capsys):
        code = run_cli(["qss", "--m", "5000", "--seed", "12"], monkeypatch, tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert (tmp_path / "qss_m5000_s12.jsonl").exists()

    def test_facilitated_honest(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["facilitated", "--m", "4000", "--lambda", "90deg", "--seed", "3", "--policy", "charlie-announces"],
            monkeypatch, tmp_path,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "verdict           : Honest" in out
        assert "agreement 1.0000" in out

    def test_facilitated_cheat_flagged(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["facilitated", "--m", "4000", "--seed", "3", "--cheat", "random:bob"],
            monkeypatch, tmp_path,
        )
        assert code == 0
        assert "CheatingSuspected" in capsys.readouterr().out

    def test_facilitated_socket_transport(self, monkeypatch, tmp_path, capsys):
        code = run_cli(
            ["facilitated", "--m", "40", "--seed", "5", "--transport", "socket"],
            monkeypatch, tmp_path,
        )
        assert code == 0
        local = run_cli(
            ["facilitated", "--m", "40", "--seed", "5", "--out", str(tmp_path / "local.jsonl")],
            monkeypatch, tmp_path,
        )
        assert local == 0
        assert (tmp_path / "facilitated_m40_s5.jsonl").read_bytes() == (tmp_path / "local.jsonl").read_bytes()

    def test_transport_error_exit_3(self, monkeypatch, tmp_path):
        code = run_cli(
            ["facilitated", "--m", "10", "--role", "alice", "--connect", "127.0.0.1:1", "--timeout", "0.5"],
            monkeypatch, tmp_path,
        )
        assert code == 3

    def test_spoke_requires_connect(self, monkeypatch, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(["facilitated", "--m", "10", "--role", "alice"], monkeypatch, tmp_path)
        assert err.value.code == 2


class TestSweepRuntime:
    def test_figure_commands_complete_quickly(self, monkeypatch, tmp_path):
        """Each figure-reproduction command finishes in under 5 seconds."""
        import time

        flags = {
            "ghz": ["--theta", "0:pi/4:100"],
            "w": ["--points", "200", "--seed", "1"],
            "wn": ["--n", "1..50"],
            "rulemaker-w": ["--lambda", "0:pi/2:91"],
            "rulemaker-ghz": ["--lambda", "0:pi/2:91"],
        }
        for family, extra in flags.items():
            t0 = time.perf_counter()
            assert run_cli(["sweep", family, *extra], monkeypatch, tmp_path) == 0
            assert time.perf_counter() - t0 < 5.0, family


class TestVerifyAll:
    def test_everything_passes(self, monkeypatch, tmp_path, capsys):
        code = run_cli(["verify-all", "--trials", "50000"], monkeypatch, tmp_path)
        out = capsys.readouterr().out
        assert code == 0
        assert "FAIL" not in out
        assert (tmp_path / "sweep_ghz.csv").exists()
        assert (tmp_path / "sweep_rulemaker-ghz.csv").exists()
        # the report path renders figures next to the CSVs by default
        assert (tmp_path / "sweep_ghz.png").exists()

    def test_no_plot_skips_figures(self, monkeypatch, tmp_path):
        assert run_cli(["verify-all", "--no-plot", "--trials", "50000"], monkeypatch, tmp_path) == 0
        assert (tmp_path / "sweep_w.csv").exists()
        assert not (tmp_path / "sweep_w.png").exists()
