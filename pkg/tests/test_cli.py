import pytest

from drift_ap import cli
from drift_ap.harness import RunConfig, Table
from drift_ap.model import CaseKind
from drift_ap.riemann import SpeedMode
from drift_ap.stepper import SchemeKind


class TestParse:
    def test_headline_nonresolved_run(self):
        args = cli.parse(["run", "--scheme", "ap", "--mode", "nonresolved",
                          "--epsilon", "1e-6", "--t-final", "0.1"])
        config = args.run_config
        assert config.scheme is SchemeKind.AP
        assert config.mode is SpeedMode.NONRESOLVED
        assert config.epsilon == 1e-6
        assert config.t_final == 0.1

    def test_documented_defaults(self):
        config = cli.parse(["run"]).run_config
        assert config == RunConfig(
            scheme=SchemeKind.AP, mode=SpeedMode.NONRESOLVED, epsilon=1e-6,
            epsilon_prime=None, case=CaseKind.PREPARED, cfl=0.5,
            nx=100, ny=100, t_final=0.1, snapshot_times=(), out_dir=None)

    def test_unknown_flag_exits_usage(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--wibble", "3"])
        assert excinfo.value.code == 2

    def test_bad_value_exits_usage(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--epsilon", "not-a-number"])
        assert excinfo.value.code == 2

    def test_conventional_at_zero_epsilon_rejected(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--scheme", "conventional", "--epsilon", "0"])
        assert excinfo.value.code == 2

    def test_drift_limit_resolved_rejected(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--scheme", "drift-limit", "--mode", "resolved"])
        assert excinfo.value.code == 2

    def test_snapshot_times_parsed(self):
        config = cli.parse(["run", "--snapshot-times", "0.01,0.05"]).run_config
        assert config.snapshot_times == (0.01, 0.05)


class TestConfigFile:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "case.cfg"
        cfg.write_text("epsilon=1e-4\nnx=20\nny=24\nt-final=0.05\n")
        config = cli.parse(["run", "--config", str(cfg),
                            "--epsilon", "1e-5"]).run_config
        assert config.epsilon == 1e-5  # flag wins
        assert (config.nx, config.ny) == (20, 24)  # file wins over default
        assert config.t_final == 0.05

    def test_round_trip(self, tmp_path):
        config = RunConfig(scheme=SchemeKind.CONVENTIONAL,
                           mode=SpeedMode.RESOLVED, epsilon=3e-7,
                           epsilon_prime=1e-3, case=CaseKind.UNPREPARED,
                           cfl=0.4, nx=48, ny=32, t_final=0.25,
                           snapshot_times=(0.1, 0.25), out_dir="out/xyz")
        text = cli.render_config(config)
        cfg = tmp_path / "roundtrip.cfg"
        cfg.write_text(text)
        # the file must fully resolve the run without any extra flags
        parsed = cli.parse(["run", "--config", str(cfg)]).run_config
        assert parsed == config

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("wibble=1\n")
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--config", str(cfg)])
        assert excinfo.value.code == 2

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("epsilon\n")
        with pytest.raises(SystemExit) as excinfo:
            cli.parse(["run", "--config", str(cfg)])
        assert excinfo.value.code == 2

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("# a comment\n\nepsilon=2e-6\n")
        assert cli.parse(["run", "--config", str(cfg)]).run_config.epsilon \
            == 2e-6


class TestRunCommand:
    def test_small_run_writes_resolved_config(self, tmp_path, capsys):
        out = tmp_path / "artifacts"
        code = cli.main(["run", "--nx", "10", "--ny", "10",
                         "--t-final", "0.01", "--out", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "max diff vs drift limit" in stdout
        text = (out / "config_resolved.txt").read_text()
        assert "I=west" in text and "IV=north" in text
        # the echoed key=value lines parse back to the same config
        lines = [ln for ln in text.splitlines() if ln and not
                 ln.startswith("#")]
        cfg = tmp_path / "echo.cfg"
        cfg.write_text("\n".join(lines) + "\n")
        parsed = cli.parse(["run", "--config", str(cfg)]).run_config
        assert parsed.nx == 10 and parsed.t_final == 0.01

    @staticmethod
    def _fake_diverged_run(monkeypatch):
        from drift_ap.harness import DiffMetrics, RunReport
        import numpy as np

        def fake(config):
            return RunReport(config=config,
                             metrics=DiffMetrics(50.0, 1.0, 1.0, 1.0),
                             dt_history=np.array([1e-3]), steps=1,
                             t_end=1e-3, wall_time=0.0, diverged=True,
                             diverge_reason="nonpositive density at t=0.001")

        monkeypatch.setattr(cli, "run", fake)

    def test_strict_mode_flags_divergence(self, monkeypatch, capsys):
        self._fake_diverged_run(monkeypatch)
        code = cli.main(["run", "--nx", "12", "--ny", "12", "--strict"])
        assert code == 1
        assert "DIVERGED" in capsys.readouterr().out

    def test_non_strict_divergence_exits_zero(self, monkeypatch):
        self._fake_diverged_run(monkeypatch)
        assert cli.main(["run", "--nx", "12", "--ny", "12"]) == 0


class TestTablesCommand:
    def test_dispatches_to_reproduce_tables(self, monkeypatch, tmp_path,
                                            capsys):
        seen = {}

        def fake(preset, out_dir=None, quick=False):
            seen.update(preset=preset, out_dir=out_dir, quick=quick)
            return [Table("dt-table", ("a", "b"), [(1.0, 2.0)])]

        monkeypatch.setattr(cli, "reproduce_tables", fake)
        code = cli.main(["tables", "--preset", "dt-table", "--out",
                         str(tmp_path), "--quick"])
        assert code == 0
        assert seen == {"preset": "dt-table", "out_dir": str(tmp_path),
                        "quick": True}
        assert "### dt-table" in capsys.readouterr().out

    def test_unknown_preset_exits_usage(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["tables", "--preset", "nope"])
        assert excinfo.value.code == 2


class TestCheckCommand:
    def test_passes_on_healthy_build(self, capsys):
        assert cli.main(["check"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4

    def test_mutated_flux_fails_conservation(self, monkeypatch, capsys):
        from drift_ap import riemann

        def flipped(m_l, m_r, a, n_l, n_r):
            return -(0.5 * (m_l + m_r) - 0.5 * a * (n_r - n_l))

        monkeypatch.setattr(riemann, "mass_flux", flipped)
        assert cli.main(["check"]) == 1
        captured = capsys.readouterr()
        assert "FAIL conservation" in captured.out
        assert "first failing property" in captured.err
