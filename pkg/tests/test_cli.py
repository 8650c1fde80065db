"""CLI: presets, config parsing, outputs, exit codes, manifest round trip."""

import filecmp
import math
import os

import pytest

from bubblefield.cli import (EXP10_PLACEMENTS, main, parse_config,
                             preset_config)
from bubblefield.errors import ConfigError

TINY_CONFIG = """\
[run]
mode = coupled
times = 0.1 5
out = {out}

[grid]
nx = 100
ny = 200
bx = 100
by = 200

[transport]
vx = 0
vy = 1
f0 = 0.05

[bubble.1]
dp_over_alpha = 0.8
l = 1.0
dt = 0.01
x = 20
y = 100

[bubble.2]
dp_over_alpha = 0.8
l = 2.0
dt = 0.01
x = 70
y = 90
"""


class TestPresets:
    def test_exp1_parameters(self):
        cfg = preset_config("exp1")
        assert cfg.mode == "near-only"
        assert [b.r0 for b in cfg.bubbles] == [1.0, 2.0, 3.0, 3.5]
        assert all(b.dp_over_alpha == 0.0 for b in cfg.bubbles)
        assert all(b.dt == pytest.approx(2 * math.pi * 1e-3)
                   for b in cfg.bubbles)
        assert cfg.bubbles[0].L == pytest.approx(2 * math.pi / 4)

    def test_exp2_parameters(self):
        cfg = preset_config("exp2")
        assert [b.dp_over_alpha for b in cfg.bubbles] == [0.0, 0.8, 1.4]
        assert all(b.L == 2.0 and b.dt == 1e-3 for b in cfg.bubbles)

    def test_exp_2bubble_parameters(self):
        cfg = preset_config("exp-2bubble")
        assert [(b.x, b.y) for b in cfg.bubbles] == [(20.0, 100.0),
                                                     (70.0, 90.0)]
        assert [b.L for b in cfg.bubbles] == [1.0, 2.0]
        assert all(b.dp_over_alpha == 0.8 for b in cfg.bubbles)
        assert (cfg.nx, cfg.ny, cfg.bx, cfg.by) == (100, 200, 100.0, 200.0)

    def test_exp10_parameters(self):
        cfg = preset_config("exp10")
        assert [b.dp_over_alpha for b in cfg.bubbles] == pytest.approx(
            [0.2 * k for k in range(1, 11)])
        assert all(b.r0 == 0.01 and b.L == 2.0 and b.dt == 1e-3
                   for b in cfg.bubbles)
        assert [(b.x, b.y) for b in cfg.bubbles] == EXP10_PLACEMENTS
        assert cfg.times == [0.1, 25.0, 50.0]

    def test_exp_efield_parameters(self):
        cfg = preset_config("exp-efield")
        assert cfg.mode == "coupled-efield"
        assert cfg.e0_sq == 0.1 and cfg.efield_form == "sin"
        assert all(b.alpha == 0.1 and b.rho == 0.1 and b.g == 9.81
                   for b in cfg.bubbles)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_config("nope")


class TestConfigParsing:
    def test_round_trip(self, tmp_path):
        from bubblefield.cli import config_to_ini
        cfg = preset_config("exp-efield")
        text = config_to_ini(cfg)
        back = parse_config(text)
        assert config_to_ini(back) == text

    def test_missing_run_section(self):
        with pytest.raises(ConfigError, match=r"\[run\]"):
            parse_config("[grid]\nnx = 10\n")

    def test_bad_mode_names_key(self):
        with pytest.raises(ConfigError, match="mode"):
            parse_config("[run]\nmode = bogus\n[bubble.1]\nl = 1\n")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="wibble"):
            parse_config("[run]\nmode = near-only\nwibble = 3\n")

    def test_decreasing_times(self):
        with pytest.raises(ConfigError, match="times"):
            parse_config("[run]\nmode = near-only\ntimes = 5 1\n"
                         "[bubble.1]\ndp_over_alpha = 1\n")


class TestMainExitCodes:
    def test_config_error_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[run]\nmode = bogus\n")
        assert main(["run", "--config", str(bad)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_both_sources_exit_1(self, capsys):
        assert main(["run", "--preset", "exp1", "--config", "x"]) == 1

    def test_missing_file_exit_1(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.ini")]) == 1

    def test_numerical_failure_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "diverge.ini"
        cfg.write_text(
            "[run]\nmode = near-only\nout = {}\n"
            "[bubble.1]\ndp_over_alpha = 0\nl = 2\ndt = 0.01\n"
            "boundary = closure\n".format(tmp_path / "out"))
        assert main(["run", "--config", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "numerical failure" in err and "bubblefield" in err

    def test_seed_doc(self, capsys):
        assert main(["run", "--seed-doc"]) == 0
        out = capsys.readouterr().out
        assert "[run]" in out and "far_scale" in out
        parse_config("\n".join(
            line for line in out.splitlines()
            if not line.lstrip().startswith("#")))


class TestRunOutputs:
    def test_exp1_four_profiles(self, tmp_path, capsys):
        out = tmp_path / "exp1"
        assert main(["run", "--preset", "exp1", "--out", str(out)]) == 0
        profiles = sorted(p.name for p in out.glob("profile_*.csv"))
        assert profiles == [f"profile_{i}.csv" for i in (1, 2, 3, 4)]
        header = (out / "profile_1.csv").read_text().splitlines()[0]
        assert header == "s,r,z,theta"
        assert (out / "table.csv").exists()
        assert (out / "manifest.txt").exists()

    def test_tiny_coupled_run_and_manifest_rerun(self, tmp_path):
        out_a = tmp_path / "a"
        cfg = tmp_path / "run.ini"
        cfg.write_text(TINY_CONFIG.format(out=out_a))
        assert main(["run", "--config", str(cfg)]) == 0
        names = {p.name for p in out_a.iterdir()}
        assert {"bubbles.csv", "manifest.txt", "snapshot_t0.1.txt",
                "snapshot_t5.txt"} <= names

        out_b = tmp_path / "b"
        assert main(["run", "--config", str(out_a / "manifest.txt"),
                     "--out", str(out_b)]) == 0
        compare = [n for n in names if n != "manifest.txt"]
        for name in compare:
            assert filecmp.cmp(out_a / name, out_b / name, shallow=False), name

    def test_far_only_mode(self, tmp_path):
        cfg = tmp_path / "far.ini"
        cfg.write_text(
            "[run]\nmode = far-only\ntimes = 0.1 2\nout = {}\n"
            "[transport]\nvy = 1\nf0 = 0\n"
            "[bubble.1]\nkind = ellipse\na = 6\nb = 8\nx = 50\ny = 60\n"
            .format(tmp_path / "farout"))
        assert main(["run", "--config", str(cfg)]) == 0
        from bubblefield.levelset import read_snapshot
        snap = read_snapshot(str(tmp_path / "farout" / "snapshot_t2.txt"))
        assert (snap.u < 0).any()

    def test_cd_reference_mode(self, tmp_path):
        cfg = tmp_path / "cd.ini"
        cfg.write_text(
            "[run]\nmode = cd-reference\ntimes = 0.5 1\nout = {}\n"
            "[grid]\nnx = 30\nny = 30\nox = 0.5\noy = 0\nbx = 30.5\nby = 30\n"
            "[cd]\nv = 1.0\nd_l = 0.1\nd_t = 0.1\n"
            "[bubble.1]\nkind = ellipse\na = 4\nb = 4\nx = 15\ny = 10\n"
            .format(tmp_path / "cdout"))
        assert main(["run", "--config", str(cfg)]) == 0
        from bubblefield.levelset import read_snapshot
        snap = read_snapshot(str(tmp_path / "cdout" / "snapshot_t1.txt"))
        assert snap.u.min() >= 0.0 and snap.u.max() > 0.0


class TestTableCommand:
    def test_csv_round_trip(self, capsys):
        assert main(["table", "--preset", "exp2", "--csv"]) == 0
        csv_out = capsys.readouterr().out.splitlines()
        assert csv_out[0] == "id,dp_over_alpha,a_bubble,b_bubble"
        parsed = [row.split(",") for row in csv_out[1:]]
        assert main(["table", "--preset", "exp2"]) == 0
        pretty = capsys.readouterr().out.splitlines()[1:]
        for row, line in zip(parsed, pretty):
            cols = line.split()
            assert int(cols[0]) == int(row[0])
            assert float(cols[2]) == pytest.approx(float(row[2]), abs=5e-5)
            assert float(cols[3]) == pytest.approx(float(row[3]), abs=5e-5)

    def test_table_requires_near_bubbles(self, tmp_path, capsys):
        cfg = tmp_path / "far.ini"
        cfg.write_text("[run]\nmode = far-only\n"
                       "[bubble.1]\nkind = ellipse\na = 1\nb = 1\n")
        assert main(["table", "--config", str(cfg)]) == 1
