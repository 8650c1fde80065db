"""Secondary-component tests: rendering from the published file formats.

These tests drive the primary package only through its CLI and output
files (subprocess + text formats), never through imports.
"""

import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import render  # noqa: E402

HERE = Path(__file__).parent


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_snapshot(path, u, dx=1.0, dy=1.0, ox=0.0, oy=0.0, t=0.0):
    ny, nx = u.shape
    lines = [f"# levelset {nx} {ny} {dx:.17g} {dy:.17g} {ox:.17g} "
             f"{oy:.17g} {t:.17g}"]
    for row in u:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def synthetic_field(nx=60, ny=80, centers=((20.0, 30.0), (40.0, 55.0)),
                    radius=6.0):
    x = np.arange(nx)[None, :]
    y = np.arange(ny)[:, None]
    u = np.full((ny, nx), 1e9)
    for cx, cy in centers:
        u = np.minimum(u, np.hypot(x - cx, y - cy) - radius)
    return u


@pytest.fixture(scope="module")
def exp10_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp10")
    subprocess.run([sys.executable, "-m", "bubblefield", "run", "--preset",
                    "exp10", "--out", str(out)], check=True,
                   capture_output=True)
    return out


class TestProfiles:
    def test_overlay(self, tmp_path):
        paths = []
        for k in (1, 2):
            s = np.linspace(0, np.pi, 50)
            rows = ["s,r,z,theta"] + [
                f"{si:.17g},{np.sin(si)/k:.17g},{(1-np.cos(si))/k:.17g},"
                f"{si:.17g}" for si in s]
            p = tmp_path / f"profile_{k}.csv"
            p.write_text("\n".join(rows) + "\n")
            paths.append(str(p))
        out = tmp_path / "profiles.png"
        assert render.main(["--profiles", *paths, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_malformed_csv_names_file(self, tmp_path, capsys):
        bad = tmp_path / "broken.csv"
        bad.write_text("s,r,z,theta\n1,2,oops,4\n")
        out = tmp_path / "x.png"
        assert render.main(["--profiles", str(bad), "--out", str(out)]) == 2
        assert "broken.csv" in capsys.readouterr().err

    def test_usage_error_without_inputs(self, tmp_path):
        with pytest.raises(SystemExit):
            render.main(["--out", str(tmp_path / "x.png")])


class TestSnapshots:
    def test_two_circles(self, tmp_path, capsys):
        snap = tmp_path / "snap.txt"
        write_snapshot(snap, synthetic_field(), t=3.5)
        out = tmp_path / "ls.png"
        assert render.main(["--snapshot", str(snap), "--out", str(out)]) == 0
        assert "zero-contours: 2" in capsys.readouterr().out
        assert out.stat().st_size > 0

    def test_constant_field_warns(self, tmp_path, capsys):
        snap = tmp_path / "flat.txt"
        write_snapshot(snap, np.ones((20, 20)))
        out = tmp_path / "flat.png"
        assert render.main(["--snapshot", str(snap), "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert "zero-contours: 0" in captured.out
        assert "no zero contour" in captured.err

    def test_header_mismatch(self, tmp_path, capsys):
        snap = tmp_path / "bad.txt"
        snap.write_text("# levelset 5 5 1 1 0 0 0\n1 2 3\n")
        assert render.main(["--snapshot", str(snap),
                            "--out", str(tmp_path / "x.png")]) == 2
        assert "bad.txt" in capsys.readouterr().err

    def test_inputs_unchanged_by_rendering(self, tmp_path):
        snap = tmp_path / "snap.txt"
        write_snapshot(snap, synthetic_field(), t=1.0)
        before = sha256(snap)
        render.main(["--snapshot", str(snap),
                     "--out", str(tmp_path / "y.png")])
        assert sha256(snap) == before


class TestAgainstPrimaryOutputs:
    def test_exp10_t01_ten_closed_contours(self, exp10_run, tmp_path,
                                           capsys):
        snap = exp10_run / "snapshot_t0.1.txt"
        csv = exp10_run / "bubbles.csv"
        before = (sha256(snap), sha256(csv))
        out = tmp_path / "exp10_t01.png"
        assert render.main(["--snapshot", str(snap), "--bubbles-csv",
                            str(csv), "--out", str(out)]) == 0
        lines = capsys.readouterr().out.splitlines()
        zero = int([ln for ln in lines if ln.startswith("zero-contours")][0]
                   .split(":")[1])
        csvn = int([ln for ln in lines if "bubbles-csv" in ln][0]
                   .split(":")[1])
        assert zero == 10
        assert csvn == zero
        assert (sha256(snap), sha256(csv)) == before

    def test_t50_contours_displaced_upward(self, exp10_run, tmp_path):
        x0, y0, u0, _ = render.read_snapshot(
            str(exp10_run / "snapshot_t0.1.txt"))
        x1, y1, u1, _ = render.read_snapshot(
            str(exp10_run / "snapshot_t50.txt"))
        Y0 = np.broadcast_to(y0[:, None], u0.shape)
        Y1 = np.broadcast_to(y1[:, None], u1.shape)
        c0 = Y0[u0 < 0].mean()
        c1 = Y1[u1 < 0].mean()
        assert c1 > c0 + 40.0

    def test_exp1_profile_rendering(self, tmp_path):
        out_dir = tmp_path / "exp1"
        subprocess.run([sys.executable, "-m", "bubblefield", "run",
                        "--preset", "exp1", "--out", str(out_dir)],
                       check=True, capture_output=True)
        profiles = sorted(str(p) for p in out_dir.glob("profile_*.csv"))
        assert len(profiles) == 4
        img = tmp_path / "exp1.png"
        assert render.main(["--profiles", *profiles,
                            "--out", str(img)]) == 0
        assert img.stat().st_size > 0
