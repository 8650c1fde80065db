#!/usr/bin/env python3
"""Offline figure rendering for bubblefield output files.

Reads only the published text formats (profile CSVs, level-set snapshots,
bubbles.csv) and writes raster images; no physics, no interactive windows.

    render.py --profiles profile_1.csv [profile_2.csv ...] --out fig.png
    render.py --snapshot snapshot_t0.1.txt [--bubbles-csv bubbles.csv] --out fig.png

The snapshot mode prints "zero-contours: N" (number of closed zero-level
curves) and, when --bubbles-csv is given, the component count recorded for
the same time so the two can be compared.
"""

import argparse
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SNAPSHOT_MAGIC = ["#", "levelset"]


class InputError(Exception):
    """Malformed input file; message names the file."""


def read_profile_csv(path):
    """Parse an s,r,z,theta profile CSV into column arrays."""
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if header.split(",") != ["s", "r", "z", "theta"]:
                raise InputError(f"{path}: expected header s,r,z,theta, "
                                 f"got {header!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: malformed numeric data ({exc})") from exc
    if data.shape[1] != 4 or data.shape[0] < 2:
        raise InputError(f"{path}: need >= 2 rows of 4 columns")
    return data[:, 0], data[:, 1], data[:, 2], data[:, 3]


def read_snapshot(path):
    """Parse a level-set snapshot; returns (x, y, u, t)."""
    try:
        with open(path) as fh:
            header = fh.readline().split()
            if header[:2] != SNAPSHOT_MAGIC:
                raise InputError(f"{path}: missing '# levelset' header")
            try:
                nx, ny = int(header[2]), int(header[3])
                dx, dy, ox, oy, t = map(float, header[4:9])
            except (IndexError, ValueError) as exc:
                raise InputError(f"{path}: bad header fields") from exc
            u = np.loadtxt(fh, ndmin=2)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if u.shape != (ny, nx):
        raise InputError(f"{path}: header says {ny}x{nx} values, file has "
                         f"{u.shape[0]}x{u.shape[1]}")
    x = ox + dx * np.arange(nx)
    y = oy + dy * np.arange(ny)
    return x, y, u, t


def count_csv_components(path, t, rtol=1e-9, atol=1e-6):
    """Rows in bubbles.csv at time t with positive recorded mass."""
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [line.split(",") for line in fh.read().splitlines() if line]
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if header[:2] != ["id", "t"] or "mass" not in header:
        raise InputError(f"{path}: unexpected bubbles.csv header {header}")
    t_col = header.index("t")
    mass_col = header.index("mass")
    n = 0
    for row in rows:
        try:
            row_t = float(row[t_col])
            mass = float(row[mass_col])
        except (IndexError, ValueError) as exc:
            raise InputError(f"{path}: malformed row {row!r}") from exc
        if np.isclose(row_t, t, rtol=rtol, atol=atol) and mass > 0:
            n += 1
    return n


def plot_profiles(paths, out_path):
    """Overlay (r, z) formation curves with their mirrored halves."""
    fig, ax = plt.subplots(figsize=(5, 6))
    for path in paths:
        _, r, z, _ = read_profile_csv(path)
        label = os.path.splitext(os.path.basename(path))[0]
        line, = ax.plot(r, z, label=label)
        ax.plot(-r, z, color=line.get_color(), linestyle=line.get_linestyle())
    ax.set_xlabel("r")
    ax.set_ylabel("z")
    ax.set_title("bubble formation profiles")
    ax.axvline(0.0, color="0.8", linewidth=0.6, zorder=0)
    ax.legend(fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def count_closed_zero_contours(x, y, u):
    """Closed polylines of the zero level set."""
    fig, ax = plt.subplots()
    try:
        cs = ax.contour(x, y, u, levels=[0.0])
        segs = cs.allsegs[0]
    finally:
        plt.close(fig)
    closed = 0
    for seg in segs:
        if len(seg) >= 3 and np.allclose(seg[0], seg[-1], atol=1e-9):
            closed += 1
    return closed


def plot_levelset(path, out_path, bubbles_csv=None):
    """Filled contour of u with the zero level highlighted."""
    x, y, u, t = read_snapshot(path)
    n_zero = count_closed_zero_contours(x, y, u)
    print(f"zero-contours: {n_zero}")
    if n_zero == 0:
        print("warning: field has no zero contour", file=sys.stderr)
    if bubbles_csv is not None:
        n_csv = count_csv_components(bubbles_csv, t)
        print(f"bubbles-csv components at t={t:g}: {n_csv}")

    fig, ax = plt.subplots(figsize=(5, 8))
    levels = np.linspace(u.min(), max(u.max(), u.min() + 1.0), 31)
    cf = ax.contourf(x, y, u, levels=levels, cmap="viridis")
    if n_zero:
        ax.contour(x, y, u, levels=[0.0], colors="red", linewidths=1.2)
    fig.colorbar(cf, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"level set at t = {t:g}")
    ax.set_aspect("equal", adjustable="box")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return n_zero


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="render.py", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--profiles", nargs="+", metavar="CSV",
                        help="profile CSV files to overlay")
    parser.add_argument("--snapshot", metavar="TXT",
                        help="level-set snapshot file")
    parser.add_argument("--bubbles-csv", metavar="CSV",
                        help="cross-check component counts for the snapshot")
    parser.add_argument("--out", required=True, metavar="FILE",
                        help="output image path")
    args = parser.parse_args(argv)

    if bool(args.profiles) == bool(args.snapshot):
        parser.error("exactly one of --profiles or --snapshot is required")
    try:
        if args.profiles:
            plot_profiles(args.profiles, args.out)
        else:
            plot_levelset(args.snapshot, args.out,
                          bubbles_csv=args.bubbles_csv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
