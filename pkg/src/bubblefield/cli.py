"""Command-line front end: experiment presets and a config-file runner.

Configs are flat INI key-value text. Every run writes a manifest with all
resolved parameters; re-running from the manifest reproduces the outputs
byte for byte. Exit code 1 flags a config error (message names the key),
exit code 2 a numerical failure (message names the module).
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import sys
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import __version__, coupling, levelset
from ._util import atomic_write_text
from .coupling import BubbleRecord, bubbles_csv_rows
from .errors import BubblefieldError, ConfigError
from .levelset import Grid2D, TransportParams
from .shape_fit import EllipseParams
from .young_laplace import EFieldParams, NearFieldParams

MODES = ("near-only", "far-only", "coupled", "coupled-efield", "cd-reference")


@dataclass
class BubbleSpec:
    """One [bubble.N] section, either a near-field solve or a raw ellipse."""

    id: int
    kind: str = "near"                  # "near" | "ellipse"
    variant: str = "experiment"        # near kind: experiment | beta | efield
    dp_over_alpha: float = 0.0
    beta: float = 0.0
    r0: float = 0.01
    L: float = 2.0
    dt: float = 1e-3
    boundary: str = "ivp"
    theta_start: float = math.pi / 2
    theta_end: float = math.pi
    alpha: float = 1.0
    rho: float = 0.0
    g: float = 0.0
    a: float = 1.0                      # ellipse kind
    b: float = 1.0
    x: float = 0.0
    y: float = 0.0


@dataclass
class RunConfig:
    mode: str = "near-only"
    times: list = dc_field(default_factory=lambda: [0.1, 25.0, 50.0])
    refresh_every: float = math.inf
    out: str = "out"
    bubbles: list = dc_field(default_factory=list)
    # far-field grid
    nx: int = 100
    ny: int = 200
    ox: float = 0.0
    oy: float = 0.0
    bx: float = 100.0
    by: float = 200.0
    # transport
    vx: float = 0.0
    vy: float = 1.0
    f0: float = 0.05
    # optional uniform e-field
    efield_on: bool = False
    e0_sq: float = 0.0
    epsilon: float = 1.0
    efield_form: str = "sin"
    # cylindrical reference solver
    cd_v: float = 1.0
    cd_dl: float = 0.1
    cd_dt_coef: float = 0.1
    # flags
    normal_term_sign: str = "pde"
    init_mode: str = "auto"
    far_scale: float = 10.0
    min_semiaxis_cells: float = 3.0

    def grid(self) -> Grid2D:
        return Grid2D(nx=self.nx, ny=self.ny, origin=(self.ox, self.oy),
                      extent=(self.bx, self.by))

    def transport(self) -> TransportParams:
        return TransportParams(v=(self.vx, self.vy), F0=self.f0)

    def efield(self) -> Optional[EFieldParams]:
        if not self.efield_on:
            return None
        return EFieldParams(E0_sq=self.e0_sq, epsilon=self.epsilon,
                            form=self.efield_form)

    def raster(self):
        floor = self.min_semiaxis_cells * max(self.grid().dx, self.grid().dy)
        scale = self.far_scale

        def transform(e: EllipseParams) -> EllipseParams:
            return EllipseParams(a=max(e.a * scale, floor),
                                 b=max(e.b * scale, floor), center=e.center)
        return transform


def _near_params(spec: BubbleSpec, cfg: RunConfig) -> NearFieldParams:
    if spec.variant == "experiment":
        return NearFieldParams(a=spec.r0,
                               delta_p_over_alpha=spec.dp_over_alpha,
                               alpha=spec.alpha, rho=spec.rho, g=spec.g)
    if spec.variant == "beta":
        return NearFieldParams(a=spec.r0, beta=spec.beta, alpha=spec.alpha)
    if spec.variant == "efield":
        ef = cfg.efield()
        if ef is None:
            raise ConfigError("[efield] section required for bubble variant "
                              "'efield'")
        return NearFieldParams(a=spec.r0, efield=ef, alpha=spec.alpha,
                               rho=spec.rho, g=spec.g)
    raise ConfigError(f"[bubble.{spec.id}] variant: unknown value "
                      f"{spec.variant!r}")


def records_from_config(cfg: RunConfig) -> list[BubbleRecord]:
    records = []
    for spec in cfg.bubbles:
        if spec.kind == "ellipse":
            rec = BubbleRecord(id=spec.id,
                               near=NearFieldParams(a=0.01,
                                                    delta_p_over_alpha=0.0),
                               L=spec.L, N=10, placement=(spec.x, spec.y),
                               ellipse=EllipseParams(a=spec.a, b=spec.b,
                                                     center=(0.0, 0.0)))
        else:
            n_steps = max(10, int(round(spec.L / spec.dt)))
            rec = BubbleRecord(id=spec.id, near=_near_params(spec, cfg),
                               L=spec.L, N=n_steps,
                               placement=(spec.x, spec.y),
                               boundary=spec.boundary,
                               theta_start=spec.theta_start,
                               theta_end=spec.theta_end)
        records.append(rec)
    return records


# --- config text handling ---------------------------------------------------

_BUBBLE_FIELDS = {
    "kind": str, "variant": str, "dp_over_alpha": float, "beta": float,
    "r0": float, "l": float, "dt": float, "boundary": str,
    "theta_start": float, "theta_end": float, "alpha": float, "rho": float,
    "g": float, "a": float, "b": float, "x": float, "y": float,
}

_SCALAR_FIELDS = {
    "run": {"mode": str, "refresh_every": float, "out": str},
    "grid": {"nx": int, "ny": int, "ox": float, "oy": float,
             "bx": float, "by": float},
    "transport": {"vx": float, "vy": float, "f0": float},
    "efield": {"e0_sq": float, "epsilon": float, "form": str},
    "cd": {"v": float, "d_l": float, "d_t": float},
    "flags": {"normal_term_sign": str, "init_mode": str, "far_scale": float,
              "min_semiaxis_cells": float},
}

_FIELD_MAP = {
    ("run", "mode"): "mode", ("run", "refresh_every"): "refresh_every",
    ("run", "out"): "out",
    ("grid", "nx"): "nx", ("grid", "ny"): "ny", ("grid", "ox"): "ox",
    ("grid", "oy"): "oy", ("grid", "bx"): "bx", ("grid", "by"): "by",
    ("transport", "vx"): "vx", ("transport", "vy"): "vy",
    ("transport", "f0"): "f0",
    ("efield", "e0_sq"): "e0_sq", ("efield", "epsilon"): "epsilon",
    ("efield", "form"): "efield_form",
    ("cd", "v"): "cd_v", ("cd", "d_l"): "cd_dl", ("cd", "d_t"): "cd_dt_coef",
    ("flags", "normal_term_sign"): "normal_term_sign",
    ("flags", "init_mode"): "init_mode",
    ("flags", "far_scale"): "far_scale",
    ("flags", "min_semiaxis_cells"): "min_semiaxis_cells",
}


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc

    cfg = RunConfig()
    if not parser.has_section("run"):
        raise ConfigError("[run] section missing")

    def convert(section, key, conv, raw):
        try:
            if conv is float and raw.strip().lower() in ("inf", "infinity"):
                return math.inf
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: cannot parse "
                              f"{raw!r}") from exc

    for section in parser.sections():
        if section.startswith("bubble."):
            continue
        if section not in _SCALAR_FIELDS:
            raise ConfigError(f"[{section}]: unknown section")
        for key, raw in parser.items(section):
            if key == "times" and section == "run":
                try:
                    cfg.times = [float(v) for v in raw.split()]
                except ValueError as exc:
                    raise ConfigError(f"[run] times: cannot parse "
                                      f"{raw!r}") from exc
                continue
            if key not in _SCALAR_FIELDS[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
            value = convert(section, key, _SCALAR_FIELDS[section][key], raw)
            cfg.__setattr__(_FIELD_MAP[(section, key)], value)
        if section == "efield":
            cfg.efield_on = True

    bubble_sections = sorted(
        (s for s in parser.sections() if s.startswith("bubble.")),
        key=lambda s: int(s.split(".", 1)[1]))
    for section in bubble_sections:
        spec = BubbleSpec(id=int(section.split(".", 1)[1]))
        for key, raw in parser.items(section):
            if key not in _BUBBLE_FIELDS:
                raise ConfigError(f"[{section}] {key}: unknown key")
            attr = "L" if key == "l" else key
            setattr(spec, attr, convert(section, key, _BUBBLE_FIELDS[key],
                                        raw))
        cfg.bubbles.append(spec)

    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError(f"[run] mode: {cfg.mode!r} not one of {MODES}")
    if any(t2 <= t1 for t1, t2 in zip(cfg.times, cfg.times[1:])):
        raise ConfigError("[run] times: must be strictly increasing")
    if not cfg.times:
        raise ConfigError("[run] times: at least one snapshot time required")
    if cfg.refresh_every != math.inf and cfg.refresh_every < 1:
        raise ConfigError("[run] refresh_every: must be >= 1 (or inf)")
    if cfg.mode == "coupled-efield" and not cfg.efield_on:
        raise ConfigError("[efield]: section required for mode "
                          "coupled-efield")
    if not cfg.bubbles and cfg.mode != "cd-reference":
        raise ConfigError("[bubble.N]: at least one bubble section required")
    if cfg.mode in ("far-only",):
        for spec in cfg.bubbles:
            if spec.kind != "ellipse":
                raise ConfigError(f"[bubble.{spec.id}] kind: far-only runs "
                                  "need kind = ellipse")
    if cfg.init_mode not in ("auto", "union", "piecewise"):
        raise ConfigError("[flags] init_mode: expected auto, union or "
                          "piecewise")
    if cfg.normal_term_sign not in levelset.NORMAL_TERM_SIGNS:
        raise ConfigError("[flags] normal_term_sign: expected pde or literal")


def config_to_ini(cfg: RunConfig) -> str:
    """Serialize the fully resolved config (manifest body)."""
    out = io.StringIO()
    out.write(f"# bubblefield {__version__} resolved run configuration\n")
    out.write("[run]\n")
    out.write(f"mode = {cfg.mode}\n")
    out.write("times = " + " ".join(f"{t:.17g}" for t in cfg.times) + "\n")
    out.write(f"refresh_every = "
              f"{'inf' if math.isinf(cfg.refresh_every) else f'{cfg.refresh_every:.17g}'}\n")
    out.write(f"out = {cfg.out}\n\n")
    out.write("[grid]\n")
    for key in ("nx", "ny"):
        out.write(f"{key} = {getattr(cfg, key)}\n")
    for key in ("ox", "oy", "bx", "by"):
        out.write(f"{key} = {getattr(cfg, key):.17g}\n")
    out.write("\n[transport]\n")
    out.write(f"vx = {cfg.vx:.17g}\nvy = {cfg.vy:.17g}\nf0 = {cfg.f0:.17g}\n")
    if cfg.efield_on:
        out.write("\n[efield]\n")
        out.write(f"e0_sq = {cfg.e0_sq:.17g}\nepsilon = {cfg.epsilon:.17g}\n")
        out.write(f"form = {cfg.efield_form}\n")
    if cfg.mode == "cd-reference":
        out.write("\n[cd]\n")
        out.write(f"v = {cfg.cd_v:.17g}\nd_l = {cfg.cd_dl:.17g}\n"
                  f"d_t = {cfg.cd_dt_coef:.17g}\n")
    out.write("\n[flags]\n")
    out.write(f"normal_term_sign = {cfg.normal_term_sign}\n")
    out.write(f"init_mode = {cfg.init_mode}\n")
    out.write(f"far_scale = {cfg.far_scale:.17g}\n")
    out.write(f"min_semiaxis_cells = {cfg.min_semiaxis_cells:.17g}\n")
    for spec in cfg.bubbles:
        out.write(f"\n[bubble.{spec.id}]\n")
        out.write(f"kind = {spec.kind}\n")
        if spec.kind == "ellipse":
            out.write(f"a = {spec.a:.17g}\nb = {spec.b:.17g}\n")
        else:
            out.write(f"variant = {spec.variant}\n")
            if spec.variant == "experiment":
                out.write(f"dp_over_alpha = {spec.dp_over_alpha:.17g}\n")
            if spec.variant == "beta":
                out.write(f"beta = {spec.beta:.17g}\n")
            out.write(f"r0 = {spec.r0:.17g}\n")
            out.write(f"l = {spec.L:.17g}\ndt = {spec.dt:.17g}\n")
            out.write(f"boundary = {spec.boundary}\n")
            out.write(f"theta_start = {spec.theta_start:.17g}\n")
            out.write(f"theta_end = {spec.theta_end:.17g}\n")
            out.write(f"alpha = {spec.alpha:.17g}\n")
            out.write(f"rho = {spec.rho:.17g}\ng = {spec.g:.17g}\n")
        out.write(f"x = {spec.x:.17g}\ny = {spec.y:.17g}\n")
    return out.getvalue()


# --- presets -----------------------------------------------------------------

EXP10_PLACEMENTS = [(20.0, 20.0), (20.0, 50.0), (20.0, 80.0), (20.0, 110.0),
                    (20.0, 140.0), (80.0, 20.0), (80.0, 50.0), (80.0, 80.0),
                    (80.0, 110.0), (80.0, 140.0)]


def _exp10_bubbles() -> list[BubbleSpec]:
    specs = []
    for i in range(10):
        x, y = EXP10_PLACEMENTS[i]
        specs.append(BubbleSpec(id=i + 1, dp_over_alpha=0.2 * (i + 1),
                                r0=0.01, L=2.0, dt=1e-3, x=x, y=y))
    return specs


def preset_config(name: str) -> RunConfig:
    cfg = RunConfig()
    if name == "exp1":
        cfg.mode = "near-only"
        dt = 2 * math.pi * 1e-3
        for i, a in enumerate((1.0, 2.0, 3.0, 3.5)):
            cfg.bubbles.append(BubbleSpec(id=i + 1, dp_over_alpha=0.0,
                                          r0=a, L=2 * math.pi * a ** 2 / 4,
                                          dt=dt))
    elif name == "exp2":
        cfg.mode = "near-only"
        for i, dp in enumerate((0.0, 0.8, 1.4)):
            cfg.bubbles.append(BubbleSpec(id=i + 1, dp_over_alpha=dp,
                                          r0=0.01, L=2.0, dt=1e-3))
    elif name == "exp-2bubble":
        cfg.mode = "coupled"
        cfg.times = [0.1, 25.0]
        cfg.init_mode = "piecewise"
        cfg.bubbles = [BubbleSpec(id=1, dp_over_alpha=0.8, r0=0.01, L=1.0,
                                  dt=1e-3, x=20.0, y=100.0),
                       BubbleSpec(id=2, dp_over_alpha=0.8, r0=0.01, L=2.0,
                                  dt=1e-3, x=70.0, y=90.0)]
    elif name == "exp10":
        cfg.mode = "coupled"
        cfg.times = [0.1, 25.0, 50.0]
        cfg.init_mode = "union"
        cfg.bubbles = _exp10_bubbles()
    elif name == "exp-efield":
        cfg.mode = "coupled-efield"
        cfg.times = [0.1, 25.0, 50.0]
        cfg.init_mode = "union"
        cfg.refresh_every = 50.0
        cfg.efield_on = True
        cfg.e0_sq = 0.1
        cfg.epsilon = 1.0
        cfg.efield_form = "sin"
        cfg.bubbles = _exp10_bubbles()
        for spec in cfg.bubbles:
            spec.alpha = 0.1
            spec.rho = 0.1
            spec.g = 9.81
    else:
        raise ConfigError(f"unknown preset {name!r}; available: "
                          f"{', '.join(sorted(PRESETS))}")
    validate_config(cfg)
    return cfg


PRESETS = ("exp1", "exp2", "exp-2bubble", "exp10", "exp-efield")


# --- run execution -----------------------------------------------------------

def _write_profiles(records, out_dir):
    for rec in records:
        if rec.profile is None:
            continue
        lines = ["s,r,z,theta"]
        for s, (r, z, th) in zip(rec.profile.s, rec.profile.values):
            lines.append(f"{s:.17g},{r:.17g},{z:.17g},{th:.17g}")
        atomic_write_text(f"{out_dir}/profile_{rec.id}.csv",
                          "\n".join(lines) + "\n")


def _write_table(records, out_dir):
    lines = ["id,dp_over_alpha,a_bubble,b_bubble"]
    for rec in records:
        dp = (rec.near.delta_p_over_alpha
              if rec.near.delta_p_over_alpha is not None else math.nan)
        lines.append(f"{rec.id},{dp:.17g},{rec.ellipse.a:.17g},"
                     f"{rec.ellipse.b:.17g}")
    atomic_write_text(f"{out_dir}/table.csv", "\n".join(lines) + "\n")


def _snapshot_name(t: float) -> str:
    return f"snapshot_t{t:g}.txt"


def _run_cd_reference(cfg: RunConfig):
    grid = cfg.grid()
    if grid.x[0] <= 0:
        raise ConfigError("[grid] ox: cd-reference needs all radial nodes "
                          "> 0 (offset origin by dx/2)")
    bubbles = [(EllipseParams(a=s.a, b=s.b, center=(0.0, 0.0)), (s.x, s.y))
               for s in cfg.bubbles]
    if bubbles:
        phi = levelset.init_bubbles(bubbles, grid, mode="union")
        u0 = np.maximum(-phi.u, 0.0)
    else:
        u0 = np.zeros((grid.ny, grid.nx))
    field = levelset.LevelSetField(grid=grid, u=u0, time=0.0)
    field.u[0, :] = field.u[-1, :] = 0.0
    field.u[:, 0] = field.u[:, -1] = 0.0
    bound = levelset.cd_stability_dt(grid, cfg.cd_v, cfg.cd_dl, cfg.cd_dt_coef)
    snapshots = []
    for t in cfg.times:
        interval = t - field.time
        n_steps = max(1, int(np.ceil(interval / bound)))
        dt = interval / n_steps
        for _ in range(n_steps):
            field = levelset.cd_cylindrical_step(field, cfg.cd_v, cfg.cd_dl,
                                                 cfg.cd_dt_coef, dt)
        field.time = t
        snapshots.append(field.copy())
    return snapshots


def run(cfg: RunConfig, echo=print) -> int:
    """Execute the configured pipeline and write its output files."""
    out_dir = cfg.out
    atomic_write_text(f"{out_dir}/manifest.txt", config_to_ini(cfg))
    records = records_from_config(cfg)

    if cfg.mode == "near-only":
        coupling.solve_near_fields(records)
        _write_profiles(records, out_dir)
        _write_table(records, out_dir)
        echo(f"wrote {len(records)} profiles + table.csv -> {out_dir}")
        return 0

    if cfg.mode == "cd-reference":
        snapshots = _run_cd_reference(cfg)
        for snap in snapshots:
            levelset.write_snapshot(snap, f"{out_dir}/{_snapshot_name(snap.time)}")
        echo(f"wrote {len(snapshots)} cd-reference snapshots -> {out_dir}")
        return 0

    grid = cfg.grid()
    transport = cfg.transport()
    raster = cfg.raster()
    init_mode = None if cfg.init_mode == "auto" else cfg.init_mode

    csv_lines = [coupling.BUBBLES_CSV_HEADER]

    def on_snapshot(snap, recs):
        levelset.write_snapshot(snap, f"{out_dir}/{_snapshot_name(snap.time)}")
        csv_lines.extend(bubbles_csv_rows(snap, recs))

    if cfg.mode == "far-only":
        field = levelset.init_bubbles(
            [(rec.ellipse, rec.placement) for rec in records], grid,
            mode=init_mode)
        lo, hi = levelset.zero_band_gradient_stats(field)
        echo(f"diagnostic: zero-band |grad u| in [{lo:.3g}, {hi:.3g}] "
             "(quadratic init, no reinitialization)")
        snapshots = []
        for t in cfg.times:
            field = coupling._advance_tracking(field, transport, t, records,
                                               cfg.normal_term_sign)
            snapshots.append(field.copy())
            on_snapshot(snapshots[-1], records)
    else:
        efield = cfg.efield() if cfg.mode == "coupled-efield" else None
        snapshots = coupling.run_coupled_cycle(
            records, grid, transport, efield, cfg.times,
            refresh_every=cfg.refresh_every, init_mode=init_mode,
            normal_term_sign=cfg.normal_term_sign, raster=raster,
            on_snapshot=on_snapshot)
        _write_profiles(records, out_dir)
        _write_table(records, out_dir)

    atomic_write_text(f"{out_dir}/bubbles.csv", "\n".join(csv_lines) + "\n")
    echo(f"wrote {len(snapshots)} snapshots + bubbles.csv -> {out_dir}")
    return 0


def table(cfg: RunConfig, csv: bool = False, echo=print) -> int:
    """Solve the near fields and print the fitted-ellipse table."""
    records = [r for r in records_from_config(cfg) if r.ellipse is None]
    if not records:
        raise ConfigError("[bubble.N]: near-field bubble sections required "
                          "for the table command")
    coupling.solve_near_fields(records)
    if csv:
        echo("id,dp_over_alpha,a_bubble,b_bubble")
        for rec in records:
            dp = rec.near.delta_p_over_alpha
            dp = math.nan if dp is None else dp
            echo(f"{rec.id},{dp:.17g},{rec.ellipse.a:.17g},"
                 f"{rec.ellipse.b:.17g}")
    else:
        echo(f"{'id':>4} {'dp/alpha':>10} {'a_bubble':>10} {'b_bubble':>10}")
        for rec in records:
            dp = rec.near.delta_p_over_alpha
            dp = math.nan if dp is None else dp
            echo(f"{rec.id:>4} {dp:>10.4f} {rec.ellipse.a:>10.4f} "
                 f"{rec.ellipse.b:>10.4f}")
    return 0


SEED_DOC = """\
# bubblefield run configuration (flat INI key-value text)
# every key below shows its default; drop any key to accept the default

[run]
mode = coupled            # near-only | far-only | coupled | coupled-efield | cd-reference
times = 0.1 25 50         # snapshot times, strictly increasing
refresh_every = inf       # near-field re-solve cadence in far-field steps (coupled modes)
out = out                 # output directory (the CLI --out flag overrides)

[grid]                    # far-field node lattice, x_i = ox + i dx
nx = 100
ny = 200
ox = 0.0
oy = 0.0
bx = 100.0                # dx = (bx - ox) / nx
by = 200.0

[transport]
vx = 0.0                  # advection velocity (>= 0, upwind orientation)
vy = 1.0
f0 = 0.05                 # outward normal speed (>= 0)

#[efield]                 # presence of this section switches the field on
#e0_sq = 0.1              # |E0|^2
#epsilon = 1.0
#form = sin               # sin: (9/8)|E0|^2 sin(theta); eps-sin2: (9/8) eps |E0|^2 sin^2

#[cd]                     # cylindrical convection-diffusion reference solver
#v = 1.0
#d_l = 0.1
#d_t = 0.1

[flags]
normal_term_sign = pde    # pde: -F0 |grad u| (bubbles grow); literal: +
init_mode = auto          # auto | union | piecewise
far_scale = 10            # fitted-ellipse scale factor at rasterization
min_semiaxis_cells = 3    # resolvability floor for rasterized semi-axes

[bubble.1]
kind = near               # near: solve the formation BVP; ellipse: take a, b directly
variant = experiment      # experiment | beta | efield
dp_over_alpha = 0.2
r0 = 0.01                 # r(0)
l = 2.0                   # arc length
dt = 0.001                # mesh step (N = l / dt)
boundary = ivp            # ivp | theta-end | closure
theta_start = 1.5707963267948966
theta_end = 3.141592653589793
alpha = 1.0               # mono-layer surface tension (e-field pressure scale)
rho = 0.0
g = 0.0
x = 20.0                  # far-field placement
y = 50.0
"""


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bubblefield",
        description="Bubble formation (Young-Laplace BVP) and transport "
                    "(level-set) pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        p.add_argument("--preset", choices=PRESETS,
                       help="compiled-in experiment preset")
        p.add_argument("--config", help="INI config file path")

    run_p = sub.add_parser("run", help="execute a pipeline run")
    add_source(run_p)
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--seed-doc", action="store_true",
                       help="print a documented config template and exit")

    table_p = sub.add_parser("table", help="print the fitted-ellipse table")
    add_source(table_p)
    table_p.add_argument("--csv", action="store_true",
                         help="machine-readable output")

    args = parser.parse_args(argv)

    try:
        if args.command == "run" and args.seed_doc:
            print(SEED_DOC, end="")
            return 0
        if bool(args.preset) == bool(args.config):
            raise ConfigError("exactly one of --preset or --config required")
        if args.preset:
            cfg = preset_config(args.preset)
        else:
            try:
                with open(args.config) as fh:
                    cfg = parse_config(fh.read())
            except OSError as exc:
                raise ConfigError(f"--config: {exc}") from exc
        if args.command == "run":
            if args.out:
                cfg.out = args.out
            return run(cfg)
        return table(cfg, csv=args.csv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except BubblefieldError as exc:
        print(f"numerical failure in {type(exc).__module__}."
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
