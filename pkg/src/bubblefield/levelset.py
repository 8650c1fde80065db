"""Far-field transport: 2D level-set field, upwind operators, time stepping.

The level function u lives on an nx-by-ny node lattice, x_i = ox + i dx,
y_j = oy + j dy, stored as u[j, i]. Bubbles are the u < 0 regions; the
explicit update combines first-order upwind advection (v_x, v_y >= 0) with
the Godunov discretization of the outward normal-speed term.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._util import atomic_write_text
from .errors import CflViolation, EmptyBubbleList

CFL_SAFETY = 0.9
NORMAL_TERM_SIGNS = ("pde", "literal")


@dataclass(frozen=True)
class Grid2D:
    """Uniform node lattice covering [ox, bx) x [oy, by)."""

    nx: int
    ny: int
    origin: tuple[float, float] = (0.0, 0.0)
    extent: tuple[float, float] = None

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("nx and ny must be >= 3")
        if self.extent is None:
            object.__setattr__(self, "extent",
                               (self.origin[0] + self.nx,
                                self.origin[1] + self.ny))
        if not (self.extent[0] > self.origin[0]
                and self.extent[1] > self.origin[1]):
            raise ValueError("extent must exceed origin")

    @property
    def dx(self) -> float:
        return (self.extent[0] - self.origin[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.extent[1] - self.origin[1]) / self.ny

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.dx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + self.dy * np.arange(self.ny)

    def meshgrid(self):
        return np.meshgrid(self.x, self.y)


@dataclass
class LevelSetField:
    grid: Grid2D
    u: np.ndarray                 # (ny, nx)
    time: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("u must have shape (ny, nx)")
        if not np.isfinite(self.u).all():
            raise ValueError("u must be finite everywhere")

    def copy(self) -> "LevelSetField":
        return LevelSetField(grid=self.grid, u=self.u.copy(), time=self.time)


@dataclass(frozen=True)
class TransportParams:
    """Advection velocity and outward normal speed (all >= 0, upwind)."""

    v: tuple[float, float] = (0.0, 0.0)
    F0: float = 0.0

    def __post_init__(self):
        if self.v[0] < 0 or self.v[1] < 0 or self.F0 < 0:
            raise ValueError("upwind orientation assumes v_x, v_y, F0 >= 0")


def _one_sided(u: np.ndarray, dx: float, dy: float):
    """Clamped one-sided differences D-x, D+x, D-y, D+y on every node."""
    px = np.pad(u, ((0, 0), (1, 1)), mode="edge")
    py = np.pad(u, ((1, 1), (0, 0)), mode="edge")
    dmx = (u - px[:, :-2]) / dx
    dpx = (px[:, 2:] - u) / dx
    dmy = (u - py[:-2, :]) / dy
    dpy = (py[2:, :] - u) / dy
    return dmx, dpx, dmy, dpy


def upwind_diffs(field: LevelSetField, i: int, j: int):
    """(D-x, D+x, D-y, D+y) at node (i, j); edges clamp to zero slope."""
    dmx, dpx, dmy, dpy = _one_sided(field.u, field.grid.dx, field.grid.dy)
    return dmx[j, i], dpx[j, i], dmy[j, i], dpy[j, i]


def _godunov(u: np.ndarray, dx: float, dy: float) -> np.ndarray:
    dmx, dpx, dmy, dpy = _one_sided(u, dx, dy)
    return np.sqrt(np.maximum(dmx, 0.0) ** 2 + np.minimum(dpx, 0.0) ** 2
                   + np.maximum(dmy, 0.0) ** 2 + np.minimum(dpy, 0.0) ** 2)


def godunov_grad_mag(field: LevelSetField, i: int, j: int) -> float:
    """Godunov upwind |grad u| at node (i, j) for outward motion."""
    return float(_godunov(field.u, field.grid.dx, field.grid.dy)[j, i])


def cfl_dt(field: LevelSetField, p: TransportParams) -> float:
    """Largest stable explicit step; +inf when all speeds vanish."""
    g = field.grid
    denom = (p.v[0] / g.dx + p.v[1] / g.dy
             + p.F0 * np.sqrt(1.0 / g.dx ** 2 + 1.0 / g.dy ** 2))
    return np.inf if denom == 0.0 else CFL_SAFETY / denom


def step(field: LevelSetField, p: TransportParams, dt: float,
         normal_term_sign: str = "pde") -> LevelSetField:
    """One explicit upwind step of size dt.

    The normal-speed term enters as -dt F0 |grad u| ("pde" sign), which
    grows the u < 0 bubbles at speed F0; "literal" flips it to +.
    """
    if normal_term_sign not in NORMAL_TERM_SIGNS:
        raise ValueError(f"normal_term_sign must be one of "
                         f"{NORMAL_TERM_SIGNS}")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    bound = cfl_dt(field, p)
    if dt > bound * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:g} exceeds stability bound {bound:g}; "
                           "subcycle the interval")
    g = field.grid
    u = field.u
    dmx, _, dmy, _ = _one_sided(u, g.dx, g.dy)
    unew = u - dt * p.v[0] * dmx - dt * p.v[1] * dmy
    if p.F0 != 0.0:
        grad = _godunov(u, g.dx, g.dy)
        if normal_term_sign == "pde":
            unew = unew - dt * p.F0 * grad
        else:
            unew = unew + dt * p.F0 * grad
    return LevelSetField(grid=g, u=unew, time=field.time + dt)


def advance(field: LevelSetField, p: TransportParams, t_target: float,
            normal_term_sign: str = "pde") -> LevelSetField:
    """Advance to t_target, splitting the interval into equal CFL steps."""
    interval = t_target - field.time
    if interval < 0:
        raise ValueError("t_target must be >= current time")
    if interval == 0:
        return field.copy()
    bound = cfl_dt(field, p)
    n_steps = 1 if np.isinf(bound) else max(1, int(np.ceil(interval / bound)))
    dt = interval / n_steps
    out = field
    for _ in range(n_steps):
        out = step(out, p, dt, normal_term_sign=normal_term_sign)
    # land exactly on the target time regardless of rounding
    out.time = t_target
    return out


INIT_MODES = ("union", "piecewise")


def _bubble_quad(grid: Grid2D, ellipse, center) -> np.ndarray:
    X, Y = grid.meshgrid()
    cx, cy = center
    return ((X - cx) ** 2 + ((Y - cy) * ellipse.a / ellipse.b) ** 2
            - ellipse.a ** 2)


def init_bubbles(bubbles, grid: Grid2D, mode: str | None = None,
                 time0: float = 0.0) -> LevelSetField:
    """Level-set initialization whose zero set is the bubble boundaries.

    ``bubbles`` is a list of (EllipseParams, (cx, cy)) placements. Mode
    "piecewise" splits the domain into vertical strips at midpoints
    between bubble centers, each strip carrying its bubble's quadratic;
    "union" takes the pointwise minimum. Default: piecewise up to two
    bubbles, union beyond.
    """
    if not bubbles:
        raise EmptyBubbleList("need at least one bubble")
    if mode is None:
        mode = "piecewise" if len(bubbles) <= 2 else "union"
    if mode not in INIT_MODES:
        raise ValueError(f"mode must be one of {INIT_MODES}")

    ox, oy = grid.origin
    bx, by = grid.extent
    for k, (ell, (cx, cy)) in enumerate(bubbles):
        if not (ox + ell.a <= cx <= bx - ell.a
                and oy + ell.b <= cy <= by - ell.b):
            warnings.warn(f"bubble {k} at ({cx}, {cy}) extends outside the "
                          "grid", stacklevel=2)
    for k in range(len(bubbles)):
        for m in range(k + 1, len(bubbles)):
            (ek, (xk, yk)), (em, (xm, ym)) = bubbles[k], bubbles[m]
            if (abs(xk - xm) < ek.a + em.a) and (abs(yk - ym) < ek.b + em.b):
                warnings.warn(f"bubbles {k} and {m} overlap", stacklevel=2)

    quads = [_bubble_quad(grid, ell, c) for ell, c in bubbles]
    if mode == "union" or len(bubbles) == 1:
        u = np.minimum.reduce(quads)
    else:
        order = np.argsort([c[0] for _, c in bubbles])
        xs = [bubbles[k][1][0] for k in order]
        splits = [0.5 * (xa + xb) for xa, xb in zip(xs, xs[1:])]
        edges = [-np.inf] + splits + [np.inf]
        X, _ = grid.meshgrid()
        u = np.empty((grid.ny, grid.nx))
        for strip, k in enumerate(order):
            mask = (X >= edges[strip]) & (X < edges[strip + 1])
            u[mask] = quads[k][mask]
    return LevelSetField(grid=grid, u=u, time=time0)


def zero_band_gradient_stats(field: LevelSetField, band: float = 2.0):
    """(min, max) of the Godunov |grad u| within |u| <= band * max(dx, dy).

    The initialization quadratics are not signed distances; this reports
    how far the zero band is from |grad u| = 1 (no reinitialization is
    performed).
    """
    g = field.grid
    grad = _godunov(field.u, g.dx, g.dy)
    mask = np.abs(field.u) <= band * max(g.dx, g.dy)
    if not mask.any():
        return (np.nan, np.nan)
    return (float(grad[mask].min()), float(grad[mask].max()))


def cd_stability_dt(grid: Grid2D, v: float, D_L: float, D_t: float) -> float:
    """Explicit stability bound for the cylindrical convection-diffusion
    step: advection and axial diffusion act along y (=z), radial diffusion
    along x (=r)."""
    denom = v / grid.dy + 2.0 * D_L / grid.dy ** 2 + 2.0 * D_t / grid.dx ** 2
    return np.inf if denom == 0.0 else CFL_SAFETY / denom


def cd_cylindrical_step(field: LevelSetField, v: float, D_L: float,
                        D_t: float, dt: float) -> LevelSetField:
    """One explicit step of the cylindrical convection-diffusion model.

    du/dt = -v du/dz + D_L d2u/dz2 + (D_t / r) d(r du/dr)/dr on an
    (r, z) grid with x = r (offset so all nodes have r > 0), y = z;
    upwind advection in z, centered diffusion, conservative radial form
    with face-centered radii, Dirichlet u = 0 on all boundaries.
    """
    g = field.grid
    r = g.x
    if r[0] <= 0:
        raise ValueError("all radial nodes must satisfy r > 0 "
                         "(offset the grid origin by dr/2)")
    bound = cd_stability_dt(g, v, D_L, D_t)
    if dt > bound * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:g} exceeds stability bound {bound:g}")
    u = field.u
    uz = np.pad(u, ((1, 1), (0, 0)))            # Dirichlet zero in z
    ur = np.pad(u, ((0, 0), (1, 1)))            # Dirichlet zero in r
    adv = -v * (u - uz[:-2, :]) / g.dy
    diff_z = D_L * (uz[2:, :] - 2.0 * u + uz[:-2, :]) / g.dy ** 2
    r_plus = r + 0.5 * g.dx
    r_minus = r - 0.5 * g.dx
    flux = (r_plus[None, :] * (ur[:, 2:] - u)
            - r_minus[None, :] * (u - ur[:, :-2]))
    diff_r = D_t * flux / (r[None, :] * g.dx ** 2)
    unew = u + dt * (adv + diff_z + diff_r)
    unew[0, :] = 0.0
    unew[-1, :] = 0.0
    unew[:, 0] = 0.0
    unew[:, -1] = 0.0
    return LevelSetField(grid=g, u=unew, time=field.time + dt)


SNAPSHOT_MAGIC = "# levelset"


def write_snapshot(field: LevelSetField, path: str) -> None:
    """Plain-text snapshot: header then ny rows of nx values."""
    g = field.grid
    lines = [f"{SNAPSHOT_MAGIC} {g.nx} {g.ny} {g.dx:.17g} {g.dy:.17g} "
             f"{g.origin[0]:.17g} {g.origin[1]:.17g} {field.time:.17g}"]
    for j in range(g.ny):
        lines.append(" ".join(f"{v:.17g}" for v in field.u[j]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_snapshot(path: str) -> LevelSetField:
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != SNAPSHOT_MAGIC.split():
            raise ValueError(f"{path}: not a level-set snapshot")
        nx, ny = int(header[2]), int(header[3])
        dx, dy, ox, oy, t = map(float, header[4:9])
        u = np.loadtxt(fh, ndmin=2)
    if u.shape != (ny, nx):
        raise ValueError(f"{path}: header says {ny}x{nx}, data is "
                         f"{u.shape[0]}x{u.shape[1]}")
    grid = Grid2D(nx=nx, ny=ny, origin=(ox, oy),
                  extent=(ox + nx * dx, oy + ny * dy))
    return LevelSetField(grid=grid, u=u, time=t)
